#pragma once

#include "bolzalab/core.hpp"
#include "bolzalab/mobius.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace bolza {

/*
    Bolza surface: the genus-2 quotient of the disk by the Fuchsian group of
    the regular hyperbolic octagon with vertex angle pi/4 and opposite sides
    identified.  Octagon trigonometry (right triangle with angles pi/8, pi/8,
    pi/2 at center / vertex / side midpoint):

        circumradius  cosh R = cot^2(pi/8) = 3 + 2 sqrt(2)
        inradius      cosh r = cot(pi/8)   = 1 + sqrt(2)

    The side pairing g_k translates by 2r through the midpoint of side k
    (direction k pi/4), k = 0..3; g_{k+4} = g_k^{-1}.  Each generator has
    trace 2 cosh(r) = 2(1 + sqrt 2), so the generators realize the systole
    2 arccosh(1 + sqrt 2).  Walking the corners around the single vertex of
    the quotient gives the defining relation

        g0 g3 g2^{-1} g1 g0^{-1} g3^{-1} g2 g1^{-1} = Id,

    the genus-2 relator in this generating system (conjugate to the standard
    commutator form [a,b][c,d] under a change of generators).
*/

// letter encoding: 0..3 are g_0..g_3, 4..7 their inverses; inv(l) = l ^ 4
using Word = std::vector<uint8_t>;

inline uint8_t inverse_letter(uint8_t l) { return l ^ 4u; }

struct SurfaceGroup {
    std::array<GroupElement, 8> pairing;   // g_0..g_3, g_0^-1..g_3^-1
    std::array<complexd, 8> neighbor;      // pairing[k](0), bisector sites
    std::array<complexd, 8> vertex;        // octagon vertices in the disk
    Word relation;                         // defining relation as letters
    double relation_residual = 0.0;
    double circumradius = 0.0;             // hyperbolic
    double inradius = 0.0;
    double side_length = 0.0;
    double interior_disk_radius = 0.0;     // |z| below this is surely inside
    std::vector<GroupElement> short_ball;  // deck elements of word length <= 2

    GroupElement word_element(const Word& w) const {
        GroupElement m = GroupElement::identity();
        for (uint8_t l : w) m = m * pairing[l];
        return m;
    }
};

inline bool in_fundamental_domain(const SurfaceGroup& grp, complexd z, double tol = 1e-13) {
    double az = std::abs(z);
    if (az <= grp.interior_disk_radius) return true;
    // Dirichlet condition: no neighbor orbit point is closer than the origin
    double cut = sq(az - tol);
    for (const auto& p : grp.neighbor) {
        if (std::norm(z - p) < cut * std::norm(1.0 - std::conj(p) * z)) return false;
    }
    return true;
}

inline SurfaceGroup build_bolza() {
    SurfaceGroup grp;
    const double inradius = std::acosh(1.0 + std::sqrt(2.0));
    const double circum = std::acosh(3.0 + 2.0 * std::sqrt(2.0));
    grp.inradius = inradius;
    grp.circumradius = circum;
    grp.side_length = 2.0 * std::asinh(std::sinh(circum) * std::sin(pi / 8.0));
    grp.interior_disk_radius = std::tanh(0.5 * inradius) * (1.0 - 1e-12);

    for (int k = 0; k < 4; ++k) {
        double phi = k * pi / 4.0;
        GroupElement t = rotation(phi) * geodesic_translation(2.0 * inradius) * rotation(-phi);
        t.normalize();
        grp.pairing[k] = t;
        grp.pairing[k + 4] = t.inverse();
    }
    for (int k = 0; k < 8; ++k) {
        grp.neighbor[k] = mobius_apply_disk(grp.pairing[k], complexd(0, 0));
        grp.vertex[k] = std::polar(std::tanh(0.5 * circum), (2 * k + 1) * pi / 8.0);
    }

    grp.relation = {0, 3, 6, 1, 4, 7, 2, 5};
    GroupElement rel = grp.word_element(grp.relation);
    grp.relation_residual = rel.projective_distance(GroupElement::identity());
    if (grp.relation_residual > 1e-9)
        throw ConstructionError("Bolza relation residual " + fmt17(grp.relation_residual));

    // side-pairing check: g_k maps the endpoints of side k+4 onto side k
    for (int k = 0; k < 4; ++k) {
        complexd im1 = mobius_apply_disk(grp.pairing[k], grp.vertex[(k + 3) & 7]);
        complexd im2 = mobius_apply_disk(grp.pairing[k], grp.vertex[(k + 4) & 7]);
        double res = std::abs(im1 - grp.vertex[k]) + std::abs(im2 - grp.vertex[(k + 7) & 7]);
        if (res > 1e-9) throw ConstructionError("side pairing residual " + fmt17(res));
    }

    grp.short_ball.push_back(GroupElement::identity());
    for (int k = 0; k < 8; ++k) grp.short_ball.push_back(grp.pairing[k]);
    for (int k = 0; k < 8; ++k)
        for (int l = 0; l < 8; ++l)
            if (l != inverse_letter(static_cast<uint8_t>(k)))
                grp.short_ball.push_back(grp.pairing[k] * grp.pairing[l]);
    return grp;
}

struct ReduceResult {
    complexd z;
    GroupElement gamma;  // gamma . z_in = z
    int steps = 0;
};

// Greedy distance-decreasing reduction into the Dirichlet octagon: while some
// neighbor orbit point is closer than the origin, apply the pairing that
// moves the point closest.  Each accepted step strictly decreases d(z, 0).
inline ReduceResult reduce(const SurfaceGroup& grp, complexd z, int max_steps = 10000) {
    ReduceResult r{z, GroupElement::identity(), 0};
    while (r.steps < max_steps) {
        // track the best |Mobius quotient| as a fraction na/nb of squared norms
        double best_na = std::norm(r.z) * (1.0 - 2e-15), best_nb = 1.0;
        int best_k = -1;
        if (std::norm(r.z) > sq(grp.interior_disk_radius)) {
            for (int k = 0; k < 8; ++k) {
                double na = std::norm(r.z - grp.neighbor[k]);
                double nb = std::norm(1.0 - std::conj(grp.neighbor[k]) * r.z);
                if (na * best_nb < best_na * nb) {
                    best_na = na;
                    best_nb = nb;
                    best_k = k;
                }
            }
        }
        if (best_k < 0) return r;
        // d(z, g_k 0) = d(g_k^{-1} z, 0); the Mobius quotient above is exactly
        // the disk action of g_k^{-1} up to a unit rotation, so recompute the
        // image through the group element to keep gamma and z consistent.
        GroupElement step = grp.pairing[inverse_letter(static_cast<uint8_t>(best_k))];
        r.gamma = step * r.gamma;
        r.z = mobius_apply_disk(step, r.z);
        ++r.steps;
    }
    throw IterationCap("fundamental-domain reduction did not terminate");
}

// Reduction of a phase point: act on the frame by the deck element found for
// its base point.  Left action, so it commutes with all frame flows.
inline PhasePoint reduce(const SurfaceGroup& grp, const PhasePoint& p, int max_steps = 10000) {
    if (p.in_domain) return p;
    PhasePoint q = p;
    if (std::abs(p.z) > grp.interior_disk_radius) {
        ReduceResult r = reduce(grp, p.z, max_steps);
        if (r.steps > 0) q = PhasePoint::from_group(r.gamma * p.g);
    }
    q.in_domain = true;
    return q;
}

inline PhasePoint reduced_point(const SurfaceGroup& grp, const GroupElement& g) {
    return reduce(grp, PhasePoint::from_group(g));
}

// Frame distance on the quotient: minimum over deck elements with word
// length <= 2, enough to identify representatives near the octagon boundary.
inline double quotient_distance(const SurfaceGroup& grp, const PhasePoint& p, const PhasePoint& q) {
    double best = 1e300;
    for (const auto& gam : grp.short_ball) {
        best = std::min(best, (gam * p.g).projective_distance(q.g));
    }
    return best;
}

}  // namespace bolza
