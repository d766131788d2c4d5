#pragma once

#include "bolzalab/core.hpp"

#include <cmath>

namespace bolza {

/*
    The unit tangent bundle of the hyperbolic plane is modelled as PSL(2,R).

    A matrix g = [a b; c d], det = 1, acts on the upper half-plane H by
    tau -> (a tau + b)/(c tau + d).  The action on unit tangent frames is
    simply transitive, so g itself *is* the frame obtained by pushing the
    base frame (tau = i, pointing up) forward by g.  The Cayley map
    w = (tau - i)/(tau + i) carries H to the Poincare disk with metric
    e^{2 omega} |dw|^2, omega(w) = log(2/(1-|w|^2)) (curvature -1); the base
    frame lands at w = 0 pointing along +x (fiber angle theta = 0).

    The three frame flows are right translations by one-parameter subgroups,
    generated by

        X      A = [ 1/2   0  ;  0  -1/2 ]   geodesic flow
        Xperp  B = [  0   1/2 ; 1/2   0  ]   perpendicular translation
        V      W = [  0   1/2 ; -1/2  0  ]   fiber rotation, V = d/dtheta

    Right translations give left-invariant vector fields, whose brackets are
    the matrix brackets:  [A,W] = B, [B,W] = -A, [A,B] = W, i.e.

        [X,V] = Xperp,   [Xperp,V] = -X,   [X,Xperp] = V,

    the structure equations of constant curvature -1 with the sign convention
    Xperp := [X,V].  Because flows act on the right and the surface group acts
    on the left, all flows descend to the quotient.
*/

struct GroupElement {
    double a = 1.0, b = 0.0, c = 0.0, d = 1.0;
    // products since last renormalization; determinant drift is divided out
    // every 64 multiplications
    int products = 0;

    double det() const { return a * d - b * c; }
    double trace() const { return a + d; }

    void normalize() {
        double s = std::sqrt(det());
        a /= s;
        b /= s;
        c /= s;
        d /= s;
        products = 0;
    }

    GroupElement inverse() const {
        GroupElement r{d, -b, -c, a, products};
        return r;
    }

    GroupElement operator*(const GroupElement& o) const {
        GroupElement r{a * o.a + b * o.c, a * o.b + b * o.d,
                       c * o.a + d * o.c, c * o.b + d * o.d,
                       products + o.products + 1};
        if (r.products >= 64) r.normalize();
        return r;
    }

    static GroupElement identity() { return {}; }

    // equality in PSL(2,R): up to a global sign
    double projective_distance(const GroupElement& o) const {
        double dp = 0.0, dm = 0.0;
        dp += sq(a - o.a) + sq(b - o.b) + sq(c - o.c) + sq(d - o.d);
        dm += sq(a + o.a) + sq(b + o.b) + sq(c + o.c) + sq(d + o.d);
        return std::sqrt(std::min(dp, dm));
    }
};

enum class FlowKind { geodesic, perpendicular, rotation };

// exp of the three generators in closed form
inline GroupElement geodesic_translation(double t) {
    double e = std::exp(0.5 * t);
    return {e, 0.0, 0.0, 1.0 / e, 0};
}

inline GroupElement perp_translation(double t) {
    double ch = std::cosh(0.5 * t), sh = std::sinh(0.5 * t);
    return {ch, sh, sh, ch, 0};
}

inline GroupElement rotation(double t) {
    double co = std::cos(0.5 * t), si = std::sin(0.5 * t);
    return {co, si, -si, co, 0};
}

inline GroupElement flow_step(FlowKind which, double t) {
    switch (which) {
        case FlowKind::geodesic: return geodesic_translation(t);
        case FlowKind::perpendicular: return perp_translation(t);
        default: return rotation(t);
    }
}

// --- disk-model geometry -------------------------------------------------

inline complexd mobius_apply_h(const GroupElement& g, complexd tau) {
    return (g.a * tau + g.b) / (g.c * tau + g.d);
}

inline complexd cayley(complexd tau) { return (tau - complexd(0, 1)) / (tau + complexd(0, 1)); }

inline complexd cayley_inv(complexd w) {
    return complexd(0, 1) * (1.0 + w) / (1.0 - w);
}

// disk Mobius action of a group element (through the Cayley transform)
inline complexd mobius_apply_disk(const GroupElement& g, complexd w) {
    return cayley(mobius_apply_h(g, cayley_inv(w)));
}

// hyperbolic distance in the disk, metric 2|dw|/(1-|w|^2)
inline double dist_disk(complexd z, complexd w) {
    double r = std::abs((z - w) / (1.0 - std::conj(w) * z));
    return 2.0 * std::atanh(r);
}

// conformal factor omega(z) with g = e^{2 omega} |dz|^2
inline double conformal_log_factor(complexd z) { return std::log(2.0 / (1.0 - std::norm(z))); }

struct DiskCoords {
    complexd z;
    double theta;  // in [0, 2pi)
};

inline double wrap_angle(double t) {
    t = std::fmod(t, two_pi);
    if (t < 0) t += two_pi;
    return t;
}

// Disk coordinates of the frame g: base point and fiber angle.  The fiber
// direction is the pushforward of the up-vector at i, carried to the disk.
// Composing Cayley with the Mobius action collapses to
//     z = ((b+c) + (a-d) i) / ((b-c) + (a+d) i),   dir = -2 / ((b-c)+(a+d)i)^2,
// one division and one atan2.
inline DiskCoords frame_to_disk(const GroupElement& g) {
    complexd num(g.b + g.c, g.a - g.d);
    complexd den(g.b - g.c, g.a + g.d);
    complexd z = num / den;
    double theta = pi - 2.0 * std::atan2(den.imag(), den.real());
    if (theta < 0) theta += two_pi;
    if (theta >= two_pi) theta -= two_pi;
    return {z, theta};
}

// Frame with base point z and fiber angle theta: rotate toward z, translate
// by d(0,z), rotate to the requested direction.  Inverse of frame_to_disk.
inline GroupElement frame_from_disk(complexd z, double theta) {
    double r = std::abs(z);
    if (r < 1e-300) return rotation(theta);
    double alpha = std::arg(z);
    double s = 2.0 * std::atanh(r);
    return rotation(alpha) * geodesic_translation(s) * rotation(theta - alpha);
}

// A point of SM carried as a frame plus cached disk coordinates.  in_domain
// marks points already reduced into the fundamental octagon, so evaluators
// can skip re-reducing them (a pure hint; false is always safe).
struct PhasePoint {
    GroupElement g;
    complexd z;
    double theta = 0.0;
    bool in_domain = false;

    static PhasePoint from_group(const GroupElement& g) {
        DiskCoords dc = frame_to_disk(g);
        return {g, dc.z, dc.theta, false};
    }
};

inline PhasePoint base_frame() { return PhasePoint::from_group(GroupElement::identity()); }

// Frame flows; exact group law, no reduction.
inline PhasePoint flow(const PhasePoint& p, double t, FlowKind which) {
    return PhasePoint::from_group(p.g * flow_step(which, t));
}

// residual of the PhasePoint consistency invariant
inline double consistency_residual(const PhasePoint& p) {
    return frame_from_disk(p.z, p.theta).projective_distance(p.g);
}

}  // namespace bolza
