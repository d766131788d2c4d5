#pragma once

#include "bolzalab/core.hpp"
#include "bolzalab/group.hpp"
#include "bolzalab/measure.hpp"
#include "bolzalab/rng.hpp"

#include <functional>
#include <utility>
#include <vector>

namespace bolza {

/*
    Functions on SM with fiber-Fourier structure.  A FiberField is a
    composable evaluator plus a truncation order K; the fiber decomposition
    u = sum_k u_k with V u_k = i k u_k is recovered on demand by quadrature
    over the rotation flow (trapezoid with n_theta >= 4K+4 nodes, which is
    exact for band-limited fibers).

    Evaluators own their Gamma-invariance: fields built from chart data reduce
    the phase point into the fundamental octagon before reading (z, theta).
    Differential operators are central finite differences along the exact
    flows; the isothermal-coordinate formulas appear only in tests.
*/
struct FiberField {
    std::function<complexd(const PhasePoint&)> eval;
    int K = 0;
    int n_theta = 0;

    complexd operator()(const PhasePoint& p) const { return eval(p); }
};

inline int default_n_theta(int K) { return 4 * K + 4; }

inline FiberField make_field(std::function<complexd(const PhasePoint&)> f, int K) {
    return {std::move(f), K, default_n_theta(K)};
}

// field from chart data u(z, theta); reduction happens inside the evaluator
inline FiberField make_chart_field(const SurfaceGroup& grp,
                                   std::function<complexd(complexd, double)> f, int K) {
    auto ev = [&grp, f = std::move(f)](const PhasePoint& p) {
        PhasePoint q = reduce(grp, p);
        return f(q.z, q.theta);
    };
    return make_field(ev, K);
}

inline FiberField constant_field(complexd c) {
    return make_field([c](const PhasePoint&) { return c; }, 0);
}

// fiber-Fourier coefficients c_k(z), k = -K..K, in the chart trivialization
inline std::vector<complexd> fiber_coeffs(const FiberField& u, complexd z, int K = -1,
                                          int n_theta = 0) {
    if (K < 0) K = u.K;
    int n = n_theta > 0 ? n_theta : std::max(default_n_theta(K), u.n_theta);
    std::vector<complexd> vals(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) {
        double th = two_pi * j / n;
        vals[j] = u.eval(PhasePoint{frame_from_disk(z, th), z, th, true});
    }
    std::vector<complexd> out(static_cast<size_t>(2 * K + 1));
    for (int k = -K; k <= K; ++k) {
        KahanSumC acc;
        for (int j = 0; j < n; ++j) {
            double th = two_pi * j / n;
            acc.add(vals[j] * std::polar(1.0, -k * th));
        }
        out[static_cast<size_t>(k + K)] = acc.value() / static_cast<double>(n);
    }
    return out;
}

// Central finite difference along an exact flow, order h^2.
inline FiberField derive(const FiberField& u, FlowKind which, double h = 1e-4) {
    int K = u.K + (which == FlowKind::rotation ? 0 : 1);
    auto ev = [u, which, h](const PhasePoint& p) {
        return (u.eval(flow(p, h, which)) - u.eval(flow(p, -h, which))) / (2.0 * h);
    };
    return make_field(ev, K);
}

// eta_pm = (X +- i Xperp)/2, shifting fiber mode k to k +- 1
inline FiberField eta(const FiberField& u, int sign, double h = 1e-4) {
    auto ev = [u, sign, h](const PhasePoint& p) {
        complexd xu = (u.eval(flow(p, h, FlowKind::geodesic)) -
                       u.eval(flow(p, -h, FlowKind::geodesic))) /
                      (2.0 * h);
        complexd xpu = (u.eval(flow(p, h, FlowKind::perpendicular)) -
                        u.eval(flow(p, -h, FlowKind::perpendicular))) /
                       (2.0 * h);
        return 0.5 * (xu + complexd(0, sign >= 0 ? 1.0 : -1.0) * xpu);
    };
    return make_field(ev, u.K + 1);
}

// single-mode part u_k as a field on SM: c_k(z) e^{ik theta}
inline FiberField mode_field(const SurfaceGroup& grp, const FiberField& u, int k) {
    auto ev = [&grp, u, k](const PhasePoint& p) {
        PhasePoint q = reduce(grp, p);
        int K = std::max(std::abs(k), u.K);
        auto c = fiber_coeffs(u, q.z, K);
        return c[static_cast<size_t>(k + K)] * std::polar(1.0, k * q.theta);
    };
    return make_field(ev, std::abs(k));
}

// Szego projector: S u = sum_{k >= 1} u_k, idempotent at coefficient level
inline FiberField szego(const SurfaceGroup& grp, const FiberField& u) {
    auto ev = [&grp, u](const PhasePoint& p) {
        PhasePoint q = reduce(grp, p);
        auto c = fiber_coeffs(u, q.z);
        KahanSumC acc;
        for (int k = 1; k <= u.K; ++k)
            acc.add(c[static_cast<size_t>(k + u.K)] * std::polar(1.0, k * q.theta));
        return acc.value();
    };
    return make_field(ev, u.K);
}

// antipodal map A(x,v) = (x,-v) is the half-turn of the fiber
inline PhasePoint antipodal(const PhasePoint& p) { return flow(p, pi, FlowKind::rotation); }

// even/odd split: A* keeps even fiber modes and flips odd ones
inline std::pair<FiberField, FiberField> antipodal_split(const FiberField& u) {
    auto even = make_field(
        [u](const PhasePoint& p) { return 0.5 * (u.eval(p) + u.eval(antipodal(p))); }, u.K);
    auto odd = make_field(
        [u](const PhasePoint& p) { return 0.5 * (u.eval(p) - u.eval(antipodal(p))); }, u.K);
    return {even, odd};
}

// --- smooth test data ------------------------------------------------------

// Compactly supported bump in the hyperbolic distance to z0, support
// d(z, z0) < rho, profile (1 - (d/rho)^2)^10: C^9 across the edge with tame
// derivatives, so orbit quadrature at the default density converges below
// the 1e-8 doubling gate (the classical exp(-1/(1-q)) profile does not).
// Supports are kept inside the octagon's inscribed ball so the extension by
// zero is smooth on the closed surface.
struct Bump {
    complexd center;
    double rho;
    double operator()(complexd z) const {
        double q = sq(dist_disk(z, center) / rho);
        if (q >= 1.0) return 0.0;
        double s = 1.0 - q;
        double s2 = s * s;
        double s4 = s2 * s2;
        return s4 * s4 * s2;
    }
};

inline FiberField bump_field(const SurfaceGroup& grp, complexd center, double rho) {
    Bump b{center, rho};
    return make_chart_field(grp, [b](complexd z, double) { return complexd(b(z), 0.0); }, 0);
}

// bump(z) * e^{ik theta}; smooth on SM because the bump kills the boundary
inline FiberField bump_mode_field(const SurfaceGroup& grp, complexd center, double rho, int k) {
    Bump b{center, rho};
    return make_chart_field(
        grp, [b, k](complexd z, double th) { return b(z) * std::polar(1.0, k * th); },
        std::abs(k));
}

// random single-bump mode field bump(z) cos(k theta + phase): the cheap
// flavor of smooth test data, used where many fields ride one trajectory
inline FiberField random_bump_mode_field(const SurfaceGroup& grp, uint64_t seed, int K) {
    Rng rng(seed);
    double rmax = std::tanh(0.5 * 0.9);
    complexd c = std::polar(rmax * std::sqrt(rng.next_double()), rng.uniform(0.0, two_pi));
    Bump b{c, rng.uniform(0.4, 0.6)};
    int k = static_cast<int>(rng.next_u64() % static_cast<uint64_t>(K + 1));
    double phase = rng.uniform(0.0, two_pi);
    return make_chart_field(
        grp,
        [b, k, phase](complexd z, double th) {
            return complexd(b(z) * std::cos(k * th + phase), 0.0);
        },
        k);
}

// random band-limited smooth field: sum of bumps times fiber modes |k| <= K
inline FiberField random_field(const SurfaceGroup& grp, uint64_t seed, int K, int n_bumps = 6,
                               bool real_valued = false) {
    Rng rng(seed);
    struct Term {
        Bump b;
        complexd amp;
        int k;
    };
    std::vector<Term> terms;
    double rmax = std::tanh(0.5 * 0.9);  // centers within hyperbolic radius 0.9
    for (int j = 0; j < n_bumps; ++j) {
        complexd c = std::polar(rmax * std::sqrt(rng.next_double()), rng.uniform(0.0, two_pi));
        double rho = rng.uniform(0.35, 0.55);
        complexd amp = std::polar(rng.uniform(0.5, 1.0), rng.uniform(0.0, two_pi));
        int k = static_cast<int>(rng.next_u64() % static_cast<uint64_t>(2 * K + 1)) - K;
        terms.push_back({Bump{c, rho}, amp, k});
    }
    auto f = [terms, real_valued](complexd z, double th) {
        KahanSumC acc;
        for (const auto& t : terms) {
            complexd v = t.amp * t.b(z) * std::polar(1.0, t.k * th);
            acc.add(real_valued ? complexd(v.real(), 0.0) : v);
        }
        return acc.value();
    };
    return make_chart_field(grp, f, K);
}

// --- probe sets and norms ---------------------------------------------------

inline std::vector<PhasePoint> probe_set(const SurfaceGroup& grp, int n, uint64_t seed) {
    return sample_liouville(grp, n, seed);
}

inline double c0_norm(const FiberField& u, const std::vector<PhasePoint>& probes) {
    double m = 0.0;
    for (const auto& p : probes) m = std::max(m, std::abs(u.eval(p)));
    return m;
}

inline double c1_norm(const FiberField& u, const std::vector<PhasePoint>& probes,
                      double h = 1e-4) {
    double m = c0_norm(u, probes);
    for (FlowKind w : {FlowKind::geodesic, FlowKind::perpendicular, FlowKind::rotation})
        m = std::max(m, c0_norm(derive(u, w, h), probes));
    return m;
}

inline double c2_norm(const FiberField& u, const std::vector<PhasePoint>& probes,
                      double h = 1e-4) {
    double m = c1_norm(u, probes, h);
    for (FlowKind w1 : {FlowKind::geodesic, FlowKind::perpendicular, FlowKind::rotation})
        for (FlowKind w2 : {FlowKind::geodesic, FlowKind::perpendicular, FlowKind::rotation})
            m = std::max(m, c0_norm(derive(derive(u, w1, h), w2, h), probes));
    return m;
}

// mode coefficients at a spatial probe set, with the probe weights attached
struct ModeCoefficients {
    int k = 0;
    std::vector<complexd> values;
    std::vector<double> weights;
};

inline ModeCoefficients mode_coefficients(const FiberField& u, int k,
                                          const std::vector<complexd>& positions) {
    ModeCoefficients mc;
    mc.k = k;
    int K = std::max(std::abs(k), u.K);
    for (complexd z : positions) {
        auto c = fiber_coeffs(u, z, K);
        mc.values.push_back(c[static_cast<size_t>(k + K)]);
        mc.weights.push_back(1.0 / static_cast<double>(positions.size()));
    }
    return mc;
}

// L^2(mu) fiber mass of u outside a set of modes, relative to the total;
// used for the truncation-honesty and mode-shift invariants
inline double off_mode_mass(const FiberField& u, const std::vector<complexd>& positions,
                            const std::vector<int>& keep, int K) {
    double off = 0.0, tot = 0.0;
    for (complexd z : positions) {
        auto c = fiber_coeffs(u, z, K);
        for (int k = -K; k <= K; ++k) {
            double m2 = std::norm(c[static_cast<size_t>(k + K)]);
            tot += m2;
            bool kept = false;
            for (int kk : keep) kept = kept || (kk == k);
            if (!kept) off += m2;
        }
    }
    // positions that miss the support entirely carry no information
    return tot > 1e-28 ? std::sqrt(off / tot) : 0.0;
}

}  // namespace bolza
