#pragma once

#include "bolzalab/core.hpp"
#include "bolzalab/field.hpp"
#include "bolzalab/group.hpp"

#include <Eigen/Dense>

#include <functional>
#include <map>
#include <vector>

namespace bolza {

/*
    Symmetric m-cotensor calculus on the Bolza surface.

    Components live in the orthonormal coframe e^1 = e^omega dx1,
    e^2 = e^omega dx2 of the conformal metric g = e^{2 omega}|dz|^2, stored on
    the symmetric index set: index j = number of '2' slots, j = 0..m, with the
    binomial multiplicity restored in pairings.  In this frame the embedding
    pi_m^* is plain trigonometric-monomial pairing and lands in fiber modes
    {-m, -m+2, ..., m}.

    The so(2) connection form of the coframe is alpha = w_y dx - w_x dy
    (w = omega), so on components

        grad_c f_j = e_c(f_j) + alpha(e_c) [ (m-j) f_{j+1} - j f_{j-1} ],

    with e_c = e^{-omega} d_c.  D symmetrizes grad, and the divergence is the
    true L^2 adjoint D* = -trace(grad .).
*/

struct SymmetricTensor {
    int m = 0;
    std::vector<std::function<double(complexd)>> comp;  // size m+1

    double component(int j, complexd z) const { return comp[static_cast<size_t>(j)](z); }
};

inline double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
    return r;
}

// pointwise full-index pairing <f, h>(z) = sum_A f_A h_A
inline double tensor_dot(const SymmetricTensor& f, const SymmetricTensor& h, complexd z) {
    double s = 0.0;
    for (int j = 0; j <= f.m; ++j)
        s += binomial(f.m, j) * f.component(j, z) * h.component(j, z);
    return s;
}

inline SymmetricTensor constant_tensor(int m, std::vector<double> vals) {
    SymmetricTensor t;
    t.m = m;
    for (int j = 0; j <= m; ++j)
        t.comp.push_back([v = vals[static_cast<size_t>(j)]](complexd) { return v; });
    return t;
}

inline SymmetricTensor metric_tensor() { return constant_tensor(2, {1.0, 0.0, 1.0}); }

inline SymmetricTensor zero_tensor(int m) {
    SymmetricTensor t;
    t.m = m;
    for (int j = 0; j <= m; ++j) t.comp.push_back([](complexd) { return 0.0; });
    return t;
}

inline SymmetricTensor lincomb(const std::vector<SymmetricTensor>& ts,
                               const std::vector<double>& coeff) {
    SymmetricTensor out;
    out.m = ts.front().m;
    for (int j = 0; j <= out.m; ++j) {
        out.comp.push_back([ts, coeff, j](complexd z) {
            KahanSum s;
            for (size_t b = 0; b < ts.size(); ++b) s.add(coeff[b] * ts[b].component(j, z));
            return s.value();
        });
    }
    return out;
}

// trace: contraction of two slots with the metric (orthonormal frame: plain sum)
inline SymmetricTensor trace(const SymmetricTensor& f) {
    if (f.m < 2) throw DegreeError("trace needs degree >= 2");
    SymmetricTensor t;
    t.m = f.m - 2;
    for (int j = 0; j <= t.m; ++j)
        t.comp.push_back([f, j](complexd z) { return f.component(j, z) + f.component(j + 2, z); });
    return t;
}

namespace detail {

inline double omega_x(complexd z) { return 2.0 * z.real() / (1.0 - std::norm(z)); }
inline double omega_y(complexd z) { return 2.0 * z.imag() / (1.0 - std::norm(z)); }

// grad_c f at symmetric index j of the same degree (c = 1, 2)
inline double covariant_component(const SymmetricTensor& f, int c, int j, complexd z, double hz) {
    double em = (1.0 - std::norm(z)) / 2.0;  // e^{-omega}
    complexd step = (c == 1) ? complexd(hz, 0) : complexd(0, hz);
    double dpart = em * (f.component(j, z + step) - f.component(j, z - step)) / (2.0 * hz);
    double alpha_c = em * ((c == 1) ? omega_y(z) : -omega_x(z));
    double conn = 0.0;
    if (j + 1 <= f.m) conn += (f.m - j) * f.component(j + 1, z);
    if (j - 1 >= 0) conn -= j * f.component(j - 1, z);
    return dpart + alpha_c * conn;
}

}  // namespace detail

// D = S o grad, raising the degree by one
inline SymmetricTensor sym_derivative(const SymmetricTensor& f, double hz = 1e-5) {
    SymmetricTensor d;
    d.m = f.m + 1;
    for (int j = 0; j <= d.m; ++j) {
        d.comp.push_back([f, j, hz, m = f.m](complexd z) {
            double s = 0.0;
            if (j <= m) s += (m + 1 - j) * detail::covariant_component(f, 1, j, z, hz);
            if (j >= 1) s += j * detail::covariant_component(f, 2, j - 1, z, hz);
            return s / (m + 1);
        });
    }
    return d;
}

// divergence D* f = -trace(grad f), lowering the degree by one
inline SymmetricTensor divergence(const SymmetricTensor& f, double hz = 1e-5) {
    if (f.m < 1) throw DegreeError("divergence needs degree >= 1");
    SymmetricTensor d;
    d.m = f.m - 1;
    for (int j = 0; j <= d.m; ++j) {
        d.comp.push_back([f, j, hz](complexd z) {
            return -(detail::covariant_component(f, 1, j, z, hz) +
                     detail::covariant_component(f, 2, j + 1, z, hz));
        });
    }
    return d;
}

// pi_m^*: (x, theta) -> <f(x), v^{tensor m}>, v = (cos theta, sin theta)
inline FiberField pi_star_up(const SurfaceGroup& grp, const SymmetricTensor& f) {
    auto ev = [f](complexd z, double th) {
        double c = std::cos(th), s = std::sin(th);
        double acc = 0.0;
        for (int j = 0; j <= f.m; ++j)
            acc += binomial(f.m, j) * f.component(j, z) * std::pow(c, f.m - j) * std::pow(s, j);
        return complexd(acc, 0.0);
    };
    return make_chart_field(grp, ev, f.m);
}

// pi_m_*: adjoint push-forward for the plain fiber angle measure d theta,
// defined through the trigonometric moments of u; adjointness
// <pi_m_* u, psi> = <u, pi_m^* psi> then holds identically.
inline SymmetricTensor pi_star_down(const FiberField& u, int m) {
    int n = std::max(default_n_theta(u.K + m), 16);
    SymmetricTensor t;
    t.m = m;
    for (int j = 0; j <= m; ++j) {
        t.comp.push_back([u, m, j, n](complexd z) {
            KahanSum acc;
            for (int i = 0; i < n; ++i) {
                double th = two_pi * i / n;
                PhasePoint p{frame_from_disk(z, th), z, th, true};
                double c = std::cos(th), s = std::sin(th);
                acc.add(u.eval(p).real() * std::pow(c, m - j) * std::pow(s, j) * (two_pi / n));
            }
            return acc.value();
        });
    }
    return t;
}

// --- fiber-mode representation ----------------------------------------------

// constant matrix taking the m+1 components to the fiber coefficients of
// pi_m^* (modes -m..m), cached per degree together with its inverse
struct ModeMatrices {
    Eigen::MatrixXcd to_modes;    // (2m+1) x (m+1)
    Eigen::MatrixXcd from_modes;  // (m+1) x (2m+1), pseudo-inverse
};

inline const ModeMatrices& mode_matrices(int m) {
    static std::map<int, ModeMatrices> cache;
    auto it = cache.find(m);
    if (it != cache.end()) return it->second;
    int n = 8 * (m + 1) + 8;
    Eigen::MatrixXcd P(2 * m + 1, m + 1);
    for (int j = 0; j <= m; ++j) {
        for (int k = -m; k <= m; ++k) {
            complexd acc = 0.0;
            for (int i = 0; i < n; ++i) {
                double th = two_pi * i / n;
                double mono = binomial(m, j) * std::pow(std::cos(th), m - j) *
                              std::pow(std::sin(th), j);
                acc += mono * std::polar(1.0, -k * th) / static_cast<double>(n);
            }
            P(k + m, j) = acc;
        }
    }
    ModeMatrices mm;
    mm.to_modes = P;
    mm.from_modes = P.completeOrthogonalDecomposition().pseudoInverse();
    return cache.emplace(m, std::move(mm)).first->second;
}

inline Eigen::VectorXcd tensor_modes(const SymmetricTensor& f, complexd z) {
    Eigen::VectorXd comps(f.m + 1);
    for (int j = 0; j <= f.m; ++j) comps(j) = f.component(j, z);
    return mode_matrices(f.m).to_modes * comps.cast<complexd>();
}

// part of f whose embedding lies in the extreme modes +-m (the trace-free part)
inline SymmetricTensor trace_free_part(const SymmetricTensor& f) {
    SymmetricTensor t;
    t.m = f.m;
    for (int j = 0; j <= f.m; ++j) {
        t.comp.push_back([f, j](complexd z) {
            const auto& mm = mode_matrices(f.m);
            Eigen::VectorXcd modes = tensor_modes(f, z);
            for (int k = -f.m; k <= f.m; ++k)
                if (std::abs(k) != f.m) modes(k + f.m) = 0.0;
            return (mm.from_modes * modes)(j).real();
        });
    }
    return t;
}

// --- quadrature over the surface and projections ------------------------------

// fixed sample cloud on M for L^2-type inner products; deterministic by seed
struct AreaQuadrature {
    std::vector<complexd> pts;

    static AreaQuadrature sampled(const SurfaceGroup& grp, int n, uint64_t seed) {
        AreaQuadrature q;
        LiouvilleSampler s(grp, seed);
        q.pts.reserve(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) q.pts.push_back(s.next_base());
        return q;
    }
};

// area-mean of the pointwise pairing (the overall area factor cancels
// everywhere this is used)
inline double inner(const AreaQuadrature& q, const SymmetricTensor& f, const SymmetricTensor& h) {
    KahanSum s;
    for (complexd z : q.pts) s.add(tensor_dot(f, h, z));
    return s.value() / static_cast<double>(q.pts.size());
}

inline double l2_norm(const AreaQuadrature& q, const SymmetricTensor& f) {
    return std::sqrt(std::max(0.0, inner(q, f, f)));
}

// max of components and their chart first derivatives over the cloud
inline double c1_norm(const AreaQuadrature& q, const SymmetricTensor& f, double hz = 1e-5) {
    double m = 0.0;
    for (complexd z : q.pts) {
        for (int j = 0; j <= f.m; ++j) {
            m = std::max(m, std::abs(f.component(j, z)));
            double em = (1.0 - std::norm(z)) / 2.0;
            m = std::max(m, std::abs(em * (f.component(j, z + complexd(hz, 0)) -
                                           f.component(j, z - complexd(hz, 0))) / (2 * hz)));
            m = std::max(m, std::abs(em * (f.component(j, z + complexd(0, hz)) -
                                           f.component(j, z - complexd(0, hz))) / (2 * hz)));
        }
    }
    return m;
}

// materialized component table over the cloud, used by the projections
inline Eigen::MatrixXd materialize(const AreaQuadrature& q, const SymmetricTensor& f) {
    Eigen::MatrixXd v(static_cast<long>(q.pts.size()), f.m + 1);
    for (size_t i = 0; i < q.pts.size(); ++i)
        for (int j = 0; j <= f.m; ++j) v(static_cast<long>(i), j) = f.component(j, q.pts[i]);
    return v;
}

inline double inner_materialized(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, int m) {
    double s = 0.0;
    for (int j = 0; j <= m; ++j) s += binomial(m, j) * a.col(j).dot(b.col(j));
    return s / static_cast<double>(a.rows());
}

struct SolenoidalProjection {
    SymmetricTensor f_sol;
    std::vector<double> potential_coeff;  // q minimizing |f - D q|^2
    double condition_number = 0.0;
    double regularization = 0.0;
};

// least-squares removal of the potential part: q minimizes |f - D q|_{L^2}
// over the span of D(basis), normal equations with relative Tikhonov eps_reg
inline SolenoidalProjection solenoidal_project(const SymmetricTensor& f,
                                               const std::vector<SymmetricTensor>& basis,
                                               const AreaQuadrature& q,
                                               double eps_rel = 1e-8,
                                               double cond_limit = 1e12) {
    const int B = static_cast<int>(basis.size());
    std::vector<SymmetricTensor> dbasis;
    std::vector<Eigen::MatrixXd> dvals;
    for (const auto& h : basis) {
        dbasis.push_back(sym_derivative(h));
        dvals.push_back(materialize(q, dbasis.back()));
    }
    Eigen::MatrixXd fv = materialize(q, f);
    Eigen::MatrixXd N(B, B);
    Eigen::VectorXd r(B);
    for (int a = 0; a < B; ++a) {
        for (int b = a; b < B; ++b) {
            N(a, b) = N(b, a) = inner_materialized(dvals[static_cast<size_t>(a)],
                                                   dvals[static_cast<size_t>(b)], f.m);
        }
        r(a) = inner_materialized(dvals[static_cast<size_t>(a)], fv, f.m);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(N);
    double lmax = es.eigenvalues().maxCoeff();
    double lmin = es.eigenvalues().minCoeff();
    double cond = lmax / std::max(lmin, 1e-300);
    if (cond > cond_limit)
        throw IllConditioned("solenoidal normal matrix condition " + fmt17(cond));
    double eps = eps_rel * lmax;
    Eigen::VectorXd coeff =
        (N + eps * Eigen::MatrixXd::Identity(B, B)).ldlt().solve(r);

    SolenoidalProjection out;
    out.condition_number = cond;
    out.regularization = eps;
    out.potential_coeff.assign(coeff.data(), coeff.data() + B);
    std::vector<SymmetricTensor> terms{f};
    std::vector<double> cs{1.0};
    for (int b = 0; b < B; ++b) {
        terms.push_back(dbasis[static_cast<size_t>(b)]);
        cs.push_back(-coeff(b));
    }
    out.f_sol = lincomb(terms, cs);
    return out;
}

// --- smooth test tensors ------------------------------------------------------

inline SymmetricTensor random_bump_tensor(int m, uint64_t seed, int bumps_per_comp = 2) {
    Rng rng(seed);
    SymmetricTensor t;
    t.m = m;
    double rmax = std::tanh(0.5 * 0.9);
    for (int j = 0; j <= m; ++j) {
        struct Term {
            Bump b;
            double amp;
        };
        std::vector<Term> terms;
        for (int i = 0; i < bumps_per_comp; ++i) {
            complexd c = std::polar(rmax * std::sqrt(rng.next_double()), rng.uniform(0.0, two_pi));
            terms.push_back({Bump{c, rng.uniform(0.35, 0.55)}, rng.uniform(-1.0, 1.0)});
        }
        t.comp.push_back([terms](complexd z) {
            double s = 0.0;
            for (const auto& tm : terms) s += tm.amp * tm.b(z);
            return s;
        });
    }
    return t;
}

// scalar bump as a degree-0 tensor
inline SymmetricTensor bump_tensor0(complexd center, double rho) {
    SymmetricTensor t;
    t.m = 0;
    t.comp.push_back([b = Bump{center, rho}](complexd z) { return b(z); });
    return t;
}

}  // namespace bolza
