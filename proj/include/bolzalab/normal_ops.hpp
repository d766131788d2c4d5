#pragma once

#include "bolzalab/estimator.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace bolza {

/*
    The normal operators Pi_0 = pi_0* Pi pi_0^* and Pi_m = pi_m* Pi pi_m^*,
    probed through Gram matrices G[i,j] = <Pi pi_m^* psi_j, pi_m^* psi_i> over
    bump bases on M, plus the derived desk experiments: the order(-1) symbol
    probe, the prescribed push-forward solver and the Livsic consistency
    report.
*/

struct NormalOperatorMatrix {
    int m = 0;
    std::vector<std::string> labels;
    std::vector<std::vector<PairingEstimate>> raw;  // [i][j], extrapolated Pi pairings
    Eigen::MatrixXd symmetrized;                    // real part, (G + G^T)/2
    double noise_floor = 0.0;                       // max stderr over entries
    double min_eigenvalue = 0.0;                    // of the symmetrized copy
    double max_sym_violation_sigma = 0.0;           // |G_ij - G_ji| in combined sigmas

    int size() const { return static_cast<int>(raw.size()); }
};

inline NormalOperatorMatrix normal_matrix(const SurfaceGroup& grp,
                                          const std::vector<SymmetricTensor>& basis,
                                          const std::vector<std::string>& labels,
                                          const EngineOptions& opt) {
    std::vector<FiberField> lifts;
    for (const auto& f : basis) lifts.push_back(pi_star_up(grp, f));
    PiMatrixResult pm = pi_matrix(grp, lifts, lifts, opt);

    NormalOperatorMatrix G;
    G.m = basis.empty() ? 0 : basis.front().m;
    G.labels = labels;
    G.raw = pm.value;
    const int B = static_cast<int>(basis.size());
    G.symmetrized.resize(B, B);
    for (int i = 0; i < B; ++i) {
        for (int j = 0; j < B; ++j) {
            const auto& eij = pm.value[static_cast<size_t>(i)][static_cast<size_t>(j)];
            const auto& eji = pm.value[static_cast<size_t>(j)][static_cast<size_t>(i)];
            G.symmetrized(i, j) = 0.5 * (eij.value.real() + eji.value.real());
            G.noise_floor = std::max(G.noise_floor, eij.std_error);
            double comb = eij.std_error + eji.std_error;
            if (comb > 0)
                G.max_sym_violation_sigma = std::max(
                    G.max_sym_violation_sigma, std::abs(eij.value - eji.value) / comb);
        }
    }
    if (B > 0) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G.symmetrized);
        G.min_eigenvalue = es.eigenvalues().minCoeff();
    }
    return G;
}

// --- symbol-order probe --------------------------------------------------------

struct SymbolReport {
    std::vector<double> xi;
    std::vector<PairingEstimate> pairing;  // <Pi_0 u_xi, u_xi>
    double slope = 0.0;                    // log-log fit; order -1 means -1
    double intercept = 0.0;
    double slope_std_error = 0.0;
    double bump_radius = 0.0;
    complexd center;
};

// localized oscillatory probe window(x) cos(xi . n(x)) in exponential normal
// coordinates n at `center`; |xi|_g at the center equals the Euclidean |xi|.
// The window is flat-topped, (1 - (d/rho)^4)^8, so the probe keeps several
// oscillations inside its effective support and the lowest frequency stays
// within the symbol regime.
inline FiberField oscillatory_probe(const SurfaceGroup& grp, complexd center, double rho,
                                    double xi) {
    auto f = [center, rho, xi](complexd z, double) {
        double d = dist_disk(z, center);
        double q = sq(d / rho);
        if (q >= 1.0) return complexd(0.0, 0.0);
        double s = 1.0 - q * q;
        double s2 = s * s;
        double s4 = s2 * s2;
        double amp = s4 * s4;
        // normal coordinate along x1 through the center
        complexd w = (z - center) / (1.0 - std::conj(center) * z);
        double n1 = d * (std::abs(w) > 0 ? w.real() / std::abs(w) : 0.0);
        return complexd(amp * std::cos(xi * n1), 0.0);
    };
    return make_chart_field(grp, f, 0);
}

inline SymbolReport symbol_probe(const SurfaceGroup& grp, complexd center,
                                 const std::vector<double>& xi_mags, double rho,
                                 const EngineOptions& opt_in) {
    EngineOptions opt = opt_in;
    // every probe vanishes outside the bump disk, so restrict the static side
    opt.restricted = true;
    opt.restrict_center = center;
    opt.restrict_radius = rho * 1.02;

    std::vector<FiberField> probes;
    for (double xi : xi_mags) probes.push_back(oscillatory_probe(grp, center, rho, xi));
    PiMatrixResult pm = pi_matrix(grp, probes, probes, opt, /*check_monotone=*/false);

    SymbolReport rep;
    rep.xi = xi_mags;
    rep.bump_radius = rho;
    rep.center = center;
    for (size_t i = 0; i < xi_mags.size(); ++i) {
        const auto& e = pm.value[i][i];
        if (std::abs(e.value.real()) < 3.0 * e.std_error)
            throw VarianceBudget("symbol pairing at |xi| = " + fmt17(xi_mags[i]) +
                                 " drowned in noise");
        rep.pairing.push_back(e);
    }
    // weighted log-log least squares for slope and intercept
    const size_t n = xi_mags.size();
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::vector<double> ly_sigma(n);
    for (size_t i = 0; i < n; ++i) {
        double y = std::abs(rep.pairing[i].value.real());
        double x = std::log(xi_mags[i]);
        double sig = rep.pairing[i].std_error / y;  // d log(y)
        ly_sigma[i] = sig;
        double w = 1.0 / (sig * sig);
        sw += w;
        sx += w * x;
        sy += w * std::log(y);
        sxx += w * x * x;
        sxy += w * x * std::log(y);
    }
    double det = sw * sxx - sx * sx;
    rep.slope = (sw * sxy - sx * sy) / det;
    rep.intercept = (sxx * sy - sx * sxy) / det;
    rep.slope_std_error = std::sqrt(sw / det);
    return rep;
}

// --- prescribed push-forward ---------------------------------------------------

struct PushforwardReport {
    std::vector<double> coeff;            // c with (G_sym + eps) c = beta
    Eigen::MatrixXd gram;                 // symmetrized <Pi pi_0^* psi_j, pi_0^* psi_i>
    Eigen::MatrixXd gram_stderr;
    double condition_number = 0.0;
    double regularization = 0.0;
    // held-out validation of pi_0* w = f through <w, pi_0^* psi'> vs <f, psi'>
    std::vector<std::string> heldout_labels;
    std::vector<double> predicted, expected;
    double rel_error = 0.0;  // aggregate l2
    // invariance residuals <w, X psi'> in sigmas
    std::vector<double> invariance_value, invariance_sigma;
    double max_invariance_sigmas = 0.0;
    std::vector<complexd> subtracted_means;
};

// Solves G c = [<f, psi_i>] for w = Pi pi_0^*(sum c_j psi_j) and validates
// the push-forward and the invariance on held-out test functions.
inline PushforwardReport prescribed_pushforward(const SurfaceGroup& grp, const SymmetricTensor& f,
                                                const std::vector<SymmetricTensor>& basis,
                                                const std::vector<SymmetricTensor>& heldout,
                                                const std::vector<std::string>& heldout_labels,
                                                const EngineOptions& opt,
                                                double cond_limit = 1e12) {
    if (f.m != 0) throw DegreeError("prescribed_pushforward expects a degree-0 tensor");
    const size_t B = basis.size(), H = heldout.size();

    // one engine run: trajectories over the basis lifts, statics over
    // basis + held-out lifts + X(held-out lifts)
    std::vector<FiberField> a_fields, b_fields;
    for (const auto& p : basis) a_fields.push_back(pi_star_up(grp, p));
    b_fields = a_fields;
    for (const auto& p : heldout) b_fields.push_back(pi_star_up(grp, p));
    for (const auto& p : heldout)
        b_fields.push_back(derive(pi_star_up(grp, p), FlowKind::geodesic));
    PiMatrixResult pm = pi_matrix(grp, a_fields, b_fields, opt);

    PushforwardReport rep;
    rep.heldout_labels = heldout_labels;
    rep.subtracted_means = pm.mean_a;

    Eigen::MatrixXd G(B, B), Gs(B, B);
    for (size_t i = 0; i < B; ++i)
        for (size_t j = 0; j < B; ++j) {
            G(static_cast<long>(i), static_cast<long>(j)) =
                0.5 * (pm.value[i][j].value.real() + pm.value[j][i].value.real());
            Gs(static_cast<long>(i), static_cast<long>(j)) =
                0.5 * (pm.value[i][j].std_error + pm.value[j][i].std_error);
        }
    rep.gram = G;
    rep.gram_stderr = Gs;

    // area pairings beta_i = <pi_0^* f, pi_0^* psi_i>_mu over the same measure
    AreaQuadrature aq = AreaQuadrature::sampled(grp, 200000, derive_seed(opt.seed, 0xBEA7));
    Eigen::VectorXd beta(B);
    for (size_t i = 0; i < B; ++i) beta(static_cast<long>(i)) = inner(aq, f, basis[i]);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
    double lmax = es.eigenvalues().cwiseAbs().maxCoeff();
    double lmin = es.eigenvalues().cwiseAbs().minCoeff();
    rep.condition_number = lmax / std::max(lmin, 1e-300);
    if (rep.condition_number > cond_limit)
        throw IllConditioned("pushforward Gram condition " + fmt17(rep.condition_number));
    rep.regularization = 1e-8 * lmax;
    Eigen::MatrixXd Greg =
        G + rep.regularization * Eigen::MatrixXd::Identity(static_cast<long>(B),
                                                           static_cast<long>(B));
    Eigen::VectorXd c = Greg.ldlt().solve(beta);
    rep.coeff.assign(c.data(), c.data() + B);

    // held-out push-forward: <w, pi_0^* psi'> = sum_j c_j <Pi pi_0^* psi_j, pi_0^* psi'>
    double num = 0, den = 0;
    for (size_t h = 0; h < H; ++h) {
        double pred = 0;
        for (size_t j = 0; j < B; ++j) pred += rep.coeff[j] * pm.value[j][B + h].value.real();
        double expct = inner(aq, f, heldout[h]);
        rep.predicted.push_back(pred);
        rep.expected.push_back(expct);
        num += sq(pred - expct);
        den += sq(expct);
    }
    rep.rel_error = den > 0 ? std::sqrt(num / den) : 0.0;

    // invariance <w, X psi'> should vanish within noise
    for (size_t h = 0; h < H; ++h) {
        double val = 0, var = 0;
        for (size_t j = 0; j < B; ++j) {
            const auto& e = pm.value[j][B + H + h];
            val += rep.coeff[j] * e.value.real();
            var += sq(rep.coeff[j] * e.std_error);
        }
        double sig = std::sqrt(var);
        rep.invariance_value.push_back(val);
        rep.invariance_sigma.push_back(sig);
        if (sig > 0)
            rep.max_invariance_sigmas = std::max(rep.max_invariance_sigmas, std::abs(val) / sig);
    }
    return rep;
}

// --- Livsic consistency ---------------------------------------------------------

struct LivsicReport {
    std::vector<double> orbit_integrals;       // one per census class
    std::vector<double> orbit_lengths;
    double max_orbit_residual_scaled = 0.0;    // max |I| / (l * scale)
    std::vector<PairingEstimate> pi_pairings;  // against the probe set
    double max_pi_sigmas = 0.0;
    double u_fit_residual = 0.0;               // |X u - f| / |f| over fit samples
    std::vector<double> u_coeff;
    double recovered_rel_error = -1.0;         // vs reference coefficients if given
};

// Three-way coboundary diagnosis: closed-orbit integrals, Pi pairings,
// least-squares solve of X u = f over a truncated field basis.
inline LivsicReport livsic_check(const SurfaceGroup& grp, const FiberField& f,
                                 const std::vector<GeodesicRecord>& census,
                                 const std::vector<FiberField>& probe_fields,
                                 const std::vector<FiberField>& fit_basis,
                                 const EngineOptions& opt, double norm_scale = 1.0,
                                 const std::vector<double>* reference_coeff = nullptr,
                                 long n_fit = 4000, int pts_per_unit = 64) {
    LivsicReport rep;
    for (const auto& rec : census) {
        double I = orbit_integral(grp, f, rec, pts_per_unit);
        rep.orbit_integrals.push_back(I);
        rep.orbit_lengths.push_back(rec.length);
        rep.max_orbit_residual_scaled =
            std::max(rep.max_orbit_residual_scaled,
                     std::abs(I) / (rec.length * std::max(norm_scale, 1e-300)));
    }

    if (!probe_fields.empty()) {
        PiMatrixResult pm = pi_matrix(grp, {f}, probe_fields, opt);
        for (size_t j = 0; j < probe_fields.size(); ++j) {
            rep.pi_pairings.push_back(pm.value[0][j]);
            const auto& e = pm.value[0][j];
            if (e.std_error > 0)
                rep.max_pi_sigmas = std::max(rep.max_pi_sigmas, std::abs(e.value) / e.std_error);
        }
    }

    if (!fit_basis.empty()) {
        // least squares X u = f over Liouville samples
        std::vector<PhasePoint> pts = sample_liouville(grp, static_cast<int>(n_fit),
                                                       derive_seed(opt.seed, 0xF17));
        const long n = static_cast<long>(pts.size());
        const long Bn = static_cast<long>(fit_basis.size());
        std::vector<FiberField> xbasis;
        for (const auto& u : fit_basis) xbasis.push_back(derive(u, FlowKind::geodesic));
        Eigen::MatrixXd A(n, Bn);
        Eigen::VectorXd rhs(n);
        for (long k = 0; k < n; ++k) {
            rhs(k) = f.eval(pts[static_cast<size_t>(k)]).real();
            for (long b = 0; b < Bn; ++b)
                A(k, b) = xbasis[static_cast<size_t>(b)].eval(pts[static_cast<size_t>(k)]).real();
        }
        Eigen::MatrixXd N = A.transpose() * A;
        double lmax = N.diagonal().maxCoeff();
        Eigen::VectorXd c =
            (N + 1e-10 * lmax * Eigen::MatrixXd::Identity(Bn, Bn)).ldlt().solve(A.transpose() *
                                                                                rhs);
        rep.u_coeff.assign(c.data(), c.data() + Bn);
        double res = (A * c - rhs).norm();
        double scale = rhs.norm();
        rep.u_fit_residual = scale > 0 ? res / scale : 0.0;
        if (reference_coeff && reference_coeff->size() == static_cast<size_t>(Bn)) {
            double dn = 0, rn = 0;
            for (long b = 0; b < Bn; ++b) {
                dn += sq(c(b) - (*reference_coeff)[static_cast<size_t>(b)]);
                rn += sq((*reference_coeff)[static_cast<size_t>(b)]);
            }
            rep.recovered_rel_error = rn > 0 ? std::sqrt(dn / rn) : 0.0;
        }
    }
    return rep;
}

}  // namespace bolza
