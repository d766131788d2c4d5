#pragma once

#include "bolzalab/census.hpp"
#include "bolzalab/core.hpp"
#include "bolzalab/field.hpp"
#include "bolzalab/measure.hpp"
#include "bolzalab/tensor.hpp"
#include "bolzalab/xray.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <functional>
#include <memory>
#include <string>
#include <thread>
#include <vector>

namespace bolza {

/*
    Monte-Carlo estimators for the resolvents R+-(lambda) and the operator Pi
    realized as damped correlations:

        <R+(l) f, psi> = E_mu[ conj(psi)(y) int_0^T e^{-l t} f(phi_t y) dt ],
        <Pi f, psi>    = lim_{l -> 0+} int_R e^{-l|t|} <f o phi_t, psi> dt,

    the limit taken by Richardson extrapolation over a decreasing lambda
    ladder after the pole is removed by enforcing <f, 1> = 0 (sample means
    subtracted, and recorded).

    The engine is batched twice over: samples are split into independent
    batches with derived seeds (stderr comes from >= 16 batch means, final
    reduction in batch order with compensated summation, so results are
    independent of the thread count), and each trajectory sweep evaluates a
    whole list of integrand fields while the static side is evaluated at the
    start point only.  All pairings of (trajectory list) x (static list) come
    out of one walk, which is what makes the normal-operator matrices
    affordable.
*/

struct PairingEstimate {
    complexd value{0.0, 0.0};
    double std_error = 0.0;
    double lambda = 0.0;
    double T = 0.0;
    long n_samples = 0;
    uint64_t seed = 0;
    double truncation = 0.0;  // e^{-lambda T}/lambda * |f|_inf |psi|_inf, folded into std_error
};

struct EngineOptions {
    std::vector<double> lambda_ladder{0.4, 0.2, 0.1, 0.05};
    double t_max = 240.0;  // T(lambda) = min(t_max, 12/lambda)
    double dt = 0.125;
    long n_samples = 200000;
    int n_batches = 64;
    int threads = 0;  // 0: hardware concurrency
    uint64_t seed = 1;
    bool subtract_means = true;
    // optional support restriction of the static side (exact importance
    // sampling when every static field vanishes outside the disk)
    bool restricted = false;
    complexd restrict_center{0.0, 0.0};
    double restrict_radius = 0.0;

    void validate() const {
        if (n_samples < 1 || n_batches < 16) throw ConfigError("need n >= 1 and >= 16 batches");
        for (size_t i = 1; i < lambda_ladder.size(); ++i)
            if (!(lambda_ladder[i] < lambda_ladder[i - 1]))
                throw ConfigError("lambda ladder must be strictly decreasing");
        if (lambda_ladder.empty() || lambda_ladder.front() <= 0)
            throw ConfigError("lambda ladder must be positive");
    }
};

namespace detail {

inline int engine_threads(int requested) {
    if (requested > 0) return requested;
    unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

// per-lambda even step counts K(lambda) with t = K dt <= min(t_max, 12/lambda)
inline std::vector<long> step_counts(const EngineOptions& opt) {
    std::vector<long> K;
    for (double lam : opt.lambda_ladder) {
        double T = std::min(opt.t_max, 12.0 / lam);
        long k = static_cast<long>(std::llround(T / opt.dt));
        if (k % 2 != 0) ++k;
        K.push_back(std::max<long>(k, 2));
    }
    return K;
}

inline double simpson_coeff(long k, long K) {
    if (k == 0 || k == K) return 1.0;
    return (k % 2 == 1) ? 4.0 : 2.0;
}

}  // namespace detail

// raw per-batch sums of conj(b_j)(y) * damped integrals of a_i, per lambda
struct EngineResult {
    std::vector<double> lambdas;
    std::vector<double> T;
    long batch_size = 0;
    int n_batches = 0;
    double mass = 1.0;  // restriction mass factor
    // [lambda][i][j][batch] flattened
    std::vector<complexd> batch_sums;
    std::vector<complexd> mean_a, mean_b;  // full-measure field means (batch-averaged)
    double sup_a = 0.0, sup_b = 0.0;       // sup over probe samples

    size_t idx(size_t l, size_t i, size_t j, size_t b, size_t I, size_t J, size_t B) const {
        return ((l * I + i) * J + j) * B + b;
    }
};

// mode of the trajectory integral
enum class Damping {
    two_sided,       // int_{-T}^{T} e^{-lambda |t|}: the Pi pairing integrand
    forward,         // R+(lambda)
    backward_minus,  // R-(lambda) = -int_{-infty}^0 e^{lambda t}
};

inline EngineResult run_engine(const SurfaceGroup& grp, const std::vector<FiberField>& a_fields,
                               const std::vector<FiberField>& b_fields, Damping mode,
                               const EngineOptions& opt) {
    opt.validate();
    const size_t I = a_fields.size(), J = b_fields.size(), L = opt.lambda_ladder.size();
    const int B = opt.n_batches;
    EngineResult res;
    res.lambdas = opt.lambda_ladder;
    auto K = detail::step_counts(opt);
    for (size_t l = 0; l < L; ++l) res.T.push_back(static_cast<double>(K[l]) * opt.dt);
    res.batch_size = std::max<long>(1, opt.n_samples / B);
    res.n_batches = B;
    res.batch_sums.assign(L * I * J * static_cast<size_t>(B), complexd(0, 0));

    // field means and sup norms over an unrestricted probe stream (the means
    // must be full-measure even when trajectories sample a restriction)
    {
        const long n_probe = std::max<long>(2000, res.batch_size);
        LiouvilleSampler probe(grp, derive_seed(opt.seed, 0xFEED));
        std::vector<KahanSumC> ma(I), mb(J);
        double sa = 0, sb = 0;
        for (long s = 0; s < n_probe; ++s) {
            PhasePoint y = probe.next();
            for (size_t i = 0; i < I; ++i) {
                complexd v = a_fields[i].eval(y);
                ma[i].add(v);
                sa = std::max(sa, std::abs(v));
            }
            for (size_t j = 0; j < J; ++j) {
                complexd v = b_fields[j].eval(y);
                mb[j].add(v);
                sb = std::max(sb, std::abs(v));
            }
        }
        for (size_t i = 0; i < I; ++i) res.mean_a.push_back(ma[i].value() / double(n_probe));
        for (size_t j = 0; j < J; ++j) res.mean_b.push_back(mb[j].value() / double(n_probe));
        res.sup_a = sa;
        res.sup_b = sb;
    }
    std::vector<complexd> shift_a(I, complexd(0, 0)), shift_b(J, complexd(0, 0));
    if (opt.subtract_means) {
        shift_a = res.mean_a;
        shift_b = res.mean_b;
    }

    double mass = 1.0;
    if (opt.restricted) {
        RestrictedSampler probe(grp, opt.restrict_center, opt.restrict_radius,
                                derive_seed(opt.seed, 0xACE5));
        mass = probe.mass();
    }
    res.mass = mass;

    const long Kmax = *std::max_element(K.begin(), K.end());
    const GroupElement fwd = geodesic_translation(opt.dt);
    const GroupElement bwd = geodesic_translation(-opt.dt);
    const bool do_fwd = (mode != Damping::backward_minus);
    const bool do_bwd = (mode != Damping::forward);
    const double bwd_sign = (mode == Damping::backward_minus) ? -1.0 : 1.0;

    auto run_batch = [&](int b) {
        uint64_t bs = derive_seed(opt.seed, static_cast<uint64_t>(b));
        LiouvilleSampler plain(grp, bs);
        std::unique_ptr<RestrictedSampler> restr;
        if (opt.restricted)
            restr = std::make_unique<RestrictedSampler>(grp, opt.restrict_center,
                                                        opt.restrict_radius, bs,
                                                        /*mass_samples=*/0);
        std::vector<complexd> acc(L * I * J, complexd(0, 0));
        std::vector<complexd> W(L * I), bv(J), av(I);
        // per-lambda exponential recurrences
        std::vector<double> decay(L);
        for (size_t l = 0; l < L; ++l) decay[l] = std::exp(-opt.lambda_ladder[l] * opt.dt);

        for (long s = 0; s < res.batch_size; ++s) {
            PhasePoint y = opt.restricted ? restr->next() : plain.next();
            for (size_t j = 0; j < J; ++j) bv[j] = std::conj(b_fields[j].eval(y) - shift_b[j]);
            std::fill(W.begin(), W.end(), complexd(0, 0));

            for (int dir = 0; dir < 2; ++dir) {
                if (dir == 0 && !do_fwd) continue;
                if (dir == 1 && !do_bwd) continue;
                PhasePoint p = y;
                const GroupElement& step = dir == 0 ? fwd : bwd;
                double sign = dir == 1 ? bwd_sign : 1.0;
                std::vector<double> ew(L, 1.0);
                for (long k = 0; k <= Kmax; ++k) {
                    for (size_t i = 0; i < I; ++i) av[i] = a_fields[i].eval(p) - shift_a[i];
                    for (size_t l = 0; l < L; ++l) {
                        if (k > K[l]) continue;
                        double w = sign * (opt.dt / 3.0) * detail::simpson_coeff(k, K[l]) * ew[l];
                        for (size_t i = 0; i < I; ++i) W[l * I + i] += w * av[i];
                    }
                    if (k == Kmax) break;
                    for (size_t l = 0; l < L; ++l) ew[l] *= decay[l];
                    p = reduce(grp, PhasePoint::from_group(p.g * step));
                }
            }
            for (size_t l = 0; l < L; ++l)
                for (size_t i = 0; i < I; ++i)
                    for (size_t j = 0; j < J; ++j) acc[(l * I + i) * J + j] += W[l * I + i] * bv[j];
        }
        for (size_t l = 0; l < L; ++l)
            for (size_t i = 0; i < I; ++i)
                for (size_t j = 0; j < J; ++j)
                    res.batch_sums[res.idx(l, i, j, static_cast<size_t>(b), I, J,
                                           static_cast<size_t>(B))] =
                        mass * acc[(l * I + i) * J + j];
    };

    int T = std::min(detail::engine_threads(opt.threads), B);
    std::vector<std::thread> pool;
    for (int t = 0; t < T; ++t)
        pool.emplace_back([&, t] {
            for (int b = t; b < B; b += T) run_batch(b);
        });
    for (auto& th : pool) th.join();
    return res;
}

namespace detail {

// batch means -> (value, stderr); reduction in batch order
inline std::pair<complexd, double> batch_stats(const std::vector<complexd>& sums, long batch_size) {
    const size_t B = sums.size();
    KahanSumC tot;
    for (size_t b = 0; b < B; ++b) tot.add(sums[b]);
    complexd mean = tot.value() / (static_cast<double>(B) * static_cast<double>(batch_size));
    KahanSum var;
    for (size_t b = 0; b < B; ++b)
        var.add(std::norm(sums[b] / static_cast<double>(batch_size) - mean));
    double se = std::sqrt(var.value() / (static_cast<double>(B) * (static_cast<double>(B) - 1.0)));
    return {mean, se};
}

}  // namespace detail

// Monte-Carlo mean <u, 1> with batch stderr
inline PairingEstimate field_mean(const SurfaceGroup& grp, const FiberField& u, long n,
                                  uint64_t seed, int n_batches = 64) {
    long batch_size = std::max<long>(1, n / n_batches);
    std::vector<complexd> sums(static_cast<size_t>(n_batches), complexd(0, 0));
    for (int b = 0; b < n_batches; ++b) {
        LiouvilleSampler smp(grp, derive_seed(seed, static_cast<uint64_t>(b)));
        complexd acc = 0;
        for (long s = 0; s < batch_size; ++s) acc += u.eval(smp.next());
        sums[static_cast<size_t>(b)] = acc;
    }
    auto [val, se] = detail::batch_stats(sums, batch_size);
    PairingEstimate est;
    est.value = val;
    est.std_error = se;
    est.n_samples = batch_size * n_batches;
    est.seed = seed;
    return est;
}

// --- mixing correlation -----------------------------------------------------

// C_t(u,v) = E[u(phi_t y) conj(v(y))] - E[u] conj(E[v])
inline PairingEstimate correlation(const SurfaceGroup& grp, const FiberField& u,
                                   const FiberField& v, double t, const EngineOptions& opt_in) {
    EngineOptions opt = opt_in;
    opt.validate();
    const int B = opt.n_batches;
    long batch_size = std::max<long>(1, opt.n_samples / B);
    std::vector<complexd> sums(static_cast<size_t>(B), complexd(0, 0));
    std::vector<complexd> mu(static_cast<size_t>(B)), mv(static_cast<size_t>(B));
    int T = std::min(detail::engine_threads(opt.threads), B);
    std::vector<std::thread> pool;
    for (int th = 0; th < T; ++th)
        pool.emplace_back([&, th] {
            for (int b = th; b < B; b += T) {
                LiouvilleSampler smp(grp, derive_seed(opt.seed, static_cast<uint64_t>(b)));
                complexd acc = 0, au = 0, av = 0;
                for (long s = 0; s < batch_size; ++s) {
                    PhasePoint y = smp.next();
                    complexd uy = u.eval(flow(y, t, FlowKind::geodesic));
                    complexd vy = v.eval(y);
                    acc += uy * std::conj(vy);
                    au += uy;
                    av += vy;
                }
                sums[static_cast<size_t>(b)] = acc;
                mu[static_cast<size_t>(b)] = au;
                mv[static_cast<size_t>(b)] = av;
            }
        });
    for (auto& th : pool) th.join();

    KahanSumC muC, mvC;
    for (int b = 0; b < B; ++b) {
        muC.add(mu[static_cast<size_t>(b)]);
        mvC.add(mv[static_cast<size_t>(b)]);
    }
    double n_tot = static_cast<double>(B) * static_cast<double>(batch_size);
    complexd mean_u = muC.value() / n_tot, mean_v = mvC.value() / n_tot;
    // connected part, batch by batch
    std::vector<complexd> connected(static_cast<size_t>(B));
    for (int b = 0; b < B; ++b)
        connected[static_cast<size_t>(b)] =
            sums[static_cast<size_t>(b)] -
            static_cast<double>(batch_size) * mean_u * std::conj(mean_v);
    auto [val, se] = detail::batch_stats(connected, batch_size);
    PairingEstimate est;
    est.value = val;
    est.std_error = se;
    est.T = t;
    est.n_samples = n_tot;
    est.seed = opt.seed;
    return est;
}

// --- resolvent pairings -------------------------------------------------------

struct PairingMatrix {
    std::vector<std::vector<PairingEstimate>> entries;  // [i][j]
    const PairingEstimate& at(size_t i, size_t j) const { return entries[i][j]; }
};

// <R_sign(lambda) a_i, b_j> for every pair, one matrix per ladder rung
inline std::vector<PairingMatrix> resolvent_matrix(const SurfaceGroup& grp,
                                                   const std::vector<FiberField>& a_fields,
                                                   const std::vector<FiberField>& b_fields,
                                                   int sign, const EngineOptions& opt) {
    EngineResult r = run_engine(grp, a_fields, b_fields,
                                sign >= 0 ? Damping::forward : Damping::backward_minus, opt);
    const size_t I = a_fields.size(), J = b_fields.size(), L = r.lambdas.size();
    const size_t B = static_cast<size_t>(r.n_batches);
    std::vector<PairingMatrix> out(L);
    for (size_t l = 0; l < L; ++l) {
        out[l].entries.assign(I, std::vector<PairingEstimate>(J));
        for (size_t i = 0; i < I; ++i)
            for (size_t j = 0; j < J; ++j) {
                std::vector<complexd> sums(B);
                for (size_t b = 0; b < B; ++b) sums[b] = r.batch_sums[r.idx(l, i, j, b, I, J, B)];
                auto [val, se] = detail::batch_stats(sums, r.batch_size);
                PairingEstimate& e = out[l].entries[i][j];
                e.value = val;
                e.lambda = r.lambdas[l];
                e.T = r.T[l];
                e.n_samples = r.batch_size * r.n_batches;
                e.seed = opt.seed;
                e.truncation = std::exp(-e.lambda * e.T) / e.lambda * r.sup_a * r.sup_b;
                e.std_error = std::hypot(se, e.truncation);
            }
    }
    return out;
}

inline PairingEstimate resolvent_pairing(const SurfaceGroup& grp, const FiberField& f,
                                         const FiberField& psi, double lambda, int sign,
                                         const EngineOptions& opt_in,
                                         double variance_budget_frac = 0.0) {
    if (lambda <= 0) throw ConfigError("resolvent needs lambda > 0");
    EngineOptions opt = opt_in;
    opt.lambda_ladder = {lambda};
    opt.subtract_means = false;
    auto est = resolvent_matrix(grp, {f}, {psi}, sign, opt)[0].at(0, 0);
    if (variance_budget_frac > 0 && std::abs(est.value) > 0 &&
        est.std_error > variance_budget_frac * std::abs(est.value))
        throw VarianceBudget("resolvent stderr " + fmt17(est.std_error) + " vs value " +
                             fmt17(std::abs(est.value)));
    return est;
}

// --- the Pi pairing -----------------------------------------------------------

struct PiPairingResult {
    PairingEstimate extrapolated;                 // Richardson limit at lambda -> 0
    std::vector<PairingMatrix> ladder;            // one per lambda (index aligns ladder)
    std::vector<double> lambdas;
    complexd mean_a{0, 0}, mean_b{0, 0};          // subtracted means (recorded)
};

struct PiMatrixResult {
    std::vector<std::vector<PairingEstimate>> value;  // [i][j] extrapolated
    std::vector<PairingMatrix> ladder;
    std::vector<double> lambdas;
    std::vector<complexd> mean_a, mean_b;
    long n_samples = 0;
};

// <Pi a_i, b_j> for every pair: two-sided damped integrals over the ladder,
// order-1 Richardson extrapolation in lambda, ladder spread folded into the
// stderr.  Throws ExtrapolationUnstable when the ladder is non-monotone
// beyond 3x combined error bars.
inline PiMatrixResult pi_matrix(const SurfaceGroup& grp, const std::vector<FiberField>& a_fields,
                                const std::vector<FiberField>& b_fields, const EngineOptions& opt,
                                bool check_monotone = true) {
    if (opt.lambda_ladder.size() < 2) throw ConfigError("pi_matrix needs a ladder of >= 2 lambdas");
    EngineResult r = run_engine(grp, a_fields, b_fields, Damping::two_sided, opt);
    const size_t I = a_fields.size(), J = b_fields.size(), L = r.lambdas.size();
    const size_t B = static_cast<size_t>(r.n_batches);

    PiMatrixResult out;
    out.lambdas = r.lambdas;
    out.mean_a = r.mean_a;
    out.mean_b = r.mean_b;
    out.n_samples = r.batch_size * r.n_batches;
    out.ladder.assign(L, PairingMatrix{});
    for (size_t l = 0; l < L; ++l)
        out.ladder[l].entries.assign(I, std::vector<PairingEstimate>(J));
    out.value.assign(I, std::vector<PairingEstimate>(J));

    for (size_t i = 0; i < I; ++i) {
        for (size_t j = 0; j < J; ++j) {
            std::vector<complexd> lad_val(L);
            std::vector<double> lad_se(L);
            for (size_t l = 0; l < L; ++l) {
                std::vector<complexd> sums(B);
                for (size_t b = 0; b < B; ++b) sums[b] = r.batch_sums[r.idx(l, i, j, b, I, J, B)];
                auto [val, se] = detail::batch_stats(sums, r.batch_size);
                lad_val[l] = val;
                lad_se[l] = se;
                PairingEstimate& e = out.ladder[l].entries[i][j];
                e.value = val;
                e.std_error = se;
                e.lambda = r.lambdas[l];
                e.T = r.T[l];
                e.n_samples = out.n_samples;
                e.seed = opt.seed;
            }
            // per-batch Richardson on the last ladder pair gives the stderr
            size_t lk = L - 1, lp = L - 2;
            double h = r.lambdas[lk] / (r.lambdas[lp] - r.lambdas[lk]);
            std::vector<complexd> rich(B);
            for (size_t b = 0; b < B; ++b) {
                complexd fk = r.batch_sums[r.idx(lk, i, j, b, I, J, B)];
                complexd fp = r.batch_sums[r.idx(lp, i, j, b, I, J, B)];
                rich[b] = fk + h * (fk - fp);
            }
            auto [val, se] = detail::batch_stats(rich, r.batch_size);
            // ladder spread of the Richardson pairs (systematic part)
            double spread = 0.0;
            for (size_t l = 1; l < L; ++l) {
                double hh = r.lambdas[l] / (r.lambdas[l - 1] - r.lambdas[l]);
                complexd rl = lad_val[l] + hh * (lad_val[l] - lad_val[l - 1]);
                spread = std::max(spread, std::abs(rl - val));
            }
            PairingEstimate& e = out.value[i][j];
            e.value = val;
            e.std_error = std::hypot(se, spread);
            e.lambda = 0.0;
            e.T = r.T.back();
            e.n_samples = out.n_samples;
            e.seed = opt.seed;

            if (check_monotone && L >= 3) {
                // differences along the ladder should keep one sign within bars
                for (size_t l = 2; l < L; ++l) {
                    complexd d1 = lad_val[l - 1] - lad_val[l - 2];
                    complexd d2 = lad_val[l] - lad_val[l - 1];
                    double bar = 3.0 * (lad_se[l] + 2.0 * lad_se[l - 1] + lad_se[l - 2]);
                    if (d1.real() * d2.real() < 0 &&
                        std::min(std::abs(d1.real()), std::abs(d2.real())) > bar)
                        throw ExtrapolationUnstable("ladder reversal at lambda " +
                                                    fmt17(r.lambdas[l]));
                }
            }
        }
    }
    return out;
}

// single-pair convenience wrapper; f must be (and is made) mean-zero
inline PiPairingResult pi_pairing(const SurfaceGroup& grp, const FiberField& f,
                                  const FiberField& psi, const EngineOptions& opt) {
    PiMatrixResult m = pi_matrix(grp, {f}, {psi}, opt);
    PiPairingResult out;
    out.extrapolated = m.value[0][0];
    out.ladder = std::move(m.ladder);
    out.lambdas = m.lambdas;
    out.mean_a = m.mean_a[0];
    out.mean_b = m.mean_b[0];
    return out;
}

// weak form of X Pi f = 0: pairs Pi f against X psi
inline PairingEstimate x_invariance_check(const SurfaceGroup& grp, const FiberField& f,
                                          const FiberField& psi, const EngineOptions& opt) {
    return pi_pairing(grp, f, derive(psi, FlowKind::geodesic), opt).extrapolated;
}

}  // namespace bolza
