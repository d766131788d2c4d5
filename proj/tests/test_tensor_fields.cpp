#include <doctest.h>

#include "bolzalab/experiments.hpp"
#include "bolzalab/tensor.hpp"

#include <algorithm>

using namespace bolza;

TEST_CASE("trace") {
    SurfaceGroup grp = build_bolza();
    SymmetricTensor g = metric_tensor();

    SUBCASE("trace of the metric is the dimension") {
        SymmetricTensor t = trace(g);
        CHECK(t.component(0, complexd(0.1, 0.2)) == doctest::Approx(2.0));
    }

    SUBCASE("trace of e1 x e1") {
        SymmetricTensor f = constant_tensor(2, {1.0, 0.0, 0.0});
        CHECK(trace(f).component(0, complexd(0.3, -0.1)) == doctest::Approx(1.0));
    }

    SUBCASE("trace annihilates the trace-free part") {
        SymmetricTensor f = random_bump_tensor(2, 71);
        SymmetricTensor tf = trace_free_part(f);
        SymmetricTensor t = trace(tf);
        for (complexd z : {complexd(0.1, 0.2), complexd(-0.25, 0.05), complexd(0.0, -0.3)})
            CHECK(std::abs(t.component(0, z)) < 1e-10);
    }

    SUBCASE("degree errors") {
        CHECK_THROWS_AS(trace(random_bump_tensor(1, 72)), DegreeError);
        CHECK_THROWS_AS(divergence(random_bump_tensor(0, 73)), DegreeError);
    }
}

TEST_CASE("symmetrized derivative and divergence") {
    SurfaceGroup grp = build_bolza();
    AreaQuadrature q = AreaQuadrature::sampled(grp, 2000, 81);

    SUBCASE("D of a constant function vanishes") {
        SymmetricTensor c = constant_tensor(0, {0.7});
        SymmetricTensor d = sym_derivative(c);
        for (int i = 0; i < 50; ++i)
            for (int j = 0; j <= 1; ++j)
                CHECK(std::abs(d.component(j, q.pts[static_cast<size_t>(i)])) < 1e-8);
    }

    SUBCASE("the metric is parallel") {
        SymmetricTensor g = metric_tensor();
        SymmetricTensor dg = sym_derivative(g);
        SymmetricTensor dsg = divergence(g);
        for (int i = 0; i < 50; ++i) {
            complexd z = q.pts[static_cast<size_t>(i)];
            for (int j = 0; j <= 3; ++j) CHECK(std::abs(dg.component(j, z)) < 1e-6);
            for (int j = 0; j <= 1; ++j) CHECK(std::abs(dsg.component(j, z)) < 1e-6);
        }
    }

    SUBCASE("dual route: divergence against the fiber-calculus oracle") {
        // for a 1-tensor h, the mode-0 part of X pi_1^* h is -(1/2) D* h,
        // so the oracle is D*h = -2 c_0(X pi_1^* h)
        SymmetricTensor f = bump_tensor0(complexd(0.15, -0.1), 0.5);
        SymmetricTensor h = sym_derivative(f);
        SymmetricTensor lhs = divergence(h);  // coordinate route
        FiberField xlift = derive(pi_star_up(grp, h), FlowKind::geodesic);
        for (int i = 0; i < 10; ++i) {
            complexd z = q.pts[static_cast<size_t>(i)];
            auto c = fiber_coeffs(xlift, z, 2);
            double oracle = -2.0 * c[2].real();
            CHECK(std::abs(lhs.component(0, z) - oracle) < 1e-5);
        }
    }

    SUBCASE("adjointness of D and D* within Monte-Carlo error") {
        RunConfig cfg;
        cfg.seed = 2;
        TensorReport rep = experiment_tensor(grp, cfg);
        CHECK(rep.adjoint_sigmas <= 3.0);
        CHECK(rep.splitting_residual < 1e-4);
        CHECK(rep.exact_lift_residual < 1e-4);
    }
}

TEST_CASE("pi_m^* embedding") {
    SurfaceGroup grp = build_bolza();

    SUBCASE("m = 0 lifts are theta independent") {
        SymmetricTensor f = bump_tensor0(complexd(0.2, 0.0), 0.5);
        FiberField lift = pi_star_up(grp, f);
        complexd z(0.18, 0.04);
        for (double th : {0.0, 1.0, 4.0})
            CHECK(std::abs(lift.eval(PhasePoint{frame_from_disk(z, th), z, th, true}) -
                           f.component(0, z)) < 1e-14);
    }

    SUBCASE("pi_2^* of the metric is 1") {
        FiberField lift = pi_star_up(grp, metric_tensor());
        complexd z(0.1, -0.22);
        for (double th : {0.3, 2.0, 5.5})
            CHECK(std::abs(lift.eval(PhasePoint{frame_from_disk(z, th), z, th, true}) - 1.0) <
                  1e-14);
    }

    SUBCASE("pi_1^* of the first coframe element is cos theta") {
        SymmetricTensor f = constant_tensor(1, {1.0, 0.0});
        FiberField lift = pi_star_up(grp, f);
        complexd z(0.0, 0.15);
        for (double th : {0.2, 1.9, 3.7})
            CHECK(std::abs(lift.eval(PhasePoint{frame_from_disk(z, th), z, th, true}) -
                           std::cos(th)) < 1e-14);
    }

    SUBCASE("fiber support law: modes -m..m of parity m") {
        AreaQuadrature scan = AreaQuadrature::sampled(grp, 200, 83);
        for (int m = 1; m <= 3; ++m) {
            SymmetricTensor f = random_bump_tensor(m, 84 + static_cast<uint64_t>(m));
            auto pos = active_positions(f, scan.pts, 5);
            // sanity: the probes actually see the tensor
            double act = 0;
            for (int j = 0; j <= m; ++j) act += std::abs(f.component(j, pos[0]));
            REQUIRE(act > 1e-3);
            FiberField lift = pi_star_up(grp, f);
            std::vector<int> keep;
            for (int k = -m; k <= m; k += 2) keep.push_back(k);
            CHECK(off_mode_mass(lift, pos, keep, m + 3) < 1e-6);
        }
    }
}

TEST_CASE("pi_m_* push-forward") {
    SurfaceGroup grp = build_bolza();

    SUBCASE("pi_0_* pi_0^* is 2 pi") {
        SymmetricTensor f = bump_tensor0(complexd(0.12, 0.07), 0.5);
        SymmetricTensor back = pi_star_down(pi_star_up(grp, f), 0);
        for (complexd z : {complexd(0.1, 0.1), complexd(0.2, 0.0)})
            CHECK(back.component(0, z) ==
                  doctest::Approx(two_pi * f.component(0, z)).epsilon(1e-10));
    }

    SUBCASE("c_m is a single positive constant per degree (brute-force oracle)") {
        AreaQuadrature scan = AreaQuadrature::sampled(grp, 300, 85);
        for (int m = 1; m <= 3; ++m) {
            SymmetricTensor q = trace_free_part(random_bump_tensor(m, 86 + static_cast<uint64_t>(m)));
            FiberField lift = pi_star_up(grp, q);
            SymmetricTensor back = pi_star_down(lift, m);
            // probe where the tensor actually lives
            std::vector<complexd> pos = scan.pts;
            std::sort(pos.begin(), pos.end(), [&](complexd a, complexd b) {
                auto act = [&](complexd z) {
                    double s = 0;
                    for (int j = 0; j <= m; ++j) s += std::abs(q.component(j, z));
                    return s;
                };
                return act(a) > act(b);
            });
            pos.resize(2);
            // independent fiber quadrature oracle for c_m at finer resolution
            double c_oracle = 0.0;
            {
                complexd z = pos[0];
                const int n = 512;
                double num = 0, den = 0;
                for (int j = 0; j <= m; ++j) {
                    double mom = 0;
                    for (int i = 0; i < n; ++i) {
                        double th = two_pi * i / n;
                        double lv =
                            lift.eval(PhasePoint{frame_from_disk(z, th), z, th, true}).real();
                        mom += lv * std::pow(std::cos(th), m - j) * std::pow(std::sin(th), j) *
                               (two_pi / n);
                    }
                    num += mom * q.component(j, z);
                    den += q.component(j, z) * q.component(j, z);
                }
                c_oracle = num / den;
            }
            // the measured constant is position and component independent
            double cm = 0;
            int cnt = 0;
            for (complexd z : pos) {
                double scale = 0;
                for (int j = 0; j <= m; ++j) scale = std::max(scale, std::abs(q.component(j, z)));
                for (int j = 0; j <= m; ++j) {
                    double fj = q.component(j, z);
                    if (std::abs(fj) < 0.3 * scale) continue;
                    double ratio = back.component(j, z) / fj;
                    cm += ratio;
                    ++cnt;
                    CHECK(std::abs(ratio - c_oracle) < 1e-6 * std::max(1.0, std::abs(c_oracle)));
                }
            }
            REQUIRE(cnt > 0);
            cm /= cnt;
            CHECK(cm > 0.0);
            CHECK(cm == doctest::Approx(two_pi / std::pow(2.0, m)).epsilon(1e-8));
        }
    }

    SUBCASE("adjointness of the pair on band-limited fields") {
        SymmetricTensor psi = random_bump_tensor(2, 89);
        FiberField u = random_field(grp, 90, 2);
        SymmetricTensor pd = pi_star_down(u, 2);
        FiberField pu = pi_star_up(grp, psi);
        // pointwise in x: <pi_m_* u, psi>(x) = int u (pi_m^* psi) dtheta
        for (complexd z : {complexd(0.05, 0.21), complexd(-0.17, -0.02)}) {
            double lhs = tensor_dot(pd, psi, z);
            const int n = 64;
            double rhs = 0;
            for (int i = 0; i < n; ++i) {
                double th = two_pi * i / n;
                PhasePoint p{frame_from_disk(z, th), z, th, true};
                rhs += (u.eval(p) * pu.eval(p)).real() * (two_pi / n);
            }
            CHECK(std::abs(lhs - rhs) < 1e-8 * std::max(1.0, std::abs(rhs)));
        }
    }
}

TEST_CASE("solenoidal projection") {
    SurfaceGroup grp = build_bolza();
    AreaQuadrature q = AreaQuadrature::sampled(grp, 8000, 91);
    auto pots = bump_tensor_basis(0, 6, 92);

    SUBCASE("exact kernel direction: f = D h for h in the basis span") {
        SymmetricTensor f = sym_derivative(pots[2]);
        auto proj = solenoidal_project(f, pots, q);
        double fn = l2_norm(q, f);
        CHECK(l2_norm(q, proj.f_sol) / fn < 1e-5);
        CHECK(proj.potential_coeff[2] == doctest::Approx(1.0).epsilon(1e-4));
    }

    SUBCASE("analytically solenoidal input keeps its norm") {
        // f = star d phi is divergence-free on any surface
        Bump phi{complexd(0.1, 0.12), 0.55};
        const double h = 1e-5;
        SymmetricTensor f;
        f.m = 1;
        f.comp.push_back([phi, h](complexd z) {
            double em = (1.0 - std::norm(z)) / 2.0;
            return -em * (phi(z + complexd(0, h)) - phi(z - complexd(0, h))) / (2 * h);
        });
        f.comp.push_back([phi, h](complexd z) {
            double em = (1.0 - std::norm(z)) / 2.0;
            return em * (phi(z + complexd(h, 0)) - phi(z - complexd(h, 0))) / (2 * h);
        });
        // divergence-free within finite differences
        SymmetricTensor div = divergence(f);
        for (int i = 0; i < 10; ++i)
            CHECK(std::abs(div.component(0, q.pts[static_cast<size_t>(i)])) < 1e-4);
        auto proj = solenoidal_project(f, pots, q);
        std::vector<SymmetricTensor> dterms;
        std::vector<double> cs;
        for (size_t b = 0; b < pots.size(); ++b) {
            dterms.push_back(sym_derivative(pots[b]));
            cs.push_back(proj.potential_coeff[b]);
        }
        SymmetricTensor dq = lincomb(dterms, cs);
        CHECK(l2_norm(q, dq) / l2_norm(q, f) < 0.05);
    }

    SUBCASE("residual orthogonality from the normal equations") {
        SymmetricTensor f = random_bump_tensor(1, 93);
        auto proj = solenoidal_project(f, pots, q);
        double fn = l2_norm(q, f);
        for (const auto& h : pots) {
            SymmetricTensor dh = sym_derivative(h);
            CHECK(std::abs(inner(q, proj.f_sol, dh)) < 1e-6 * fn * l2_norm(q, dh));
        }
    }

    SUBCASE("duplicated basis directions are rejected") {
        std::vector<SymmetricTensor> bad = {pots[0], pots[0], pots[1]};
        CHECK_THROWS_AS(solenoidal_project(random_bump_tensor(1, 94), bad, q), IllConditioned);
    }
}
