#include <doctest.h>

#include "bolzalab/experiments.hpp"
#include "bolzalab/field.hpp"

using namespace bolza;

TEST_CASE("finite differences along exact flows") {
    SurfaceGroup grp = build_bolza();
    auto probes = probe_set(grp, 24, 41);

    SUBCASE("derivatives of constants vanish") {
        FiberField one = constant_field(1.0);
        for (FlowKind w : {FlowKind::geodesic, FlowKind::perpendicular, FlowKind::rotation}) {
            FiberField d = derive(one, w);
            for (const auto& p : probes) CHECK(std::abs(d.eval(p)) < 1e-10);
        }
    }

    SUBCASE("V acts as ik on a lifted mode, k = 3") {
        FiberField mode = bump_mode_field(grp, complexd(0.1, 0.15), 0.5, 3);
        FiberField vmode = derive(mode, FlowKind::rotation);
        for (const auto& p : probes) {
            complexd val = mode.eval(p);
            if (std::abs(val) < 0.2) continue;  // relative check inside the bump
            CHECK(std::abs(vmode.eval(p) - complexd(0, 3) * val) / std::abs(val) < 1e-6);
        }
    }

    SUBCASE("mode coefficients satisfy V u_k = ik u_k at probe positions") {
        FiberField u = random_field(grp, 55, 4);
        std::vector<complexd> pos;
        for (int i = 0; i < 5; ++i) pos.push_back(probes[static_cast<size_t>(i)].z);
        FiberField vu = derive(u, FlowKind::rotation);
        for (int k : {-3, 1, 2}) {
            ModeCoefficients a = mode_coefficients(u, k, pos);
            ModeCoefficients b = mode_coefficients(vu, k, pos);
            for (size_t i = 0; i < pos.size(); ++i)
                CHECK(std::abs(b.values[i] - complexd(0, k) * a.values[i]) < 1e-5);
        }
    }
}

TEST_CASE("eta raising and lowering") {
    SurfaceGroup grp = build_bolza();
    auto probes = probe_set(grp, 16, 42);

    SUBCASE("eta of a constant vanishes") {
        FiberField one = constant_field(1.0);
        for (int s : {+1, -1}) {
            FiberField e = eta(one, s);
            for (const auto& p : probes) CHECK(std::abs(e.eval(p)) < 1e-10);
        }
    }

    SUBCASE("eta+ + eta- recompose X exactly") {
        FiberField u = random_field(grp, 77, 3);
        FiberField ep = eta(u, +1), em = eta(u, -1);
        FiberField xu = derive(u, FlowKind::geodesic);
        for (const auto& p : probes)
            CHECK(std::abs(ep.eval(p) + em.eval(p) - xu.eval(p)) < 1e-12);
    }

    SUBCASE("eta+ shifts mode 2 to mode 3") {
        complexd bc(-0.05, 0.2);
        FiberField pure = bump_mode_field(grp, bc, 0.5, 2);
        FiberField shifted = eta(pure, +1);
        std::vector<complexd> pos{bc, bc + complexd(0.1, 0.02), bc - complexd(0.06, 0.09)};
        CHECK(off_mode_mass(shifted, pos, {3}, 6) < 1e-5);
    }
}

TEST_CASE("szego projector") {
    SurfaceGroup grp = build_bolza();
    auto probes = probe_set(grp, 10, 43);

    SUBCASE("S cos(theta) = e^{i theta}/2 and S(const) = 0") {
        FiberField c = make_chart_field(
            grp, [](complexd, double th) { return complexd(std::cos(th), 0); }, 1);
        FiberField sc = szego(grp, c);
        for (const auto& p : probes)
            CHECK(std::abs(sc.eval(p) - 0.5 * std::polar(1.0, p.theta)) < 1e-12);
        FiberField s1 = szego(grp, constant_field(1.0));
        for (const auto& p : probes) CHECK(std::abs(s1.eval(p)) < 1e-14);
    }

    SUBCASE("idempotent at the coefficient level") {
        FiberField u = random_field(grp, 91, 4);
        FiberField su = szego(grp, u);
        FiberField ssu = szego(grp, su);
        for (int i = 0; i < 4; ++i) {
            complexd z = probes[static_cast<size_t>(i)].z;
            auto a = fiber_coeffs(su, z, 4);
            auto b = fiber_coeffs(ssu, z, 4);
            for (size_t k = 0; k < a.size(); ++k) CHECK(std::abs(a[k] - b[k]) < 1e-10);
        }
    }
}

TEST_CASE("antipodal parity") {
    SurfaceGroup grp = build_bolza();
    auto probes = probe_set(grp, 12, 44);

    SUBCASE("pure modes split by parity") {
        FiberField odd1 = make_chart_field(
            grp, [](complexd, double th) { return std::polar(1.0, th); }, 1);
        auto [ev, od] = antipodal_split(odd1);
        for (const auto& p : probes) {
            CHECK(std::abs(ev.eval(p)) < 1e-13);
            CHECK(std::abs(od.eval(p) - odd1.eval(p)) < 1e-13);
        }
        FiberField even2 = make_chart_field(
            grp, [](complexd, double th) { return 1.0 + std::polar(1.0, 2 * th); }, 2);
        auto [ev2, od2] = antipodal_split(even2);
        for (const auto& p : probes) {
            CHECK(std::abs(od2.eval(p)) < 1e-13);
            CHECK(std::abs(ev2.eval(p) - even2.eval(p)) < 1e-13);
        }
    }

    SUBCASE("X exchanges parities, so invariant distributions split") {
        // desk form of the odd/even splitting: X maps odd parts to even parts
        complexd bc(0.1, 0.14);
        Bump b{bc, 0.55};
        FiberField u = make_chart_field(
            grp,
            [b](complexd z, double th) {
                complexd s = 0;
                for (int k = -3; k <= 3; ++k)
                    s += (1.0 + 0.3 * k) * b(z) * std::polar(1.0, k * th + 0.2 * k * k);
                return s;
            },
            3);
        auto [ev, od] = antipodal_split(u);
        FiberField xod = derive(od, FlowKind::geodesic);
        FiberField xev = derive(ev, FlowKind::geodesic);
        std::vector<complexd> pos{bc, bc + complexd(0.09, 0.0), bc + complexd(0.0, 0.08)};
        CHECK(off_mode_mass(xod, pos, {-4, -2, 0, 2, 4}, 5) < 1e-5);
        CHECK(off_mode_mass(xev, pos, {-5, -3, -1, 1, 3, 5}, 5) < 1e-5);
        // and the constant (an exactly invariant function) has zero odd part
        auto [cev, cod] = antipodal_split(constant_field(1.0));
        FiberField xcod = derive(cod, FlowKind::geodesic);
        for (const auto& p : probes) CHECK(std::abs(xcod.eval(p)) < 1e-12);
    }
}

TEST_CASE("fiber field invariants") {
    SurfaceGroup grp = build_bolza();
    auto probes = probe_set(grp, 16, 45);

    SUBCASE("truncation honesty and Parseval") {
        FiberField u = random_field(grp, 95, 8);
        double sup = c0_norm(u, probes);
        for (int i = 0; i < 5; ++i) {
            complexd z = probes[static_cast<size_t>(i)].z;
            auto c = fiber_coeffs(u, z, 12);
            for (int k = -12; k <= 12; ++k)
                if (std::abs(k) > 8)
                    CHECK(std::abs(c[static_cast<size_t>(k + 12)]) < 1e-8 * std::max(sup, 1.0));
            // Parseval against the direct fiber quadrature
            double lhs = 0;
            for (const auto& ck : c) lhs += std::norm(ck);
            const int n = 64;
            double rhs = 0;
            for (int j = 0; j < n; ++j) {
                double th = two_pi * j / n;
                rhs += std::norm(u.eval(PhasePoint{frame_from_disk(z, th), z, th, true})) / n;
            }
            CHECK(std::abs(lhs - rhs) <= 1e-8 * std::max(rhs, 1e-12));
        }
    }

    SUBCASE("anti-self-adjointness of X in Monte-Carlo sigmas") {
        FiberField u = random_field(grp, 96, 3, 3, true);
        FiberField v = random_field(grp, 97, 3, 3, true);
        FiberField xu = derive(u, FlowKind::geodesic);
        FiberField xv = derive(v, FlowKind::geodesic);
        const int B = 20, bs = 1500;
        std::vector<double> bm(B);
        for (int b = 0; b < B; ++b) {
            LiouvilleSampler smp(grp, derive_seed(500, static_cast<uint64_t>(b)));
            KahanSum s;
            for (int i = 0; i < bs; ++i) {
                PhasePoint p = smp.next();
                s.add((xu.eval(p) * v.eval(p) + u.eval(p) * xv.eval(p)).real());
            }
            bm[static_cast<size_t>(b)] = s.value() / bs;
        }
        double mean = 0;
        for (double x : bm) mean += x / B;
        double var = 0;
        for (double x : bm) var += sq(x - mean) / (B - 1);
        CHECK(std::abs(mean) <= 3.0 * std::sqrt(var / B));
    }
}

TEST_CASE("commutation identities of the frame operators") {
    SurfaceGroup grp = build_bolza();
    RunConfig cfg;
    cfg.seed = 404;
    cfg.K = 6;
    FiberReport rep = experiment_fiber(grp, cfg, 3);
    CHECK(rep.commut_residual < 1e-4);
    CHECK(rep.structure_residual < 1e-4);
    CHECK(rep.eta_offmode_mass < 1e-5);
}

TEST_CASE("coordinate formula cross-check") {
    // the isothermal-coordinate expressions for X and Xperp, used only here
    SurfaceGroup grp = build_bolza();
    FiberField u = random_field(grp, 98, 3);
    auto chart_fd = [&](const FiberField& f, const PhasePoint& p, int which) {
        const double h = 1e-5;
        auto at = [&](complexd z, double th) {
            return f.eval(PhasePoint{frame_from_disk(z, th), z, th});
        };
        if (which == 0)
            return (at(p.z + complexd(h, 0), p.theta) - at(p.z - complexd(h, 0), p.theta)) /
                   (2 * h);
        if (which == 1)
            return (at(p.z + complexd(0, h), p.theta) - at(p.z - complexd(0, h), p.theta)) /
                   (2 * h);
        return (at(p.z, p.theta + h) - at(p.z, p.theta - h)) / (2 * h);
    };
    auto probes = probe_set(grp, 10, 46);
    FiberField xu = derive(u, FlowKind::geodesic);
    FiberField xpu = derive(u, FlowKind::perpendicular);
    for (const auto& p : probes) {
        double w = conformal_log_factor(p.z);
        double emw = std::exp(-w);
        double wx = 2.0 * p.z.real() / (1.0 - std::norm(p.z));
        double wy = 2.0 * p.z.imag() / (1.0 - std::norm(p.z));
        double c = std::cos(p.theta), s = std::sin(p.theta);
        complexd d1 = chart_fd(u, p, 0), d2 = chart_fd(u, p, 1), dth = chart_fd(u, p, 2);
        complexd x_coord = emw * (c * d1 + s * d2 + (-wx * s + wy * c) * dth);
        complexd xp_coord = -emw * (-s * d1 + c * d2 - (wx * c + wy * s) * dth);
        CHECK(std::abs(xu.eval(p) - x_coord) < 1e-4);
        CHECK(std::abs(xpu.eval(p) - xp_coord) < 1e-4);
    }
}
