#include <doctest.h>

#include "bolzalab/experiments.hpp"
#include "bolzalab/xray.hpp"

using namespace bolza;

namespace {
std::vector<GeodesicRecord> small_census(const SurfaceGroup& grp, double L) {
    CensusOptions opt;
    opt.max_length = L;
    return enumerate_geodesics(grp, opt);
}
}  // namespace

TEST_CASE("xray of single tensors") {
    SurfaceGroup grp = build_bolza();
    auto census = small_census(grp, 5.0);

    SUBCASE("m = 0 constant integrates to the length") {
        SymmetricTensor one = constant_tensor(0, {1.0});
        for (const auto& rec : census)
            CHECK(std::abs(xray(grp, one, rec) - rec.length) < 1e-10);
    }

    SUBCASE("m = 2 metric integrates to the length (unit speed)") {
        SymmetricTensor g = metric_tensor();
        for (size_t i = 0; i < 5; ++i)
            CHECK(std::abs(xray(grp, g, census[i]) - census[i].length) < 1e-10);
    }

    SUBCASE("potential tensors integrate to zero") {
        AreaQuadrature q = AreaQuadrature::sampled(grp, 2000, 21);
        for (int m : {1, 2}) {
            SymmetricTensor h = random_bump_tensor(m - 1, 22 + static_cast<uint64_t>(m));
            double hn = c1_norm(q, h);
            SymmetricTensor dh = sym_derivative(h);
            for (size_t i = 0; i < 6; ++i)
                CHECK(std::abs(xray(grp, dh, census[i])) < 1e-6 * census[i].length * hn);
        }
    }

    SUBCASE("reparametrization invariance") {
        SymmetricTensor f = random_bump_tensor(1, 25);
        FiberField lift = pi_star_up(grp, f);
        const auto& rec = census[3];
        double a = orbit_integral(grp, lift, rec, 64, 0.0);
        double b = orbit_integral(grp, lift, rec, 64, 1.234);
        CHECK(std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(a)));
    }
}

TEST_CASE("assembled matrix") {
    SurfaceGroup grp = build_bolza();
    auto census = small_census(grp, 5.0);

    SUBCASE("constant column gives the length vector") {
        XrayMatrix X = assemble(grp, {constant_tensor(0, {1.0})}, {"one"}, census, 0, 64);
        for (long r = 0; r < X.entries.rows(); ++r)
            CHECK(std::abs(X.entries(r, 0) - census[static_cast<size_t>(r)].length) < 1e-10);
        CHECK(X.gate_rel_change < 1e-8);
    }

    SUBCASE("row order follows the census order") {
        auto basis = bump_tensor_basis(1, 2, 31);
        XrayMatrix X = assemble(grp, basis, {"a", "b"}, census, 1, 64);
        std::vector<GeodesicRecord> permuted(census.rbegin(), census.rend());
        XrayMatrix Y = assemble(grp, basis, {"a", "b"}, permuted, 1, 64);
        long n = X.entries.rows();
        for (long r = 0; r < n; ++r)
            for (long c = 0; c < 2; ++c) CHECK(X.entries(r, c) == Y.entries(n - 1 - r, c));
    }

    SUBCASE("non-smooth integrands fail the doubling gate") {
        SymmetricTensor jump;
        jump.m = 0;
        jump.comp.push_back([](complexd z) { return z.real() > 0.02 ? 1.0 : 0.0; });
        CHECK_THROWS_AS(assemble(grp, {jump}, {"jump"}, census, 0, 16), QuadratureNotConverged);
    }

    SUBCASE("empty census is a config error") {
        CHECK_THROWS_AS(assemble(grp, {constant_tensor(0, {1.0})}, {"one"}, {}, 0, 64),
                        ConfigError);
    }
}

TEST_CASE("injectivity rank separation") {
    SurfaceGroup grp = build_bolza();
    auto census = small_census(grp, 6.0);
    RunConfig cfg;
    cfg.seed = 5;
    cfg.basis_size = 6;
    cfg.quadrature_n = 64;

    SUBCASE("m = 1: solenoidal directions separate from potential directions") {
        InjectivityReport rep = experiment_injectivity(grp, cfg, 1, census);
        CHECK(rep.sigma_min > 0.0);
        CHECK(rep.kernel_gap > 1e3);
        CHECK(rep.pass);
        // potential columns are pure quadrature noise
        CHECK(rep.potential_sigma < 1e-6 * rep.sigma_max);
    }

    SUBCASE("m = 0 gap is gauged against the quadrature floor") {
        InjectivityReport rep = experiment_injectivity(grp, cfg, 0, census);
        CHECK(rep.pot_dim == 0);
        CHECK(rep.kernel_gap > 1e3);
    }

    SUBCASE("a census smaller than the solenoidal dimension is rejected") {
        std::vector<GeodesicRecord> tiny(census.begin(), census.begin() + 3);
        CHECK_THROWS_AS(experiment_injectivity(grp, cfg, 1, tiny), RankDeficientCensus);
    }
}
