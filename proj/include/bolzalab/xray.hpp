#pragma once

#include "bolzalab/census.hpp"
#include "bolzalab/core.hpp"
#include "bolzalab/field.hpp"
#include "bolzalab/tensor.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <string>
#include <vector>

namespace bolza {

/*
    X-ray transform over the geodesic census:

        I_m(f)(gamma) = int_0^l <f(gamma(t)), gammadot^{tensor m}> dt,

    realized as the orbit integral of pi_m^* f along the axis.  Quadrature is
    composite 8-point Gauss-Legendre with quadrature_n points per unit length
    (integrands are analytic along orbits, so doubling the density is the
    convergence gate).  The walker keeps the frame reduced panel by panel;
    field evaluators absorb the at-most-one wall crossing inside a panel.
*/

namespace gauss8 {
inline constexpr double node[8] = {
    -0.96028985649753623, -0.79666647741362674, -0.52553240991632899, -0.18343464249564980,
    0.18343464249564980, 0.52553240991632899, 0.79666647741362674, 0.96028985649753623};
inline constexpr double weight[8] = {
    0.10122853629037626, 0.22238103445337447, 0.31370664587788729, 0.36268378337836198,
    0.36268378337836198, 0.31370664587788729, 0.22238103445337447, 0.10122853629037626};
}  // namespace gauss8

// integrals of several fields along one closed orbit, one walk
inline std::vector<double> orbit_integrals(const SurfaceGroup& grp,
                                           const std::vector<FiberField>& fields,
                                           const GeodesicRecord& rec, int pts_per_unit = 64,
                                           double t0 = 0.0) {
    int n_panels = std::max(1, static_cast<int>(std::ceil(rec.length * pts_per_unit / 8.0)));
    double h = rec.length / n_panels;
    std::vector<KahanSum> acc(fields.size());
    PhasePoint p = reduce(grp, PhasePoint::from_group(rec.axis_frame * geodesic_translation(t0)));
    for (int panel = 0; panel < n_panels; ++panel) {
        for (int i = 0; i < 8; ++i) {
            double dt = 0.5 * h * (gauss8::node[i] + 1.0);
            PhasePoint q = flow(p, dt, FlowKind::geodesic);
            double w = 0.5 * h * gauss8::weight[i];
            for (size_t j = 0; j < fields.size(); ++j) acc[j].add(w * fields[j].eval(q).real());
        }
        p = reduce(grp, flow(p, h, FlowKind::geodesic));
    }
    std::vector<double> out(fields.size());
    for (size_t j = 0; j < fields.size(); ++j) out[j] = acc[j].value();
    return out;
}

inline double orbit_integral(const SurfaceGroup& grp, const FiberField& f,
                             const GeodesicRecord& rec, int pts_per_unit = 64, double t0 = 0.0) {
    return orbit_integrals(grp, {f}, rec, pts_per_unit, t0)[0];
}

// I_m(f)(gamma)
inline double xray(const SurfaceGroup& grp, const SymmetricTensor& f, const GeodesicRecord& rec,
                   int pts_per_unit = 64) {
    return orbit_integral(grp, pi_star_up(grp, f), rec, pts_per_unit);
}

struct XrayMatrix {
    std::vector<GeodesicRecord> rows;
    std::vector<std::string> col_labels;
    Eigen::MatrixXd entries;
    int quadrature_n = 64;        // points per unit length
    double gate_rel_change = 0.0; // relative change when quadrature_n doubles
    double gate_abs_floor = 0.0;  // largest absolute change (noise scale)
    int m = 0;
};

inline XrayMatrix assemble(const SurfaceGroup& grp, const std::vector<SymmetricTensor>& basis,
                           const std::vector<std::string>& labels,
                           const std::vector<GeodesicRecord>& census, int m,
                           int pts_per_unit = 64, double gate_tol = 1e-8) {
    if (census.empty()) throw ConfigError("assemble needs a nonempty census");
    XrayMatrix X;
    X.rows = census;
    X.col_labels = labels;
    X.m = m;
    X.quadrature_n = pts_per_unit;
    std::vector<FiberField> lifts;
    for (const auto& f : basis) lifts.push_back(pi_star_up(grp, f));

    X.entries.resize(static_cast<long>(census.size()), static_cast<long>(basis.size()));
    double scale = 0.0, worst = 0.0;
    for (size_t r = 0; r < census.size(); ++r) {
        auto row = orbit_integrals(grp, lifts, census[r], pts_per_unit);
        auto row2 = orbit_integrals(grp, lifts, census[r], 2 * pts_per_unit);
        for (size_t c = 0; c < basis.size(); ++c) {
            X.entries(static_cast<long>(r), static_cast<long>(c)) = row2[c];
            worst = std::max(worst, std::abs(row2[c] - row[c]));
            scale = std::max(scale, std::abs(row2[c]));
        }
    }
    X.gate_abs_floor = worst;
    X.gate_rel_change = worst / std::max(scale, 1e-300);
    if (X.gate_rel_change > gate_tol)
        throw QuadratureNotConverged("doubling gate " + fmt17(X.gate_rel_change));
    return X;
}

struct InjectivityReport {
    int m = 0;
    double sigma_min = 0.0;       // over the solenoidal subspace
    double sigma_max = 0.0;
    double potential_sigma = 0.0; // largest singular value over potential directions
    double kernel_gap = 0.0;
    double threshold = 1e3;
    bool pass = false;
    int rows = 0;
    int sol_dim = 0;
    int pot_dim = 0;
    std::vector<double> sol_singular_values;
    std::vector<double> pot_singular_values;
};

// Rank separation on an assembled matrix: columns are recombined into the
// solenoidal subspace (coordinates sol_coords) and the known potential
// directions (pot_coords); both are L^2-normalized through the column Gram.
inline InjectivityReport injectivity_test(const XrayMatrix& X, const Eigen::MatrixXd& sol_coords,
                                          const Eigen::MatrixXd& pot_coords,
                                          const Eigen::MatrixXd& column_gram,
                                          double threshold = 1e3) {
    InjectivityReport rep;
    rep.m = X.m;
    rep.threshold = threshold;
    rep.rows = static_cast<int>(X.entries.rows());
    rep.sol_dim = static_cast<int>(sol_coords.cols());
    rep.pot_dim = static_cast<int>(pot_coords.cols());
    if (rep.rows < rep.sol_dim)
        throw RankDeficientCensus("rows " + std::to_string(rep.rows) + " < solenoidal dim " +
                                  std::to_string(rep.sol_dim) + "; need longer census");

    auto normalized = [&](const Eigen::MatrixXd& C) {
        Eigen::MatrixXd N = C;
        for (long j = 0; j < C.cols(); ++j) {
            double n2 = (C.col(j).transpose() * column_gram * C.col(j))(0, 0);
            if (n2 > 0) N.col(j) /= std::sqrt(n2);
        }
        return N;
    };

    Eigen::MatrixXd Xs = X.entries * normalized(sol_coords);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd_s(Xs);
    rep.sol_singular_values.assign(svd_s.singularValues().data(),
                                   svd_s.singularValues().data() + svd_s.singularValues().size());
    rep.sigma_min = svd_s.singularValues().minCoeff();
    rep.sigma_max = svd_s.singularValues().maxCoeff();

    if (pot_coords.cols() > 0) {
        Eigen::MatrixXd Xp = X.entries * normalized(pot_coords);
        Eigen::JacobiSVD<Eigen::MatrixXd> svd_p(Xp);
        rep.pot_singular_values.assign(
            svd_p.singularValues().data(),
            svd_p.singularValues().data() + svd_p.singularValues().size());
        rep.potential_sigma = svd_p.singularValues().maxCoeff();
    } else {
        // m = 0 has no potential tensors; gauge the gap against the
        // quadrature floor observed by the doubling gate
        rep.potential_sigma = std::max(X.gate_abs_floor, 1e-300);
    }
    rep.kernel_gap = rep.sigma_min / std::max(rep.potential_sigma, 1e-300);
    rep.pass = rep.kernel_gap > threshold;
    return rep;
}

inline std::string xray_matrix_csv(const XrayMatrix& X) {
    std::string s = "word,length";
    for (const auto& l : X.col_labels) s += "," + l;
    s += "\n";
    for (long r = 0; r < X.entries.rows(); ++r) {
        s += word_string(X.rows[static_cast<size_t>(r)].word) + "," +
             fmt17(X.rows[static_cast<size_t>(r)].length);
        for (long c = 0; c < X.entries.cols(); ++c) s += "," + fmt17(X.entries(r, c));
        s += "\n";
    }
    return s;
}

}  // namespace bolza
