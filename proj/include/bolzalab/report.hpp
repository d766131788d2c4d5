#pragma once

#include "bolzalab/config.hpp"
#include "bolzalab/estimator.hpp"
#include "bolzalab/normal_ops.hpp"
#include "bolzalab/version.hpp"
#include "bolzalab/xray.hpp"

#include <filesystem>
#include <fstream>
#include <string>

namespace bolza {

/*
    Artifact writers.  Every number rendered into a CSV or JSON payload goes
    through fmt17 (as a JSON string where nlohmann would reformat), so two
    runs with the same config produce byte-identical numeric payloads.
*/

inline json estimate_json(const PairingEstimate& e) {
    json j;
    j["value_re"] = fmt17(e.value.real());
    j["value_im"] = fmt17(e.value.imag());
    j["std_error"] = fmt17(e.std_error);
    j["lambda"] = fmt17(e.lambda);
    j["T"] = fmt17(e.T);
    j["n_samples"] = e.n_samples;
    j["seed"] = e.seed;
    if (e.truncation > 0) j["truncation"] = fmt17(e.truncation);
    return j;
}

inline std::string ladder_csv(const PiPairingResult& r) {
    std::string s = "lambda,T,value_re,value_im,std_error\n";
    for (size_t l = 0; l < r.lambdas.size(); ++l) {
        const auto& e = r.ladder[l].at(0, 0);
        s += fmt17(e.lambda) + "," + fmt17(e.T) + "," + fmt17(e.value.real()) + "," +
             fmt17(e.value.imag()) + "," + fmt17(e.std_error) + "\n";
    }
    const auto& e = r.extrapolated;
    s += "0,," + fmt17(e.value.real()) + "," + fmt17(e.value.imag()) + "," +
         fmt17(e.std_error) + "\n";
    return s;
}

inline std::string correlation_csv(const std::vector<PairingEstimate>& pts) {
    std::string s = "t,value_re,value_im,std_error\n";
    for (const auto& e : pts)
        s += fmt17(e.T) + "," + fmt17(e.value.real()) + "," + fmt17(e.value.imag()) + "," +
             fmt17(e.std_error) + "\n";
    return s;
}

inline std::string symbol_csv(const SymbolReport& rep) {
    std::string s = "xi,pairing,std_error\n";
    for (size_t i = 0; i < rep.xi.size(); ++i)
        s += fmt17(rep.xi[i]) + "," + fmt17(rep.pairing[i].value.real()) + "," +
             fmt17(rep.pairing[i].std_error) + "\n";
    return s;
}

inline json symbol_json(const SymbolReport& rep) {
    json j;
    j["slope"] = fmt17(rep.slope);
    j["intercept"] = fmt17(rep.intercept);
    j["slope_std_error"] = fmt17(rep.slope_std_error);
    j["bump_radius"] = fmt17(rep.bump_radius);
    j["center_re"] = fmt17(rep.center.real());
    j["center_im"] = fmt17(rep.center.imag());
    json pts = json::array();
    for (size_t i = 0; i < rep.xi.size(); ++i) {
        json p;
        p["xi"] = fmt17(rep.xi[i]);
        p["pairing"] = estimate_json(rep.pairing[i]);
        pts.push_back(p);
    }
    j["points"] = pts;
    return j;
}

inline json injectivity_json(const InjectivityReport& rep) {
    json j;
    j["m"] = rep.m;
    j["rows"] = rep.rows;
    j["sol_dim"] = rep.sol_dim;
    j["pot_dim"] = rep.pot_dim;
    j["sigma_min"] = fmt17(rep.sigma_min);
    j["sigma_max"] = fmt17(rep.sigma_max);
    j["potential_sigma"] = fmt17(rep.potential_sigma);
    j["kernel_gap"] = fmt17(rep.kernel_gap);
    j["threshold"] = fmt17(rep.threshold);
    j["pass"] = rep.pass;
    json osv = json::array(), psv = json::array();
    for (double s : rep.sol_singular_values) osv.push_back(fmt17(s));
    for (double s : rep.pot_singular_values) psv.push_back(fmt17(s));
    j["sol_singular_values"] = osv;
    j["pot_singular_values"] = psv;
    return j;
}

inline json pushforward_json(const PushforwardReport& rep) {
    json j;
    j["condition_number"] = fmt17(rep.condition_number);
    j["regularization"] = fmt17(rep.regularization);
    j["rel_error"] = fmt17(rep.rel_error);
    j["max_invariance_sigmas"] = fmt17(rep.max_invariance_sigmas);
    json c = json::array();
    for (double x : rep.coeff) c.push_back(fmt17(x));
    j["coeff"] = c;
    json held = json::array();
    for (size_t h = 0; h < rep.heldout_labels.size(); ++h) {
        json e;
        e["label"] = rep.heldout_labels[h];
        e["predicted"] = fmt17(rep.predicted[h]);
        e["expected"] = fmt17(rep.expected[h]);
        e["invariance_value"] = fmt17(rep.invariance_value[h]);
        e["invariance_sigma"] = fmt17(rep.invariance_sigma[h]);
        held.push_back(e);
    }
    j["heldout"] = held;
    return j;
}

inline json livsic_json(const LivsicReport& rep) {
    json j;
    j["max_orbit_residual_scaled"] = fmt17(rep.max_orbit_residual_scaled);
    j["max_pi_sigmas"] = fmt17(rep.max_pi_sigmas);
    j["u_fit_residual"] = fmt17(rep.u_fit_residual);
    if (rep.recovered_rel_error >= 0) j["recovered_rel_error"] = fmt17(rep.recovered_rel_error);
    json orb = json::array();
    for (size_t i = 0; i < rep.orbit_integrals.size(); ++i) {
        json e;
        e["length"] = fmt17(rep.orbit_lengths[i]);
        e["integral"] = fmt17(rep.orbit_integrals[i]);
        orb.push_back(e);
    }
    j["orbit_integrals"] = orb;
    return j;
}

inline std::string matrix_csv(const Eigen::MatrixXd& m, const std::vector<std::string>& labels) {
    std::string s = "i";
    for (const auto& l : labels) s += "," + l;
    s += "\n";
    for (long r = 0; r < m.rows(); ++r) {
        s += std::to_string(r);
        for (long c = 0; c < m.cols(); ++c) s += "," + fmt17(m(r, c));
        s += "\n";
    }
    return s;
}

// run manifest: everything needed to reproduce the numeric payloads
inline json manifest_json(const RunConfig& cfg, const std::string& subcommand,
                          double wall_time_s, const std::vector<std::string>& outputs) {
    json j;
    j["tool"] = "bolzalab";
    j["version"] = version_string();
    j["subcommand"] = subcommand;
    j["config"] = cfg.to_json();
    j["wall_time_s"] = wall_time_s;
    j["outputs"] = outputs;
    return j;
}

inline void write_file(const std::filesystem::path& path, const std::string& contents) {
    std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << contents;
}

inline void write_json(const std::filesystem::path& path, const json& j) {
    write_file(path, j.dump(2) + "\n");
}

}  // namespace bolza
