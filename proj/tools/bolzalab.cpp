#include "bolzalab/experiments.hpp"
#include "bolzalab/report.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace bolza;
using Clock = std::chrono::steady_clock;

namespace {

struct CliState {
    RunConfig cfg;
    std::string config_path;
    std::string subcommand;
    std::vector<std::string> outputs;
    Clock::time_point start = Clock::now();

    fs::path out(const std::string& name) {
        outputs.push_back(name);
        return fs::path(cfg.output_dir) / name;
    }

    void finish() {
        double wall = std::chrono::duration<double>(Clock::now() - start).count();
        write_json(fs::path(cfg.output_dir) / "manifest.json",
                   manifest_json(cfg, subcommand, wall, outputs));
    }
};

void load_config(CliState& st, uint64_t seed_override, bool seed_set,
                 const std::string& out_override, int threads_override) {
    if (!st.config_path.empty()) {
        std::ifstream in(st.config_path);
        if (!in) throw ConfigError("cannot read config " + st.config_path);
        json j = json::parse(in, nullptr, true, true);
        st.cfg = RunConfig::from_json(j);
    }
    if (seed_set) st.cfg.seed = seed_override;
    if (!out_override.empty()) st.cfg.output_dir = out_override;
    if (threads_override > 0) st.cfg.threads = threads_override;
    if (st.cfg.threads == 0) {
        if (const char* env = std::getenv("LAB_THREADS")) st.cfg.threads = std::atoi(env);
    }
    st.cfg.validate();
}

json verdict_json(const std::string& name, bool pass) {
    json j;
    j["check"] = name;
    j["pass"] = pass;
    return j;
}

int run_census(CliState& st) {
    SurfaceGroup grp = build_bolza();
    CensusReport rep = experiment_census(grp, st.cfg);
    write_file(st.out("census.csv"), census_csv(rep.census));
    json j;
    j["n_classes"] = rep.n_classes;
    j["systole"] = fmt17(rep.systole);
    j["systole_error"] = fmt17(rep.systole_error);
    j["worst_closure"] = fmt17(rep.worst_closure);
    j["pass"] = rep.pass;
    write_json(st.out("census_report.json"), j);
    return rep.pass ? 0 : 2;
}

int run_xray(CliState& st) {
    SurfaceGroup grp = build_bolza();
    CensusOptions copt;
    copt.max_length = st.cfg.census_L;
    auto census = enumerate_geodesics(grp, copt);
    XrayKernelReport kernel = experiment_xray_kernel(grp, st.cfg, census);

    // matrix artifact over a bump basis of the configured degree
    auto basis = bump_tensor_basis(st.cfg.m, st.cfg.basis_size,
                                   derive_seed(st.cfg.seed, 0xA00 + st.cfg.m));
    std::vector<std::string> labels;
    for (int i = 0; i < st.cfg.basis_size; ++i) labels.push_back("f" + std::to_string(i));
    XrayMatrix X = assemble(grp, basis, labels, census, st.cfg.m, st.cfg.quadrature_n);
    write_file(st.out("xray_matrix.csv"), xray_matrix_csv(X));

    json j;
    j["m"] = st.cfg.m;
    j["quadrature_gate_rel_change"] = fmt17(X.gate_rel_change);
    j["kernel_max_scaled_residual"] = fmt17(kernel.max_scaled_residual);
    j["kernel_pass"] = kernel.pass;
    write_json(st.out("xray_report.json"), j);
    return kernel.pass ? 0 : 2;
}

int run_injectivity(CliState& st) {
    SurfaceGroup grp = build_bolza();
    CensusOptions copt;
    copt.max_length = st.cfg.census_L;
    auto census = enumerate_geodesics(grp, copt);
    InjectivityReport rep = experiment_injectivity(grp, st.cfg, st.cfg.m, census);
    write_json(st.out("injectivity.json"), injectivity_json(rep));
    std::string csv = "kind,index,sigma\n";
    for (size_t i = 0; i < rep.sol_singular_values.size(); ++i)
        csv += "solenoidal," + std::to_string(i) + "," + fmt17(rep.sol_singular_values[i]) + "\n";
    for (size_t i = 0; i < rep.pot_singular_values.size(); ++i)
        csv += "potential," + std::to_string(i) + "," + fmt17(rep.pot_singular_values[i]) + "\n";
    write_file(st.out("singular_values.csv"), csv);
    return rep.pass ? 0 : 2;
}

int run_mixing(CliState& st) {
    SurfaceGroup grp = build_bolza();
    MixingReport rep = experiment_mixing(grp, st.cfg);
    json j;
    j["pass"] = rep.pass;
    json pairs = json::array();
    std::string csv = "pair,lambda,value,std_error,target\n";
    for (size_t p = 0; p < rep.pairs.size(); ++p) {
        const auto& pr = rep.pairs[p];
        json pj;
        pj["target"] = fmt17(pr.target);
        pj["target_sigma"] = fmt17(pr.target_sigma);
        pj["final_dev_sigmas"] = fmt17(pr.final_dev_sigmas);
        pj["monotone_within_bars"] = pr.monotone_within_bars;
        json rungs = json::array();
        for (const auto& e : pr.rungs) {
            rungs.push_back(estimate_json(e));
            csv += std::to_string(p) + "," + fmt17(e.lambda) + "," + fmt17(e.value.real()) + "," +
                   fmt17(e.std_error) + "," + fmt17(pr.target) + "\n";
        }
        pj["rungs"] = rungs;
        pairs.push_back(pj);
    }
    j["pairs"] = pairs;
    j["decay_trend"] = rep.decay_trend;
    write_json(st.out("mixing.json"), j);
    write_file(st.out("mixing_ladder.csv"), csv);
    write_file(st.out("correlation_decay.csv"), correlation_csv(rep.decay));
    return rep.pass ? 0 : 2;
}

int run_pi_check(CliState& st) {
    SurfaceGroup grp = build_bolza();
    PiCheckReport rep = experiment_pi_checks(grp, st.cfg);
    json j;
    j["n_pairs"] = rep.n_pairs;
    j["max_symmetry_sigmas"] = fmt17(rep.max_symmetry_sigmas);
    j["max_xpi_sigmas"] = fmt17(rep.max_xpi_sigmas);
    j["max_pix_sigmas"] = fmt17(rep.max_pix_sigmas);
    j["detector_value"] = fmt17(rep.detector_value);
    j["detector_sigmas"] = fmt17(rep.detector_sigmas);
    json v = json::array();
    v.push_back(verdict_json("symmetry", rep.max_symmetry_sigmas <= 3.0));
    v.push_back(verdict_json("x_pi_annihilation", rep.max_xpi_sigmas <= 3.0));
    v.push_back(verdict_json("pi_x_annihilation", rep.max_pix_sigmas <= 3.0));
    v.push_back(verdict_json("closed_geodesic_detector", rep.detector_sigmas > 3.0));
    j["verdicts"] = v;
    j["pass"] = rep.pass;
    write_json(st.out("pi_check.json"), j);
    write_file(st.out("pi_ladder.csv"), ladder_csv(rep.sample_ladder));
    return rep.pass ? 0 : 2;
}

int run_symbol(CliState& st) {
    SurfaceGroup grp = build_bolza();
    SymbolExperiment ex = experiment_symbol(grp, st.cfg);
    json j = symbol_json(ex.report);
    j["worst_halving"] = fmt17(ex.worst_halving);
    j["pass"] = ex.pass;
    write_json(st.out("symbol.json"), j);
    write_file(st.out("symbol.csv"), symbol_csv(ex.report));
    return ex.pass ? 0 : 2;
}

int run_pushforward(CliState& st) {
    SurfaceGroup grp = build_bolza();
    PushforwardExperiment ex = experiment_pushforward(grp, st.cfg);
    json j = pushforward_json(ex.report);
    j["pass"] = ex.pass;
    write_json(st.out("pushforward.json"), j);
    std::vector<std::string> labels;
    for (long i = 0; i < ex.report.gram.rows(); ++i) labels.push_back("psi" + std::to_string(i));
    write_file(st.out("pushforward_gram.csv"), matrix_csv(ex.report.gram, labels));
    write_file(st.out("pushforward_gram_stderr.csv"), matrix_csv(ex.report.gram_stderr, labels));
    return ex.pass ? 0 : 2;
}

int run_livsic(CliState& st) {
    SurfaceGroup grp = build_bolza();
    CensusOptions copt;
    copt.max_length = st.cfg.census_L;
    auto census = enumerate_geodesics(grp, copt);
    LivsicExperiment ex = experiment_livsic(grp, st.cfg, census);
    json j = livsic_json(ex.report);
    j["u_c1_norm"] = fmt17(ex.u_c1_norm);
    j["pass"] = ex.pass;
    write_json(st.out("livsic.json"), j);
    return ex.pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bolzalab - numerical laboratory for the Bolza geodesic flow"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    CliState st;
    uint64_t seed_override = 0;
    bool seed_set = false;
    std::string out_override;
    int threads_override = 0;

    app.add_option("--config", st.config_path, "JSON config file");
    auto* seed_opt = app.add_option("--seed", seed_override, "seed override");
    app.add_option("--out", out_override, "output directory");
    app.add_option("--threads", threads_override, "worker threads (default: LAB_THREADS or all)");

    struct Sub {
        const char* name;
        const char* desc;
        int (*fn)(CliState&);
    };
    const Sub subs[] = {
        {"census", "enumerate closed geodesics and export the census", run_census},
        {"xray", "X-ray matrix and kernel containment of potential tensors", run_xray},
        {"injectivity", "rank separation of I_m on the solenoidal subspace", run_injectivity},
        {"mixing", "residue check lambda <R+ u, v> -> <u,1><v,1>", run_mixing},
        {"pi-check", "symmetry and annihilation invariants of Pi", run_pi_check},
        {"symbol", "order -1 symbol probe of the normal operator", run_symbol},
        {"pushforward", "invariant distribution with prescribed push-forward", run_pushforward},
        {"livsic", "coboundary diagnosis: orbits, Pi pairings, X u = f fit", run_livsic},
    };
    for (const auto& sub : subs) app.add_subcommand(sub.name, sub.desc);

    CLI11_PARSE(app, argc, argv);
    seed_set = seed_opt->count() > 0;

    try {
        load_config(st, seed_override, seed_set, out_override, threads_override);
        for (const auto& sub : subs) {
            if (app.got_subcommand(sub.name)) {
                st.subcommand = sub.name;
                int rc = sub.fn(st);
                st.finish();
                if (rc != 0) std::cerr << st.subcommand << ": invariant FAIL\n";
                return rc;
            }
        }
        return 3;
    } catch (const Error& e) {
        json err;
        err["error"] = e.name();
        err["what"] = e.what();
        std::cerr << err.dump() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        json err;
        err["error"] = "unexpected";
        err["what"] = e.what();
        std::cerr << err.dump() << "\n";
        return 3;
    }
}
