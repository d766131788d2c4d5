#pragma once

#include "bolzalab/core.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace bolza {

using json = nlohmann::ordered_json;

struct RunConfig {
    uint64_t seed = 1;
    long n_samples = 200000;
    std::vector<double> lambda_ladder{0.4, 0.2, 0.1, 0.05};
    double t_max = 240.0;
    int K = 8;               // fiber mode cutoff for random test fields
    int basis_size = 12;
    double census_L = 8.0;
    int m = 1;               // tensor degree for xray/injectivity
    std::string output_dir = "out";
    int threads = 0;
    int quadrature_n = 64;   // orbit points per unit length
    double dt = 0.125;

    void validate() const {
        if (n_samples < 1) throw ConfigError("n_samples must be >= 1");
        if (K < 0) throw ConfigError("K must be >= 0");
        if (basis_size < 1) throw ConfigError("basis_size must be >= 1");
        if (census_L <= 0) throw ConfigError("census_L must be positive");
        if (m < 0) throw ConfigError("m must be >= 0");
        if (quadrature_n < 4) throw ConfigError("quadrature_n must be >= 4");
        if (dt <= 0 || t_max <= 0) throw ConfigError("dt and t_max must be positive");
        if (lambda_ladder.empty() || lambda_ladder.front() <= 0)
            throw ConfigError("lambda_ladder must be nonempty and positive");
        for (size_t i = 1; i < lambda_ladder.size(); ++i)
            if (!(lambda_ladder[i] < lambda_ladder[i - 1]))
                throw ConfigError("lambda_ladder must be strictly decreasing");
    }

    json to_json() const {
        json j;
        j["seed"] = seed;
        j["n_samples"] = n_samples;
        j["lambda_ladder"] = lambda_ladder;
        j["t_max"] = t_max;
        j["K"] = K;
        j["basis_size"] = basis_size;
        j["census_L"] = census_L;
        j["m"] = m;
        j["output_dir"] = output_dir;
        j["threads"] = threads;
        j["quadrature_n"] = quadrature_n;
        j["dt"] = dt;
        return j;
    }

    static RunConfig from_json(const json& j) {
        RunConfig c;
        if (j.contains("seed")) c.seed = j.at("seed").get<uint64_t>();
        if (j.contains("n_samples")) c.n_samples = j.at("n_samples").get<long>();
        if (j.contains("lambda_ladder"))
            c.lambda_ladder = j.at("lambda_ladder").get<std::vector<double>>();
        if (j.contains("t_max")) c.t_max = j.at("t_max").get<double>();
        if (j.contains("K")) c.K = j.at("K").get<int>();
        if (j.contains("basis_size")) c.basis_size = j.at("basis_size").get<int>();
        if (j.contains("census_L")) c.census_L = j.at("census_L").get<double>();
        if (j.contains("m")) c.m = j.at("m").get<int>();
        if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
        if (j.contains("threads")) c.threads = j.at("threads").get<int>();
        if (j.contains("quadrature_n")) c.quadrature_n = j.at("quadrature_n").get<int>();
        if (j.contains("dt")) c.dt = j.at("dt").get<double>();
        return c;
    }
};

}  // namespace bolza
