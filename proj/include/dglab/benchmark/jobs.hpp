#pragma once

#include <yaml-cpp/yaml.h>

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "dglab/benchmark/config.hpp"
#include "dglab/benchmark/sampling.hpp"
#include "dglab/experiment/experiment.hpp"

namespace dglab {

/// One cell of the job matrix.
struct JobSpec {
    std::string method;
    std::string model;
    std::string trainer;
    ParamMap params;
    std::size_t param_index = 0;
    std::size_t seed_index = 0;
    std::uint64_t seed = 0;
    std::string test_domain;  // empty: the task's default test domains
    YAML::Node config;        // complete run configuration for this job
    fs::path base_dir = ".";

    /// File-name-safe identifier, unique across the matrix.
    std::string id() const {
        std::string dom = test_domain.empty() ? "default" : test_domain;
        std::string out = method + "__p" + std::to_string(param_index) + "__s" + std::to_string(seed_index) +
                          "__" + dom;
        for (char& c : out)
            if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-' && c != '.') c = '-';
        return out;
    }

    ExperimentConfig experiment() const { return parse_experiment_config(config, base_dir); }

    std::string config_text() const {
        YAML::Emitter em;
        em << config;
        return std::string(em.c_str()) + "\n";
    }
};

namespace bench_detail {

inline YAML::Node param_node(const ParamValue& v) { return YAML::Node(to_string(v)); }


}  // namespace bench_detail

/// Parameter sequence of every method, in method order.
inline std::vector<std::vector<ParamMap>> method_param_sets(const BenchmarkConfig& cfg) {
    std::vector<PoolRequest> requests;
    for (const auto& m : cfg.methods)
        if (m.mode == SamplingMode::random && !m.shared.empty())
            requests.push_back({m.name, m.shared, m.hyperparams, cfg.n_param_samples});
    const auto pooled = requests.empty() ? std::map<std::string, std::vector<ParamMap>>{}
                                         : shared_pool(cfg.shared, cfg.pool_size, cfg.base_seed, requests);
    std::vector<std::vector<ParamMap>> out;
    for (const auto& m : cfg.methods) {
        if (m.mode == SamplingMode::grid) {
            out.push_back(grid_params(m.hyperparams));
        } else if (!m.shared.empty()) {
            out.push_back(pooled.at(m.name));
        } else if (m.hyperparams.empty()) {
            out.emplace_back(cfg.n_param_samples);  // empty maps, one per sample slot
        } else {
            out.push_back(sample_params(m.hyperparams, cfg.n_param_samples, method_seed(cfg.base_seed, m.name)));
        }
    }
    return out;
}

/// Method-major, then parameter sample, then seed, then test domain.
inline std::vector<JobSpec> enumerate_jobs(const BenchmarkConfig& cfg) {
    const auto param_sets = method_param_sets(cfg);
    std::vector<std::string> domains = cfg.te_d;
    if (domains.empty()) domains.push_back("");
    std::vector<JobSpec> jobs;
    for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
        const MethodSpec& m = cfg.methods[mi];
        for (std::size_t pi = 0; pi < param_sets[mi].size(); ++pi) {
            for (std::size_t si = 0; si < cfg.n_seeds; ++si) {
                for (const auto& dom : domains) {
                    JobSpec j;
                    j.method = m.name;
                    j.model = m.model;
                    j.trainer = m.trainer;
                    j.params = param_sets[mi][pi];
                    j.param_index = pi;
                    j.seed_index = si;
                    j.seed = cfg.base_seed + si;
                    j.test_domain = dom;
                    j.base_dir = cfg.base_dir;
                    YAML::Node c = YAML::Clone(cfg.common);
                    c["model"] = m.model;
                    c["trainer"] = m.trainer;
                    c["seed"] = std::to_string(j.seed);
                    if (!dom.empty()) {
                        YAML::Node list(YAML::NodeType::Sequence);
                        list.push_back(dom);
                        c["te_d"] = list;
                    }
                    for (const auto& [name, value] : j.params) c[name] = bench_detail::param_node(value);
                    j.config = c;
                    jobs.push_back(std::move(j));
                }
            }
        }
    }
    return jobs;
}

}  // namespace dglab
