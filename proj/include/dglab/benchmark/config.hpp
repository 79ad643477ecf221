#pragma once

#include <yaml-cpp/yaml.h>

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "dglab/benchmark/sampling.hpp"
#include "dglab/error.hpp"
#include "dglab/experiment/config.hpp"
#include "dglab/experiment/registry.hpp"

namespace dglab {

enum class SamplingMode { random, grid };

struct MethodSpec {
    std::string name;
    std::string model;
    std::string trainer = "basic";
    std::vector<std::string> shared;
    std::vector<ParamDistribution> hyperparams;
    SamplingMode mode = SamplingMode::random;
};

/// Benchmark description.
///
/// Schema:
///   common:   run-configuration keys applied to every job (no model, trainer
///             or seed); te_d is a list, one job per entry
///   shared:   {pool_size: N, params: {name: distribution, ...}}
///   methods:  {label: {model, trainer, shared: [names], hyperparams:
///             {name: distribution}, mode: random|grid}}
///   sampling: {n_param_samples, n_seeds, base_seed, mode}
///
/// A distribution is {kind, lo, hi, values, step, num}.
struct BenchmarkConfig {
    YAML::Node common;  // mapping; te_d removed
    std::vector<std::string> te_d;
    std::vector<ParamDistribution> shared;
    std::size_t pool_size = 0;
    std::vector<MethodSpec> methods;
    std::size_t n_param_samples = 1;
    std::size_t n_seeds = 1;
    std::uint64_t base_seed = 0;
    fs::path base_dir = ".";

    bool uses_shared() const {
        for (const auto& m : methods)
            if (!m.shared.empty()) return true;
        return false;
    }
};

namespace bench_detail {

inline bool is_param_key(const std::string& k) {
    if (k == "model" || k == "trainer" || k == "seed" || k == "te_d") return false;
    const auto& keys = experiment_keys();
    return std::find(keys.begin(), keys.end(), k) != keys.end();
}

inline ParamDistribution parse_distribution(const std::string& name, const YAML::Node& node,
                                            const std::string& where) {
    using namespace yaml_detail;
    if (!is_param_key(name))
        throw ConfigError(where, where + ": '" + name + "' is not a tunable run-configuration key");
    check_keys(node, {"kind", "lo", "hi", "values", "step", "num"}, where);
    ParamDistribution d;
    d.name = name;
    if (!node["kind"]) throw ConfigError(where + ".kind", where + ": missing 'kind'");
    d.kind = parse_dist_kind(scalar<std::string>(node["kind"], where + ".kind"), where + ".kind");
    if (d.continuous()) {
        if (!node["lo"] || !node["hi"]) throw ConfigError(where, where + ": needs 'lo' and 'hi'");
        d.lo = number(node["lo"], where + ".lo");
        d.hi = number(node["hi"], where + ".hi");
    } else if (node["values"]) {
        if (!node["values"].IsSequence()) throw ConfigError(where + ".values", where + ".values: expected a list");
        for (const auto& v : node["values"]) d.values.push_back(parse_param_value(scalar<std::string>(v, where)));
    }
    if (node["step"]) d.step = number(node["step"], where + ".step");
    if (node["num"]) d.num = count(node["num"], where + ".num");
    d.validate(where);
    return d;
}

inline SamplingMode parse_mode(const YAML::Node& node, const std::string& key) {
    const auto s = yaml_detail::scalar<std::string>(node, key);
    if (s == "random") return SamplingMode::random;
    if (s == "grid") return SamplingMode::grid;
    throw ConfigError(key, key + ": mode must be random or grid");
}

}  // namespace bench_detail

inline BenchmarkConfig parse_benchmark_config(const YAML::Node& root, const fs::path& base_dir = ".") {
    using namespace yaml_detail;
    using namespace bench_detail;
    check_keys(root, {"common", "shared", "methods", "sampling"}, "");
    BenchmarkConfig cfg;
    cfg.base_dir = base_dir;

    cfg.common = root["common"] ? YAML::Clone(root["common"]) : YAML::Node(YAML::NodeType::Map);
    if (!cfg.common.IsMap()) throw ConfigError("common", "common: expected a mapping");
    for (const auto& kv : cfg.common) {
        const auto k = kv.first.as<std::string>();
        if (k == "model" || k == "trainer" || k == "seed")
            throw ConfigError("common." + k, "common." + k + " is set per method or per seed, not in common");
    }
    if (cfg.common["te_d"]) {
        cfg.te_d = names(cfg.common["te_d"], "common.te_d");
        cfg.common.remove("te_d");
    }
    // Job configs may be written elsewhere (cluster scripts), so the task
    // file path is made absolute.
    if (cfg.common["tpath"]) {
        const auto t = scalar<std::string>(cfg.common["tpath"], "common.tpath");
        cfg.common["tpath"] = fs::absolute(base_dir / t).lexically_normal().string();
    }
    // Validates the shared keys before any job is built.
    parse_experiment_config(cfg.common, base_dir);

    SamplingMode default_mode = SamplingMode::random;
    if (const auto s = root["sampling"]) {
        check_keys(s, {"n_param_samples", "n_seeds", "base_seed", "mode"}, "sampling");
        if (s["n_param_samples"]) cfg.n_param_samples = count(s["n_param_samples"], "sampling.n_param_samples", 1);
        if (s["n_seeds"]) cfg.n_seeds = count(s["n_seeds"], "sampling.n_seeds", 1);
        if (s["base_seed"]) cfg.base_seed = count(s["base_seed"], "sampling.base_seed");
        if (s["mode"]) default_mode = parse_mode(s["mode"], "sampling.mode");
    }

    if (const auto s = root["shared"]) {
        check_keys(s, {"pool_size", "params"}, "shared");
        cfg.pool_size = s["pool_size"] ? count(s["pool_size"], "shared.pool_size", 1) : cfg.n_param_samples;
        if (s["params"]) {
            if (!s["params"].IsMap()) throw ConfigError("shared.params", "shared.params: expected a mapping");
            for (const auto& kv : s["params"]) {
                const auto name = kv.first.as<std::string>();
                cfg.shared.push_back(parse_distribution(name, kv.second, "shared.params." + name));
            }
        }
    }

    if (!root["methods"] || !root["methods"].IsMap() || root["methods"].size() == 0)
        throw ConfigError("methods", "methods: expected a nonempty mapping");
    for (const auto& kv : root["methods"]) {
        MethodSpec m;
        m.name = kv.first.as<std::string>();
        const std::string where = "methods." + m.name;
        for (const auto& other : cfg.methods)
            if (other.name == m.name) throw ConfigError(where, "duplicate method '" + m.name + "'");
        const YAML::Node& node = kv.second;
        check_keys(node, {"model", "trainer", "shared", "hyperparams", "mode"}, where);
        m.model = node["model"] ? scalar<std::string>(node["model"], where + ".model") : m.name;
        if (node["trainer"]) m.trainer = scalar<std::string>(node["trainer"], where + ".trainer");
        try {
            resolve_model(m.model);
            resolve_trainer(m.trainer);
        } catch (const ConfigError& e) {
            throw ConfigError(where + "." + e.key(), where + ": " + e.what());
        }
        if (node["shared"]) m.shared = names(node["shared"], where + ".shared");
        for (const auto& name : m.shared) {
            bool declared = false;
            for (const auto& d : cfg.shared) declared |= d.name == name;
            if (!declared)
                throw ConfigError(where + ".shared", where + ": shared parameter '" + name + "' is not declared");
        }
        if (const auto h = node["hyperparams"]) {
            if (!h.IsMap()) throw ConfigError(where + ".hyperparams", where + ".hyperparams: expected a mapping");
            for (const auto& hv : h) {
                const auto name = hv.first.as<std::string>();
                for (const auto& s : m.shared)
                    if (s == name)
                        throw ConfigError(where + ".hyperparams." + name, name + " is both shared and private");
                m.hyperparams.push_back(parse_distribution(name, hv.second, where + ".hyperparams." + name));
            }
        }
        m.mode = node["mode"] ? parse_mode(node["mode"], where + ".mode") : default_mode;
        if (m.mode == SamplingMode::grid) {
            if (!m.shared.empty())
                throw ConfigError(where + ".shared", where + ": grid mode cannot take shared pool samples");
            for (const auto& d : m.hyperparams) grid_params({d});
        }
        cfg.methods.push_back(std::move(m));
    }
    if (cfg.uses_shared() && cfg.n_param_samples > cfg.pool_size)
        throw ConfigError("shared.pool_size", "n_param_samples (" + std::to_string(cfg.n_param_samples) +
                                                  ") exceeds the shared pool size (" +
                                                  std::to_string(cfg.pool_size) + ")");
    return cfg;
}

inline BenchmarkConfig parse_benchmark_config(const fs::path& path) {
    YAML::Node root;
    try {
        root = YAML::LoadFile(path.string());
    } catch (const YAML::BadFile&) {
        throw ConfigError("config", "cannot read benchmark config " + path.string());
    } catch (const YAML::Exception& e) {
        throw ConfigError("config", path.string() + ": " + e.what());
    }
    return parse_benchmark_config(root, path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

}  // namespace dglab
