#pragma once

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dglab/error.hpp"
#include "dglab/netcore/mlp.hpp"
#include "dglab/netcore/optimizer.hpp"
#include "dglab/tasks/builtin.hpp"

namespace dglab {

namespace fs = std::filesystem;

/// Where the task data comes from.
struct TaskSource {
    enum class Kind { builtin, folder, pathfile };
    Kind kind = Kind::builtin;

    BuiltinKind builtin = BuiltinKind::spurious_blobs;
    BuiltinParams builtin_params;
    std::uint64_t task_seed = 0;

    fs::path root;  // folder
    std::vector<std::pair<std::string, fs::path>> index_files;  // pathfile
    fs::path base_dir;
    int num_classes = 0;
    double val_fraction = 0.2;
};

/// A single experiment, as read from a run configuration.
struct ExperimentConfig {
    TaskSource task;
    std::vector<std::string> te_d;  // empty: the builtin task's default
    std::string model = "erm";
    std::string trainer = "basic";

    std::optional<double> gamma_y;
    std::optional<double> gamma_d;
    double gamma_reg = 0.1;
    std::map<std::string, double> gamma_reg_by_kind;  // overrides gamma_reg per model/trainer kind
    std::size_t zx_dim = 2, zy_dim = 4, zd_dim = 2;
    std::size_t feature_dim = 8;
    std::vector<std::size_t> net_widths{16};
    std::vector<std::size_t> net_widths_dom;
    std::vector<std::size_t> head_widths;
    Activation activation = Activation::relu;
    double init_scale = 1.0;

    std::size_t bs = 32;
    std::size_t epos = 10;
    OptimizerConfig optimizer{OptimizerKind::adam, 1e-3};
    std::optional<int> patience;
    std::uint64_t seed = 0;

    int dial_steps = 3;
    double dial_epsilon = 0.3;
    std::optional<double> dial_step_size;
    std::optional<double> mldg_inner_lr;
    double fishr_ema = 0.9;

    double gamma_for(const std::string& kind) const {
        auto it = gamma_reg_by_kind.find(kind);
        return it == gamma_reg_by_kind.end() ? gamma_reg : it->second;
    }
};

/// Every key a run configuration may carry.
inline const std::vector<std::string>& experiment_keys() {
    static const std::vector<std::string> keys{
        "te_d",       "tpath",         "task",        "task_params",  "task_seed",   "bs",
        "model",      "epos",          "trainer",     "gamma_y",      "gamma_d",     "gamma_reg",
        "zx_dim",     "zy_dim",        "zd_dim",      "feature_dim",  "net_widths",  "net_widths_dom",
        "head_widths", "activation",   "init_scale",  "lr",           "optimizer",   "momentum",
        "patience",   "seed",          "val_fraction", "dial_steps",  "dial_epsilon", "dial_step_size",
        "mldg_inner_lr", "fishr_ema"};
    return keys;
}

namespace yaml_detail {

template <typename T>
T scalar(const YAML::Node& node, const std::string& key) {
    if (!node.IsScalar()) throw ConfigError(key, key + ": expected a scalar value");
    try {
        return node.as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError(key, key + ": cannot interpret '" + node.Scalar() + "'");
    }
}

inline double number(const YAML::Node& node, const std::string& key) {
    const auto v = scalar<double>(node, key);
    if (!std::isfinite(v)) throw ConfigError(key, key + ": value must be finite");
    return v;
}

inline std::size_t count(const YAML::Node& node, const std::string& key, std::size_t min_value = 0) {
    const double v = number(node, key);
    if (v < static_cast<double>(min_value) || v != std::floor(v))
        throw ConfigError(key, key + ": expected an integer >= " + std::to_string(min_value));
    return static_cast<std::size_t>(v);
}

inline std::vector<std::size_t> widths(const YAML::Node& node, const std::string& key) {
    std::vector<std::size_t> out;
    if (node.IsNull()) return out;
    if (!node.IsSequence()) throw ConfigError(key, key + ": expected a list of layer widths");
    for (const auto& item : node) out.push_back(count(item, key, 1));
    return out;
}

inline std::vector<std::string> names(const YAML::Node& node, const std::string& key) {
    std::vector<std::string> out;
    if (node.IsScalar()) {
        out.push_back(node.Scalar());
    } else if (node.IsSequence()) {
        for (const auto& item : node) out.push_back(scalar<std::string>(item, key));
    } else {
        throw ConfigError(key, key + ": expected a name or a list of names");
    }
    return out;
}

inline void check_keys(const YAML::Node& node, const std::vector<std::string>& known, const std::string& where) {
    if (!node.IsMap()) throw ConfigError(where, where + ": expected a mapping");
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            std::string hint;
            if (key == "npath" || key == "npath_dom")
                hint = " (network definition files are not supported; use net_widths / net_widths_dom)";
            throw ConfigError(where.empty() ? key : where + "." + key,
                              "unknown key '" + key + "'" + (where.empty() ? "" : " in " + where) + hint);
        }
    }
}

}  // namespace yaml_detail

inline BuiltinParams parse_builtin_params(const YAML::Node& node) {
    using namespace yaml_detail;
    BuiltinParams p;
    if (!node || node.IsNull()) return p;
    check_keys(node,
               {"n_per_domain", "val_fraction", "n_train_domains", "n_test_domains", "mu_inv", "sigma_inv",
                "mu_sp", "sigma_sp", "spurious_shift", "angles", "moon_noise"},
               "task_params");
    auto key = [](const char* k) { return std::string("task_params.") + k; };
    if (node["n_per_domain"]) p.n_per_domain = count(node["n_per_domain"], key("n_per_domain"), 2);
    if (node["n_train_domains"]) p.n_train_domains = count(node["n_train_domains"], key("n_train_domains"), 1);
    if (node["n_test_domains"]) p.n_test_domains = count(node["n_test_domains"], key("n_test_domains"), 1);
    if (node["mu_inv"]) p.mu_inv = number(node["mu_inv"], key("mu_inv"));
    if (node["sigma_inv"]) p.sigma_inv = number(node["sigma_inv"], key("sigma_inv"));
    if (node["mu_sp"]) p.mu_sp = number(node["mu_sp"], key("mu_sp"));
    if (node["sigma_sp"]) p.sigma_sp = number(node["sigma_sp"], key("sigma_sp"));
    if (node["spurious_shift"]) p.spurious_shift = number(node["spurious_shift"], key("spurious_shift"));
    if (node["moon_noise"]) p.moon_noise = number(node["moon_noise"], key("moon_noise"));
    if (node["val_fraction"]) p.val_fraction = number(node["val_fraction"], key("val_fraction"));
    if (node["angles"]) {
        p.angles_deg.clear();
        if (!node["angles"].IsSequence()) throw ConfigError(key("angles"), "angles: expected a list");
        for (const auto& a : node["angles"]) p.angles_deg.push_back(number(a, key("angles")));
    }
    return p;
}

/// Reads a task description file (the target of `tpath`).
inline TaskSource parse_task_file(const fs::path& path) {
    using namespace yaml_detail;
    YAML::Node node;
    try {
        node = YAML::LoadFile(path.string());
    } catch (const YAML::Exception& e) {
        throw ConfigError("tpath", path.string() + ": " + e.what());
    }
    check_keys(node, {"kind", "name", "params", "seed", "root", "base_dir", "num_classes", "domains", "val_fraction"},
               "tpath");
    const fs::path dir = path.parent_path();
    TaskSource src;
    const std::string kind = node["kind"] ? scalar<std::string>(node["kind"], "tpath.kind") : "";
    if (node["val_fraction"]) src.val_fraction = number(node["val_fraction"], "tpath.val_fraction");
    if (kind == "builtin") {
        src.kind = TaskSource::Kind::builtin;
        src.builtin = parse_builtin_kind(node["name"] ? scalar<std::string>(node["name"], "tpath.name") : "");
        src.builtin_params = parse_builtin_params(node["params"]);
        if (node["seed"]) src.task_seed = count(node["seed"], "tpath.seed");
    } else if (kind == "folder") {
        src.kind = TaskSource::Kind::folder;
        if (!node["root"]) throw ConfigError("tpath.root", "folder task needs 'root'");
        src.root = dir / scalar<std::string>(node["root"], "tpath.root");
    } else if (kind == "pathfile") {
        src.kind = TaskSource::Kind::pathfile;
        src.base_dir = dir / (node["base_dir"] ? scalar<std::string>(node["base_dir"], "tpath.base_dir") : ".");
        if (!node["num_classes"]) throw ConfigError("tpath.num_classes", "pathfile task needs 'num_classes'");
        src.num_classes = static_cast<int>(count(node["num_classes"], "tpath.num_classes", 1));
        if (!node["domains"] || !node["domains"].IsMap())
            throw ConfigError("tpath.domains", "pathfile task needs a 'domains' mapping");
        for (const auto& kv : node["domains"])
            src.index_files.emplace_back(kv.first.as<std::string>(), dir / scalar<std::string>(kv.second, "tpath.domains"));
    } else {
        throw ConfigError("tpath.kind", "task kind must be one of builtin, folder, pathfile");
    }
    return src;
}

/// Converts a run-configuration mapping. Relative paths resolve against `base_dir`.
inline ExperimentConfig parse_experiment_config(const YAML::Node& node, const fs::path& base_dir = ".") {
    using namespace yaml_detail;
    check_keys(node, experiment_keys(), "");
    ExperimentConfig c;
    if (node["tpath"] && node["task"])
        throw ConfigError("task", "give either 'task' (builtin name) or 'tpath' (task file), not both");
    if (node["tpath"]) {
        c.task = parse_task_file(base_dir / scalar<std::string>(node["tpath"], "tpath"));
    } else {
        c.task.kind = TaskSource::Kind::builtin;
        if (node["task"]) c.task.builtin = parse_builtin_kind(scalar<std::string>(node["task"], "task"));
    }
    if (node["task_params"]) {
        if (c.task.kind != TaskSource::Kind::builtin)
            throw ConfigError("task_params", "task_params only applies to builtin tasks");
        c.task.builtin_params = parse_builtin_params(node["task_params"]);
    }
    if (node["task_seed"]) c.task.task_seed = count(node["task_seed"], "task_seed");
    if (node["val_fraction"]) {
        c.task.val_fraction = number(node["val_fraction"], "val_fraction");
        c.task.builtin_params.val_fraction = c.task.val_fraction;
    }
    if (node["te_d"]) c.te_d = names(node["te_d"], "te_d");
    if (node["model"]) c.model = scalar<std::string>(node["model"], "model");
    if (node["trainer"]) c.trainer = scalar<std::string>(node["trainer"], "trainer");
    if (node["gamma_y"]) c.gamma_y = number(node["gamma_y"], "gamma_y");
    if (node["gamma_d"]) c.gamma_d = number(node["gamma_d"], "gamma_d");
    if (const auto g = node["gamma_reg"]) {
        if (g.IsMap()) {
            for (const auto& kv : g) {
                const auto kind = kv.first.as<std::string>();
                c.gamma_reg_by_kind[kind] = number(kv.second, "gamma_reg." + kind);
            }
            if (auto it = c.gamma_reg_by_kind.find("default"); it != c.gamma_reg_by_kind.end()) {
                c.gamma_reg = it->second;
                c.gamma_reg_by_kind.erase(it);
            }
        } else {
            c.gamma_reg = number(g, "gamma_reg");
        }
    }
    if (node["zx_dim"]) c.zx_dim = count(node["zx_dim"], "zx_dim");
    if (node["zy_dim"]) c.zy_dim = count(node["zy_dim"], "zy_dim", 1);
    if (node["zd_dim"]) c.zd_dim = count(node["zd_dim"], "zd_dim", 1);
    if (node["feature_dim"]) c.feature_dim = count(node["feature_dim"], "feature_dim", 1);
    if (node["net_widths"]) c.net_widths = widths(node["net_widths"], "net_widths");
    if (node["net_widths_dom"]) c.net_widths_dom = widths(node["net_widths_dom"], "net_widths_dom");
    if (node["head_widths"]) c.head_widths = widths(node["head_widths"], "head_widths");
    if (node["activation"]) {
        const auto a = scalar<std::string>(node["activation"], "activation");
        if (a == "relu") c.activation = Activation::relu;
        else if (a == "tanh") c.activation = Activation::tanh;
        else throw ConfigError("activation", "activation must be relu or tanh");
    }
    if (node["init_scale"]) c.init_scale = number(node["init_scale"], "init_scale");
    if (node["bs"]) c.bs = count(node["bs"], "bs", 1);
    if (node["epos"]) c.epos = count(node["epos"], "epos", 1);
    if (node["lr"]) c.optimizer.learning_rate = number(node["lr"], "lr");
    if (node["optimizer"]) {
        const auto o = scalar<std::string>(node["optimizer"], "optimizer");
        if (o == "sgd") c.optimizer.kind = OptimizerKind::sgd;
        else if (o == "adam") c.optimizer.kind = OptimizerKind::adam;
        else throw ConfigError("optimizer", "optimizer must be sgd or adam");
    }
    if (node["momentum"]) c.optimizer.momentum = number(node["momentum"], "momentum");
    if (node["patience"]) c.patience = static_cast<int>(count(node["patience"], "patience"));
    if (node["seed"]) c.seed = count(node["seed"], "seed");
    if (node["dial_steps"]) c.dial_steps = static_cast<int>(count(node["dial_steps"], "dial_steps", 1));
    if (node["dial_epsilon"]) c.dial_epsilon = number(node["dial_epsilon"], "dial_epsilon");
    if (node["dial_step_size"]) c.dial_step_size = number(node["dial_step_size"], "dial_step_size");
    if (node["mldg_inner_lr"]) c.mldg_inner_lr = number(node["mldg_inner_lr"], "mldg_inner_lr");
    if (node["fishr_ema"]) c.fishr_ema = number(node["fishr_ema"], "fishr_ema");
    c.optimizer.validate();
    return c;
}

}  // namespace dglab
