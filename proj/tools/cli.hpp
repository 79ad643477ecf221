#pragma once

// Command-line front end. `run_cli` is kept in-process so tests can drive it
// with captured streams.

#include <CLI11.hpp>
#include <yaml-cpp/yaml.h>

#include <cstdio>
#include <iostream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "dglab/benchmark.hpp"
#include "dglab/experiment.hpp"

namespace dglab::cli {

enum ExitCode { exit_ok = 0, exit_runtime = 1, exit_config = 2, exit_partial = 3 };

/// Single-line error record: `dglab: error kind=<kind> key=<key> message=<text>`.
inline int report_error(std::ostream& err, const std::string& kind, const std::string& key,
                        const std::string& message, int code) {
    std::string flat = message;
    for (char& c : flat)
        if (c == '\n' || c == '\r') c = ' ';
    err << "dglab: error kind=" << kind << " key=" << (key.empty() ? "-" : key) << " message=" << flat << "\n";
    return code;
}

namespace detail {

inline std::string join(const std::vector<std::size_t>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + std::to_string(v[i]);
    return s + "]";
}

inline std::string join(const std::vector<std::string>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + v[i];
    return s + "]";
}

template <typename T>
std::string opt(const std::optional<T>& v) {
    if (!v) return "unset";
    if constexpr (std::is_floating_point_v<T>) return format_number(*v);
    else return std::to_string(*v);
}

/// Effective value of a run-configuration key, for the provenance echo.
inline std::string effective_value(const ExperimentConfig& c, const std::string& key) {
    if (key == "te_d") return c.te_d.empty() ? "task default" : join(c.te_d);
    if (key == "task" || key == "tpath") {
        if (c.task.kind == TaskSource::Kind::builtin) return to_string(c.task.builtin);
        return c.task.kind == TaskSource::Kind::folder ? "folder:" + c.task.root.string() : "pathfile";
    }
    if (key == "task_seed") return std::to_string(c.task.task_seed);
    if (key == "task_params") return "builtin defaults or file";
    if (key == "val_fraction") return format_number(c.task.val_fraction);
    if (key == "bs") return std::to_string(c.bs);
    if (key == "model") return c.model;
    if (key == "epos") return std::to_string(c.epos);
    if (key == "trainer") return c.trainer;
    if (key == "gamma_y") return opt(c.gamma_y);
    if (key == "gamma_d") return opt(c.gamma_d);
    if (key == "gamma_reg") {
        std::string s = format_number(c.gamma_reg);
        for (const auto& [k, v] : c.gamma_reg_by_kind) s += ", " + k + "=" + format_number(v);
        return s;
    }
    if (key == "zx_dim") return std::to_string(c.zx_dim);
    if (key == "zy_dim") return std::to_string(c.zy_dim);
    if (key == "zd_dim") return std::to_string(c.zd_dim);
    if (key == "feature_dim") return std::to_string(c.feature_dim);
    if (key == "net_widths") return join(c.net_widths);
    if (key == "net_widths_dom") return join(c.net_widths_dom);
    if (key == "head_widths") return join(c.head_widths);
    if (key == "activation") return to_string(c.activation);
    if (key == "init_scale") return format_number(c.init_scale);
    if (key == "lr") return format_number(c.optimizer.learning_rate);
    if (key == "optimizer") return c.optimizer.kind == OptimizerKind::adam ? "adam" : "sgd";
    if (key == "momentum") return format_number(c.optimizer.momentum);
    if (key == "patience") return opt(c.patience);
    if (key == "seed") return std::to_string(c.seed);
    if (key == "dial_steps") return std::to_string(c.dial_steps);
    if (key == "dial_epsilon") return format_number(c.dial_epsilon);
    if (key == "dial_step_size") return opt(c.dial_step_size);
    if (key == "mldg_inner_lr") return opt(c.mldg_inner_lr);
    if (key == "fishr_ema") return format_number(c.fishr_ema);
    return "?";
}

struct MergedConfig {
    YAML::Node node;
    std::map<std::string, std::string> source;  // key -> "flag" | "file"
    fs::path base_dir = ".";
};

/// File values first, then each `--set key=value` replaces the file value.
inline MergedConfig merge(const std::string& config_path, const std::vector<std::string>& sets) {
    MergedConfig m;
    m.node = YAML::Node(YAML::NodeType::Map);
    if (!config_path.empty()) {
        try {
            m.node = YAML::LoadFile(config_path);
        } catch (const YAML::BadFile&) {
            throw ConfigError("config", "cannot read config file " + config_path);
        } catch (const YAML::Exception& e) {
            throw ConfigError("config", config_path + ": " + e.what());
        }
        if (m.node.IsNull()) m.node = YAML::Node(YAML::NodeType::Map);
        if (!m.node.IsMap()) throw ConfigError("config", config_path + ": expected a mapping at top level");
        for (const auto& kv : m.node) m.source[kv.first.as<std::string>()] = "file";
        const fs::path parent = fs::path(config_path).parent_path();
        m.base_dir = parent.empty() ? fs::path(".") : parent;
    }
    for (const auto& s : sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0)
            throw ConfigError("--set", "--set expects key=value, got '" + s + "'");
        const std::string key = s.substr(0, eq);
        YAML::Node value;
        try {
            value = YAML::Load(s.substr(eq + 1));
        } catch (const YAML::Exception& e) {
            throw ConfigError(key, key + ": cannot parse value '" + s.substr(eq + 1) + "'");
        }
        m.node[key] = value;
        m.source[key] = "flag";
    }
    return m;
}

inline void echo_provenance(std::ostream& out, const ExperimentConfig& cfg, const MergedConfig& m) {
    out << "configuration (source: flag > file > default)\n";
    for (const auto& key : experiment_keys()) {
        auto it = m.source.find(key);
        if (it == m.source.end() && (key == "tpath" || key == "task_params")) continue;
        const std::string src = it == m.source.end() ? "default" : it->second;
        out << "  " << key << " = " << effective_value(cfg, key) << "  [" << src << "]\n";
    }
}

}  // namespace detail

inline int cmd_run(const std::string& config_path, const std::vector<std::string>& sets, const std::string& out_dir,
                   const std::string& result_file, std::ostream& out) {
    const detail::MergedConfig merged = detail::merge(config_path, sets);
    const ExperimentConfig cfg = parse_experiment_config(merged.node, merged.base_dir);
    detail::echo_provenance(out, cfg, merged);

    const fs::path result_path = !result_file.empty() ? fs::path(result_file) : fs::path(out_dir) / "result.json";
    if (result_path.has_parent_path()) ensure_writable_dir(result_path.parent_path());

    YAML::Emitter em;
    em << merged.node;
    const std::string config_text = std::string(em.c_str()) + "\n";

    const RunResult r = run_experiment(cfg, [&](const EpochRecord& rec) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "epoch %zu loss %.6f val_acc %.4f", rec.epoch, rec.mean_loss.total,
                      rec.val_accuracy);
        out << buf << "\n";
    });
    write_result(result_path, result_json(r, config_text), r.wall_time_s);
    char buf[160];
    std::snprintf(buf, sizeof buf, "selected epoch %zu val_acc %.4f", r.selected_epoch, r.val_accuracy);
    out << buf << "\n";
    for (const auto& d : r.test_accuracy) {
        std::snprintf(buf, sizeof buf, "test_acc %s %.4f", d.domain.c_str(), d.accuracy);
        out << buf << "\n";
    }
    out << "result: " << result_path.string() << "\n";
    return exit_ok;
}

struct BenchmarkArgs {
    std::string config;
    std::string out_dir = "benchmark_out";
    std::size_t workers = 1;
    bool force = false;
    bool cluster = false;
    ClusterTemplate tpl;
};

inline int cmd_benchmark(const BenchmarkArgs& a, std::ostream& out, std::ostream& err) {
    const BenchmarkConfig cfg = parse_benchmark_config(fs::path(a.config));
    const std::vector<JobSpec> jobs = enumerate_jobs(cfg);
    const fs::path dir(a.out_dir);
    out << "jobs: " << jobs.size() << "\n";
    if (a.cluster) {
        const ClusterScripts s = emit_cluster_scripts(jobs, dir, a.tpl);
        out << "scripts: " << s.job_scripts.size() << "\n";
        out << "submit: " << s.submit_all.string() << "\n";
        return exit_ok;
    }
    ExecuteOptions opts;
    opts.workers = a.workers;
    opts.force = a.force;
    opts.log = [&out](const std::string& line) { out << line << "\n" << std::flush; };
    const ExecutionReport report = execute_local(jobs, dir, opts);
    out << "skipped: " << report.skipped << "\n";
    out << "failed: " << report.failed << "\n";
    const ResultTable table = aggregate(dir, &err);
    out << "table: " << table_path(dir).string() << "\n";
    try {
        for (const auto& p : render_charts(table, dir / "charts")) out << "chart: " << p.string() << "\n";
    } catch (const ConfigError& e) {
        err << "warning: charts not rendered: " << e.what() << "\n";
    }
    return benchmark_exit_code(report.rows);
}

inline int cmd_charts(const std::string& table_file, const std::string& out_dir, std::ostream& out) {
    const ResultTable table = read_table(table_file);
    if (table.header.empty() || table.rows.empty()) throw ConfigError("table", "table is empty: " + table_file);
    const fs::path dir = out_dir.empty() ? fs::path(table_file).parent_path() / "charts" : fs::path(out_dir);
    for (const auto& p : render_charts(table, dir)) out << "chart: " << p.string() << "\n";
    return exit_ok;
}

/// Entry point; `args` excludes the program name.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Composable domain generalization training and benchmarking"};
    app.require_subcommand(1);

    std::string run_config, run_out = ".", run_result;
    std::vector<std::string> sets;
    auto* run = app.add_subcommand("run", "train and evaluate one experiment");
    run->add_option("--config,-c", run_config, "run configuration (YAML)");
    run->add_option("--set", sets, "override a configuration key, key=value (repeatable)");
    run->add_option("--out", run_out, "output directory for result.json");
    run->add_option("--result", run_result, "explicit result file path");

    BenchmarkArgs b;
    auto* bench = app.add_subcommand("benchmark", "run or script a benchmark");
    bench->add_option("--config,-c", b.config, "benchmark configuration (YAML)")->required();
    bench->add_option("--out", b.out_dir, "output directory");
    bench->add_option("--workers,-j", b.workers, "parallel local workers")->check(CLI::PositiveNumber);
    bench->add_flag("--force", b.force, "rerun jobs that already have ok results");
    bench->add_flag("--cluster", b.cluster, "write scheduler scripts instead of running");
    bench->add_option("--partition", b.tpl.partition, "scheduler partition");
    bench->add_option("--time", b.tpl.time_limit, "scheduler time limit");
    bench->add_option("--mem", b.tpl.memory, "scheduler memory request");
    bench->add_option("--cli", b.tpl.cli, "command the scripts invoke");

    std::string table_file, charts_out;
    auto* charts = app.add_subcommand("charts", "render charts from an aggregate table");
    charts->add_option("--table", table_file, "results.csv")->required();
    charts->add_option("--out", charts_out, "chart directory (default: <table dir>/charts)");

    std::vector<std::string> argv_store{"dglab"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : argv_store) argv.push_back(s.data());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        return report_error(err, "usage", "-", e.what(), exit_config);
    }

    try {
        if (*run) return cmd_run(run_config, sets, run_out, run_result, out);
        if (*bench) return cmd_benchmark(b, out, err);
        return cmd_charts(table_file, charts_out, out);
    } catch (const ConfigError& e) {
        return report_error(err, "config", e.key(), e.what(), exit_config);
    } catch (const DataError& e) {
        return report_error(err, "data", "-", e.what(), exit_runtime);
    } catch (const NumericError& e) {
        return report_error(err, "numeric", "-", e.what(), exit_runtime);
    } catch (const std::exception& e) {
        return report_error(err, "runtime", "-", e.what(), exit_runtime);
    }
}

}  // namespace dglab::cli
