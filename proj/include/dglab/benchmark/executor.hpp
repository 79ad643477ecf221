#pragma once

#include <algorithm>
#include <atomic>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "dglab/benchmark/jobs.hpp"
#include "dglab/benchmark/results.hpp"

namespace dglab {

enum class RunStatus { ok, failed };

inline const char* to_string(RunStatus s) { return s == RunStatus::ok ? "ok" : "failed"; }

/// One line of the aggregate table.
struct ResultRow {
    std::string job_id;
    std::string method;
    std::string model;
    std::string trainer;
    std::size_t param_index = 0;
    std::size_t seed_index = 0;
    std::uint64_t seed = 0;
    std::string test_domain;
    ParamMap params;
    RunStatus status = RunStatus::failed;
    std::optional<double> val_acc;
    std::vector<DomainAccuracy> test_acc;
    std::optional<double> wall_time_s;
    std::string error;

    /// Mean over the job's test domains.
    std::optional<double> mean_test_acc() const {
        if (test_acc.empty()) return std::nullopt;
        double s = 0.0;
        for (const auto& d : test_acc) s += d.accuracy;
        return s / static_cast<double>(test_acc.size());
    }
};

inline ResultRow row_identity(const JobSpec& j) {
    ResultRow r;
    r.job_id = j.id();
    r.method = j.method;
    r.model = j.model;
    r.trainer = j.trainer;
    r.param_index = j.param_index;
    r.seed_index = j.seed_index;
    r.seed = j.seed;
    r.test_domain = j.test_domain;
    r.params = j.params;
    return r;
}

/// Fills metrics from a result document. A document that does not fit the
/// expected shape marks the row failed.
inline void fill_from_result(ResultRow& row, const Json& doc) {
    try {
        if (doc.at("status") != "ok") {
            row.status = RunStatus::failed;
            row.error = doc.value("error", std::string("failed"));
            return;
        }
        row.val_acc = doc.at("val_acc").get<double>();
        row.test_acc.clear();
        for (const auto& t : doc.at("test_acc"))
            row.test_acc.push_back({t.at("domain").get<std::string>(), t.at("acc").get<double>()});
        if (row.test_domain.empty()) {
            for (const auto& t : row.test_acc) row.test_domain += (row.test_domain.empty() ? "" : "+") + t.domain;
        }
        row.status = RunStatus::ok;
    } catch (const Json::exception& e) {
        row.status = RunStatus::failed;
        row.val_acc.reset();
        row.test_acc.clear();
        row.error = std::string("malformed result: ") + e.what();
    }
}

inline fs::path results_dir(const fs::path& out_dir) { return out_dir / "results"; }
inline fs::path result_path(const fs::path& out_dir, const std::string& id) {
    return results_dir(out_dir) / (id + ".json");
}
inline fs::path manifest_path(const fs::path& out_dir) { return out_dir / "jobs.json"; }

/// Job list in enumeration order; the aggregation pass reads it back.
inline void write_manifest(const std::vector<JobSpec>& jobs, const fs::path& out_dir) {
    Json arr = Json::array();
    for (const auto& j : jobs) {
        Json params = Json::object();
        for (const auto& [k, v] : j.params) params[k] = to_json(v);
        arr.push_back({{"id", j.id()},
                       {"method", j.method},
                       {"model", j.model},
                       {"trainer", j.trainer},
                       {"param_index", j.param_index},
                       {"seed_index", j.seed_index},
                       {"seed", j.seed},
                       {"test_domain", j.test_domain},
                       {"params", params}});
    }
    write_atomic(manifest_path(out_dir), arr.dump(2) + "\n");
}

inline void ensure_writable_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw Error("output directory not writable: " + dir.string());
    const fs::path probe = dir / ".write_probe";
    {
        std::ofstream out(probe);
        if (!out) throw Error("output directory not writable: " + dir.string());
    }
    fs::remove(probe, ec);
}

struct ExecuteOptions {
    std::size_t workers = 1;
    bool force = false;
    std::function<void(const std::string&)> log;  // called under a lock
};

struct ExecutionReport {
    std::vector<ResultRow> rows;  // enumeration order
    std::size_t skipped = 0;
    std::size_t failed = 0;
};

/// Runs every job on a pool of worker threads. Each job writes its own result
/// file; a failing job is recorded and the batch continues. Jobs whose ok
/// result already exists for the same configuration are skipped unless forced.
inline ExecutionReport execute_local(const std::vector<JobSpec>& jobs, const fs::path& out_dir,
                                     const ExecuteOptions& opts = {}) {
    if (opts.workers == 0) throw ConfigError("workers", "workers must be >= 1");
    ensure_writable_dir(results_dir(out_dir));
    write_manifest(jobs, out_dir);

    std::vector<std::string> texts;
    texts.reserve(jobs.size());
    for (const auto& j : jobs) texts.push_back(j.config_text());

    ExecutionReport report;
    report.rows.resize(jobs.size());
    std::vector<char> skipped(jobs.size(), 0);
    std::mutex log_mutex;
    auto log = [&](const std::string& msg) {
        if (!opts.log) return;
        std::lock_guard<std::mutex> lock(log_mutex);
        opts.log(msg);
    };

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
            const JobSpec& job = jobs[i];
            ResultRow row = row_identity(job);
            const fs::path path = result_path(out_dir, row.job_id);
            if (!opts.force) {
                if (auto doc = read_result(path); doc && (*doc)["status"] == "ok" && (*doc)["config"] == texts[i]) {
                    fill_from_result(row, *doc);
                    row.wall_time_s = read_wall_time(path);
                    skipped[i] = 1;
                    report.rows[i] = std::move(row);
                    continue;
                }
            }
            const auto start = std::chrono::steady_clock::now();
            Json doc;
            try {
                const ExperimentConfig cfg = parse_experiment_config(YAML::Load(texts[i]), job.base_dir);
                doc = result_json(run_experiment(cfg), texts[i]);
            } catch (const std::exception& e) {
                doc = failure_json(e.what(), texts[i]);
            }
            const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            try {
                write_result(path, doc, wall);
            } catch (const std::exception& e) {
                doc = failure_json(e.what(), texts[i]);
            }
            fill_from_result(row, doc);
            row.wall_time_s = wall;
            log(std::string(to_string(row.status)) + " " + row.job_id +
                (row.status == RunStatus::ok ? "" : ": " + row.error));
            report.rows[i] = std::move(row);
        }
    };
    const std::size_t n_threads = std::min(opts.workers, std::max<std::size_t>(jobs.size(), 1));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    for (std::size_t i = 0; i < jobs.size(); ++i) {
        report.skipped += skipped[i];
        report.failed += report.rows[i].status == RunStatus::failed;
    }
    return report;
}

/// 0 when every row is ok, 3 otherwise.
inline int benchmark_exit_code(const std::vector<ResultRow>& rows) {
    for (const auto& r : rows)
        if (r.status != RunStatus::ok) return 3;
    return 0;
}

}  // namespace dglab
