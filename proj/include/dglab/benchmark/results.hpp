#pragma once

#include <nlohmann/json.hpp>

#include <atomic>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include "dglab/benchmark/sampling.hpp"
#include "dglab/error.hpp"
#include "dglab/experiment/experiment.hpp"

namespace dglab {

using Json = nlohmann::ordered_json;

/// Writes to a sibling temporary file and renames it into place, so readers
/// never observe a partial file.
inline void write_atomic(const fs::path& path, const std::string& text) {
    static std::atomic<unsigned> counter{0};
    std::ostringstream tmp_name;
    tmp_name << path.filename().string() << ".tmp" << std::this_thread::get_id() << "." << counter++;
    const fs::path tmp = path.parent_path() / tmp_name.str();
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << text;
        out.flush();
        if (!out) throw Error("cannot write " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw Error("cannot move result into place at " + path.string());
    }
}

inline std::optional<std::string> read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline Json to_json(const ParamValue& v) {
    if (const double* d = std::get_if<double>(&v)) return *d;
    return std::get<std::string>(v);
}

inline ParamValue param_from_json(const Json& j) {
    if (j.is_number()) return j.get<double>();
    return j.get<std::string>();
}

/// Result document of one run. Wall time is kept out of it so reruns
/// produce identical files; see `wall_time_path`.
inline Json result_json(const RunResult& r, const std::string& config_text) {
    Json j;
    j["status"] = "ok";
    j["model"] = r.model;
    j["trainer"] = r.trainer;
    j["seed"] = r.seed;
    j["epochs_run"] = r.epochs_run;
    j["selected_epoch"] = r.selected_epoch;
    j["val_acc"] = r.val_accuracy;
    Json test = Json::array();
    for (const auto& d : r.test_accuracy) test.push_back({{"domain", d.domain}, {"acc", d.accuracy}});
    j["test_acc"] = test;
    Json hist = Json::array();
    for (const auto& h : r.history)
    {
        Json e;
        e["epoch"] = h.epoch;
        e["loss"] = h.mean_loss.total;
        e["task_loss"] = h.mean_loss.task_loss;
        for (const auto& t : h.mean_loss.reg_terms) e["reg:" + t.name] = t.value;
        e["val_acc"] = h.val_accuracy;
        hist.push_back(std::move(e));
    }
    j["history"] = hist;
    j["config"] = config_text;
    return j;
}

inline Json failure_json(const std::string& error, const std::string& config_text) {
    Json j;
    j["status"] = "failed";
    j["error"] = error;
    j["config"] = config_text;
    return j;
}

inline fs::path wall_time_path(const fs::path& result_path) {
    return result_path.parent_path() / (result_path.filename().string() + ".time");
}

inline void write_result(const fs::path& path, const Json& doc, std::optional<double> wall_time_s) {
    write_atomic(path, doc.dump(2) + "\n");
    if (wall_time_s) write_atomic(wall_time_path(path), format_number(*wall_time_s) + "\n");
}

/// Parsed result file, or nullopt when missing or unreadable.
inline std::optional<Json> read_result(const fs::path& path) {
    auto text = read_text(path);
    if (!text) return std::nullopt;
    try {
        Json j = Json::parse(*text);
        if (!j.is_object() || !j.contains("status")) return std::nullopt;
        if (j["status"] == "ok" && !(j.contains("val_acc") && j.contains("test_acc"))) return std::nullopt;
        return j;
    } catch (const Json::exception&) {
        return std::nullopt;
    }
}

inline std::optional<double> read_wall_time(const fs::path& result_path) {
    auto text = read_text(wall_time_path(result_path));
    if (!text) return std::nullopt;
    const auto v = parse_param_value(text->substr(0, text->find_first_of("\r\n")));
    if (const double* d = std::get_if<double>(&v)) return *d;
    return std::nullopt;
}

}  // namespace dglab
