#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "dglab/benchmark/executor.hpp"

namespace dglab {

/// In-memory copy of the delimited results table.
struct ResultTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::optional<std::size_t> column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        return std::nullopt;
    }
};

/// Fixed leading columns of results.csv; parameter columns follow in order of
/// first appearance over the job enumeration.
inline const std::vector<std::string>& fixed_columns() {
    static const std::vector<std::string> cols{"job_id",     "method",     "model",   "trainer",  "param_index",
                                               "seed_index", "seed",       "test_domain", "status", "val_acc",
                                               "test_acc",   "wall_time_s", "error"};
    return cols;
}

namespace csv {

inline std::string quote(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

inline std::string write(const ResultTable& t) {
    std::string out;
    auto line = [&](const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) out += (i ? "," : "") + quote(fields[i]);
        out += "\n";
    };
    line(t.header);
    for (const auto& r : t.rows) line(r);
    return out;
}

/// RFC 4180 reader. Rows whose width differs from the header are rejected.
inline ResultTable read(const std::string& text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> rec;
    std::string field;
    bool quoted = false, any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        if (c == '"') {
            quoted = true;
            any = true;
        } else if (c == ',') {
            rec.push_back(std::move(field));
            field.clear();
            any = true;
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            if (any || !field.empty()) {
                rec.push_back(std::move(field));
                records.push_back(std::move(rec));
            }
            rec.clear();
            field.clear();
            any = false;
        } else {
            field += c;
            any = true;
        }
    }
    if (quoted) throw DataError("unterminated quoted field in table");
    if (any || !field.empty()) {
        rec.push_back(std::move(field));
        records.push_back(std::move(rec));
    }
    ResultTable t;
    if (records.empty()) return t;
    t.header = std::move(records.front());
    for (std::size_t i = 1; i < records.size(); ++i) {
        if (records[i].size() != t.header.size())
            throw DataError("table line " + std::to_string(i + 1) + " has " + std::to_string(records[i].size()) +
                            " fields, header has " + std::to_string(t.header.size()));
        t.rows.push_back(std::move(records[i]));
    }
    return t;
}

}  // namespace csv

inline ResultTable make_table(const std::vector<ResultRow>& rows) {
    ResultTable t;
    t.header = fixed_columns();
    std::vector<std::string> params;
    for (const auto& r : rows)
        for (const auto& [k, v] : r.params)
            if (std::find(params.begin(), params.end(), k) == params.end()) params.push_back(k);
    t.header.insert(t.header.end(), params.begin(), params.end());
    auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
    for (const auto& r : rows) {
        std::vector<std::string> line{r.job_id,
                                      r.method,
                                      r.model,
                                      r.trainer,
                                      std::to_string(r.param_index),
                                      std::to_string(r.seed_index),
                                      std::to_string(r.seed),
                                      r.test_domain,
                                      to_string(r.status),
                                      r.status == RunStatus::ok ? opt(r.val_acc) : "",
                                      r.status == RunStatus::ok ? opt(r.mean_test_acc()) : "",
                                      opt(r.wall_time_s),
                                      r.error};
        for (const auto& p : params) {
            const ParamValue* v = find_param(r.params, p);
            line.push_back(v ? to_string(*v) : "");
        }
        t.rows.push_back(std::move(line));
    }
    return t;
}

inline fs::path table_path(const fs::path& out_dir) { return out_dir / "results.csv"; }

/// Reads the job manifest and every result file, and writes results.csv.
/// Missing or unreadable results become failed rows with a warning.
inline ResultTable aggregate(const fs::path& out_dir, std::ostream* warnings = nullptr) {
    const auto text = read_text(manifest_path(out_dir));
    if (!text) throw Error("no job manifest in " + out_dir.string());
    Json manifest;
    try {
        manifest = Json::parse(*text);
    } catch (const Json::exception& e) {
        throw DataError("corrupt job manifest " + manifest_path(out_dir).string() + ": " + e.what());
    }
    std::vector<ResultRow> rows;
    for (const auto& m : manifest) {
        ResultRow r;
        r.job_id = m.at("id").get<std::string>();
        r.method = m.at("method").get<std::string>();
        r.model = m.at("model").get<std::string>();
        r.trainer = m.at("trainer").get<std::string>();
        r.param_index = m.at("param_index").get<std::size_t>();
        r.seed_index = m.at("seed_index").get<std::size_t>();
        r.seed = m.at("seed").get<std::uint64_t>();
        r.test_domain = m.at("test_domain").get<std::string>();
        for (const auto& [k, v] : m.at("params").items()) r.params.emplace_back(k, param_from_json(v));
        const fs::path path = result_path(out_dir, r.job_id);
        if (auto doc = read_result(path)) {
            fill_from_result(r, *doc);
            r.wall_time_s = read_wall_time(path);
        } else {
            r.status = RunStatus::failed;
            r.error = fs::exists(path) ? "unreadable result file" : "missing result file";
            if (warnings) *warnings << "warning: " << r.error << " " << path.string() << "\n";
        }
        rows.push_back(std::move(r));
    }
    ResultTable t = make_table(rows);
    write_atomic(table_path(out_dir), csv::write(t));
    return t;
}

inline ResultTable read_table(const fs::path& path) {
    const auto text = read_text(path);
    if (!text) throw ConfigError("table", "cannot read table " + path.string());
    return csv::read(*text);
}

}  // namespace dglab
