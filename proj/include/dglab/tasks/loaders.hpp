#pragma once

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dglab/error.hpp"
#include "dglab/tasks/task.hpp"

namespace dglab {

namespace fs = std::filesystem;

/// Parses one `.vec` sample: a single line of whitespace-separated decimals.
/// Blank trailing lines are tolerated; a second non-blank line is an error.
inline std::vector<double> read_vec_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError(path.string() + ": cannot open sample file");
    std::vector<double> values;
    std::string line;
    int line_no = 0;
    bool seen_data = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const bool blank = line.find_first_not_of(" \t") == std::string::npos;
        if (blank) continue;
        if (seen_data)
            throw DataError(path.string() + ":" + std::to_string(line_no) +
                            ": sample files hold exactly one line of numbers");
        seen_data = true;
        const char* p = line.data();
        const char* end = p + line.size();
        while (p < end) {
            while (p < end && (*p == ' ' || *p == '\t')) ++p;
            if (p == end) break;
            if (*p == '+') ++p;
            double v = 0.0;
            auto [next, ec] = std::from_chars(p, end, v);
            if (ec != std::errc{} || (next < end && *next != ' ' && *next != '\t') || !std::isfinite(v))
                throw DataError(path.string() + ":" + std::to_string(line_no) + ": malformed number '" +
                                std::string(p, std::find_if(p, end, [](char c) { return c == ' ' || c == '\t'; })) +
                                "'");
            values.push_back(v);
            p = next;
        }
    }
    if (values.empty()) throw DataError(path.string() + ":1: empty sample file");
    return values;
}

/// Writes one sample, creating parent directories as needed.
inline void write_vec_file(const fs::path& path, const std::vector<double>& values) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path);
    if (!out) throw DataError(path.string() + ": cannot write sample file");
    out.precision(17);
    for (std::size_t i = 0; i < values.size(); ++i) out << (i ? " " : "") << values[i];
    out << '\n';
}

namespace detail {

inline std::vector<std::string> sorted_subdirs(const fs::path& dir) {
    std::vector<std::string> out;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_directory()) out.push_back(entry.path().filename().string());
    std::sort(out.begin(), out.end());
    return out;
}

inline void append_sample(std::vector<double>& flat, std::size_t& dim, const std::vector<double>& sample,
                          const fs::path& path) {
    if (dim == 0) dim = sample.size();
    if (sample.size() != dim)
        throw DataError(path.string() + ": sample has " + std::to_string(sample.size()) +
                        " values, expected " + std::to_string(dim));
    flat.insert(flat.end(), sample.begin(), sample.end());
}

}  // namespace detail

/// Loads `root/<domain>/<class>/*.vec`. Class indices are the lexicographic
/// ranks of the class folder names, which must agree across domains.
inline Task task_from_folder(const fs::path& root, std::vector<std::string> test_domains,
                             double val_fraction = 0.2) {
    if (!fs::is_directory(root)) throw DataError(root.string() + ": task folder does not exist");
    const auto domain_names = detail::sorted_subdirs(root);
    if (domain_names.empty()) throw DataError(root.string() + ": no domain subfolders");
    std::vector<std::string> classes;
    std::vector<DomainDataset> domains;
    std::size_t dim = 0;
    for (const auto& domain : domain_names) {
        const auto domain_classes = detail::sorted_subdirs(root / domain);
        if (classes.empty()) {
            classes = domain_classes;
            if (classes.empty()) throw DataError("domain " + domain + " has no class folders");
        } else if (domain_classes != classes) {
            throw DataError("class set mismatch in domain " + domain);
        }
        std::vector<double> flat;
        std::vector<int> labels;
        for (std::size_t c = 0; c < classes.size(); ++c) {
            std::vector<fs::path> files;
            for (const auto& entry : fs::directory_iterator(root / domain / classes[c]))
                if (entry.is_regular_file() && entry.path().extension() == ".vec") files.push_back(entry.path());
            std::sort(files.begin(), files.end());
            for (const auto& f : files) {
                detail::append_sample(flat, dim, read_vec_file(f), f);
                labels.push_back(static_cast<int>(c));
            }
        }
        if (labels.empty()) throw DataError("domain " + domain + " is empty");
        const std::size_t n = labels.size();
        domains.push_back({domain, Tensor({n, dim}, std::move(flat)), std::move(labels)});
    }
    return Task(root.filename().string(), std::move(domains), std::move(test_domains),
                static_cast<int>(classes.size()), val_fraction);
}

/// Loads domains from index files with lines `<relative-path> <label>`.
/// `#` lines and blank lines are skipped. A path listed twice yields two samples.
inline Task task_from_pathfile(const std::vector<std::pair<std::string, fs::path>>& index_files,
                               const fs::path& base_dir, std::vector<std::string> test_domains,
                               int num_classes, double val_fraction = 0.2, std::string name = "pathfile") {
    std::vector<DomainDataset> domains;
    std::size_t dim = 0;
    for (const auto& [domain, index_path] : index_files) {
        std::ifstream in(index_path);
        if (!in) throw DataError(index_path.string() + ": cannot open index file");
        std::vector<double> flat;
        std::vector<int> labels;
        std::string line;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty() || line.front() == '#') continue;
            const auto where = index_path.string() + ":" + std::to_string(line_no);
            const auto space = line.rfind(' ');
            if (space == std::string::npos || space == 0)
                throw DataError(where + ": expected '<path> <label>'");
            const std::string rel = line.substr(0, space);
            const std::string label_text = line.substr(space + 1);
            int label = 0;
            auto [next, ec] = std::from_chars(label_text.data(), label_text.data() + label_text.size(), label);
            if (ec != std::errc{} || next != label_text.data() + label_text.size())
                throw DataError(where + ": label '" + label_text + "' is not an integer");
            if (label < 0 || label >= num_classes)
                throw DataError(where + ": label " + std::to_string(label) + " outside [0, " +
                                std::to_string(num_classes) + ")");
            const fs::path sample = base_dir / rel;
            if (!fs::is_regular_file(sample)) throw DataError(where + ": missing sample file " + sample.string());
            detail::append_sample(flat, dim, read_vec_file(sample), sample);
            labels.push_back(label);
        }
        if (labels.empty()) throw DataError("domain " + domain + " is empty");
        const std::size_t n = labels.size();
        domains.push_back({domain, Tensor({n, dim}, std::move(flat)), std::move(labels)});
    }
    return Task(std::move(name), std::move(domains), std::move(test_domains), num_classes, val_fraction);
}

}  // namespace dglab
