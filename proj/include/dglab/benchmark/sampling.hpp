#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <system_error>
#include <utility>
#include <variant>
#include <vector>

#include "dglab/error.hpp"
#include "dglab/rng.hpp"

namespace dglab {

/// A sampled hyperparameter value: numeric or a categorical label.
using ParamValue = std::variant<double, std::string>;

/// Ordered name -> value bindings. Order is declaration order.
using ParamMap = std::vector<std::pair<std::string, ParamValue>>;

/// Shortest decimal text that reads back to the same double; fixed notation
/// for magnitudes in [1e-4, 1e16).
inline std::string format_number(double v) {
    char buf[64];
    const double a = std::abs(v);
    const bool fixed = a == 0.0 || (a >= 1e-4 && a < 1e16);
    auto [end, ec] = fixed ? std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed)
                           : std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) throw Error("cannot format number");
    return std::string(buf, end);
}

inline std::string to_string(const ParamValue& v) {
    if (const double* d = std::get_if<double>(&v)) return format_number(*d);
    return std::get<std::string>(v);
}

/// Reads a scalar as a number when the whole text is numeric, else as a label.
inline ParamValue parse_param_value(const std::string& text) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    if (!text.empty() && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec == std::errc{} && ptr == last && std::isfinite(v)) return v;
    return text;
}

inline const ParamValue* find_param(const ParamMap& m, const std::string& name) {
    for (const auto& [k, v] : m)
        if (k == name) return &v;
    return nullptr;
}

enum class DistKind { uniform, loguniform, int_uniform, categorical, grid_list };

inline const char* to_string(DistKind k) {
    switch (k) {
        case DistKind::uniform: return "uniform";
        case DistKind::loguniform: return "loguniform";
        case DistKind::int_uniform: return "int_uniform";
        case DistKind::categorical: return "categorical";
        case DistKind::grid_list: return "grid_list";
    }
    return "?";
}

inline DistKind parse_dist_kind(const std::string& s, const std::string& key) {
    for (DistKind k : {DistKind::uniform, DistKind::loguniform, DistKind::int_uniform, DistKind::categorical,
                       DistKind::grid_list})
        if (s == to_string(k)) return k;
    throw ConfigError(key, key + ": unknown distribution '" + s +
                               "' (uniform, loguniform, int_uniform, categorical, grid_list)");
}

/// One hyperparameter axis. `num` is the point count used when a continuous
/// axis takes part in a grid.
struct ParamDistribution {
    std::string name;
    DistKind kind = DistKind::uniform;
    double lo = 0.0;
    double hi = 1.0;
    std::vector<ParamValue> values;  // categorical, grid_list
    std::optional<double> step;
    std::optional<std::size_t> num;

    bool continuous() const noexcept {
        return kind == DistKind::uniform || kind == DistKind::loguniform || kind == DistKind::int_uniform;
    }

    /// `where` prefixes error keys, e.g. "methods.dann.hyperparams.gamma_reg".
    void validate(const std::string& where) const {
        if (continuous()) {
            if (!(lo < hi) && !(kind == DistKind::int_uniform && lo == hi))
                throw ConfigError(where, where + ": requires lo<hi");
            if (kind == DistKind::loguniform && !(lo > 0)) throw ConfigError(where, "loguniform requires lo>0");
            if (kind == DistKind::int_uniform && (lo != std::floor(lo) || hi != std::floor(hi)))
                throw ConfigError(where, where + ": int_uniform bounds must be integers");
        } else if (values.empty()) {
            throw ConfigError(where, where + ": " + to_string(kind) + " needs a nonempty value list");
        }
        if (step && !(*step > 0)) throw ConfigError(where, where + ": step must be > 0");
        if (num && *num == 0) throw ConfigError(where, where + ": grid axis with zero points");
    }

    /// Nearest multiple of `step`, kept inside [lo, hi].
    double round_to_step(double v) const {
        if (!step) return v;
        const double s = *step;
        double r = std::round(v / s) * s;
        if (r < lo) r = std::ceil(lo / s) * s;
        if (r > hi) r = std::floor(hi / s) * s;
        return r;
    }

    ParamValue draw(Rng& rng) const {
        switch (kind) {
            case DistKind::uniform:
                return round_to_step(lo + (hi - lo) * rng.uniform());
            case DistKind::loguniform:
                return round_to_step(std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * rng.uniform()));
            case DistKind::int_uniform: {
                const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
                return round_to_step(lo + static_cast<double>(rng.below(span)));
            }
            case DistKind::categorical:
            case DistKind::grid_list:
                return values[rng.below(values.size())];
        }
        return 0.0;
    }

    /// Points of this axis in a grid. Continuous axes use an
    /// endpoint-inclusive even spacing of `num` points.
    std::vector<ParamValue> grid_points() const {
        if (!continuous()) return values;
        if (!num) throw ConfigError(name, name + ": grid over a " + std::string(to_string(kind)) +
                                              " axis needs 'num' points");
        std::vector<ParamValue> out;
        const std::size_t n = *num;
        for (std::size_t i = 0; i < n; ++i) {
            const double t = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
            double v = kind == DistKind::loguniform ? std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo)))
                                                    : lo + t * (hi - lo);
            if (i == n - 1 && n > 1) v = hi;
            if (kind == DistKind::int_uniform) v = std::round(v);
            out.emplace_back(round_to_step(v));
        }
        return out;
    }
};

/// n independent draws; within a draw the axes are visited in list order.
inline std::vector<ParamMap> sample_params(const std::vector<ParamDistribution>& dists, std::size_t n,
                                           std::uint64_t seed) {
    if (n == 0) throw ConfigError("n_param_samples", "n_param_samples must be >= 1");
    Rng rng(seed);
    std::vector<ParamMap> out(n);
    for (auto& m : out)
        for (const auto& d : dists) m.emplace_back(d.name, d.draw(rng));
    return out;
}

/// Cartesian product, row-major with the first axis slowest.
inline std::vector<ParamMap> grid_params(const std::vector<ParamDistribution>& dists) {
    std::vector<std::vector<ParamValue>> axes;
    std::size_t total = 1;
    for (const auto& d : dists) {
        axes.push_back(d.grid_points());
        if (axes.back().empty()) throw ConfigError(d.name, d.name + ": grid axis with zero points");
        total *= axes.back().size();
    }
    std::vector<ParamMap> out;
    out.reserve(total);
    std::vector<std::size_t> idx(axes.size(), 0);
    for (std::size_t k = 0; k < total; ++k) {
        ParamMap m;
        for (std::size_t a = 0; a < axes.size(); ++a) m.emplace_back(dists[a].name, axes[a][idx[a]]);
        out.push_back(std::move(m));
        for (std::size_t a = axes.size(); a-- > 0;) {
            if (++idx[a] < axes[a].size()) break;
            idx[a] = 0;
        }
    }
    return out;
}

/// Seed for a method's private draws.
inline std::uint64_t method_seed(std::uint64_t seed, const std::string& method) {
    return derive_seed(seed, fnv1a(method));
}

/// Seed for the shared pool.
inline std::uint64_t pool_seed(std::uint64_t seed) { return derive_seed(seed, fnv1a("shared pool")); }

/// Method request against a shared pool.
struct PoolRequest {
    std::string method;
    std::vector<std::string> shared;             // names taken from the pool
    std::vector<ParamDistribution> private_dists;
    std::size_t take = 1;
};

/// Samples the pool once; the i-th sample of every method binds its shared
/// names to pool[i] and then its private axes from a method-specific stream.
inline std::map<std::string, std::vector<ParamMap>> shared_pool(const std::vector<ParamDistribution>& shared_dists,
                                                                std::size_t pool_size, std::uint64_t seed,
                                                                const std::vector<PoolRequest>& requests) {
    const std::vector<ParamMap> pool = sample_params(shared_dists, pool_size, pool_seed(seed));
    std::map<std::string, std::vector<ParamMap>> out;
    for (const auto& req : requests) {
        if (req.take > pool_size)
            throw ConfigError("shared.pool_size", "method " + req.method + " takes " + std::to_string(req.take) +
                                                      " samples but the shared pool holds " +
                                                      std::to_string(pool_size));
        for (const auto& name : req.shared) {
            bool declared = false;
            for (const auto& d : shared_dists) declared |= d.name == name;
            if (!declared)
                throw ConfigError("methods." + req.method + ".shared",
                                  "method " + req.method + " references undeclared shared parameter '" + name + "'");
        }
        std::vector<ParamMap> priv = req.private_dists.empty()
                                         ? std::vector<ParamMap>(req.take)
                                         : sample_params(req.private_dists, req.take, method_seed(seed, req.method));
        auto& seq = out[req.method];
        for (std::size_t i = 0; i < req.take; ++i) {
            ParamMap m;
            for (const auto& name : req.shared) m.emplace_back(name, *find_param(pool[i], name));
            for (auto& kv : priv[i]) m.push_back(std::move(kv));
            seq.push_back(std::move(m));
        }
    }
    return out;
}

}  // namespace dglab
