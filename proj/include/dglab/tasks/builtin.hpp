#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "dglab/error.hpp"
#include "dglab/rng.hpp"
#include "dglab/tasks/task.hpp"

namespace dglab {

enum class BuiltinKind { spurious_blobs, rotated_moons };

inline const char* to_string(BuiltinKind k) {
    return k == BuiltinKind::spurious_blobs ? "spurious_blobs" : "rotated_moons";
}

inline BuiltinKind parse_builtin_kind(std::string_view name) {
    if (name == "spurious_blobs") return BuiltinKind::spurious_blobs;
    if (name == "rotated_moons") return BuiltinKind::rotated_moons;
    throw ConfigError("task", "unknown builtin task '" + std::string(name) +
                                  "'; known: spurious_blobs, rotated_moons");
}

/// Settings for both builtin tasks; each kind reads the fields it needs.
struct BuiltinParams {
    std::size_t n_per_domain = 500;
    double val_fraction = 0.2;

    // spurious_blobs
    std::size_t n_train_domains = 3;
    std::size_t n_test_domains = 1;
    double mu_inv = 1.0;
    double sigma_inv = 1.0;
    double mu_sp = 2.0;
    double sigma_sp = 0.3;
    double spurious_shift = 1.0;

    // rotated_moons
    std::vector<double> angles_deg{0.0, 30.0, 60.0};
    double moon_noise = 0.1;
};

/// Binary task with features (x0, x1, x2). x0 and x1 are invariant Gaussian
/// blobs centered at +-mu_inv. x2 is spurious: s * rho * mu_sp + offset +
/// N(0, sigma_sp) with s = 2y - 1, rho = +1 in training domains and -1 in test
/// domains. Training domain k adds offset spurious_shift * (k - (K - 1) / 2)
/// so domains are distinguishable only through the spurious coordinate.
/// Domains are named env0..envN with the test domains last.
inline Task make_spurious_blobs(const BuiltinParams& p, std::uint64_t seed) {
    if (!(p.sigma_inv > 0.0 && p.sigma_sp > 0.0))
        throw ConfigError("task_params", "spurious_blobs needs positive sigma_inv and sigma_sp");
    if (!(p.mu_sp / p.sigma_sp > p.mu_inv / p.sigma_inv))
        throw ConfigError("task_params",
                          "spurious_blobs requires the spurious margin mu_sp/sigma_sp to exceed the "
                          "invariant margin mu_inv/sigma_inv");
    if (p.n_per_domain < 2) throw ConfigError("task_params", "n_per_domain must be >= 2");
    if (p.n_train_domains < 1 || p.n_test_domains < 1)
        throw ConfigError("task_params", "spurious_blobs needs >= 1 training and >= 1 test domain");
    Rng rng(seed);
    std::vector<DomainDataset> domains;
    std::vector<std::string> tests;
    const std::size_t total = p.n_train_domains + p.n_test_domains;
    const double centre = (static_cast<double>(p.n_train_domains) - 1.0) / 2.0;
    for (std::size_t d = 0; d < total; ++d) {
        const bool is_test = d >= p.n_train_domains;
        const double rho = is_test ? -1.0 : 1.0;
        const double offset = is_test ? 0.0 : p.spurious_shift * (static_cast<double>(d) - centre);
        DomainDataset ds{"env" + std::to_string(d), Tensor::matrix(p.n_per_domain, 3), {}};
        ds.labels.resize(p.n_per_domain);
        for (std::size_t i = 0; i < p.n_per_domain; ++i) {
            const int y = static_cast<int>(rng.below(2));
            const double s = 2.0 * y - 1.0;
            ds.labels[i] = y;
            ds.features.at(i, 0) = rng.normal(s * p.mu_inv, p.sigma_inv);
            ds.features.at(i, 1) = rng.normal(s * p.mu_inv, p.sigma_inv);
            ds.features.at(i, 2) = s * rho * p.mu_sp + offset + rng.normal(0.0, p.sigma_sp);
        }
        if (is_test) tests.push_back(ds.name);
        domains.push_back(std::move(ds));
    }
    return Task("spurious_blobs", std::move(domains), std::move(tests), 2, p.val_fraction);
}

/// Two interleaved half circles; each domain rotates the whole picture by one
/// angle from `angles_deg`. Domains are named rot<angle>; the last is the test domain.
inline Task make_rotated_moons(const BuiltinParams& p, std::uint64_t seed) {
    if (p.angles_deg.size() < 2) throw ConfigError("task_params", "rotated_moons needs >= 2 angles");
    if (p.n_per_domain < 2) throw ConfigError("task_params", "n_per_domain must be >= 2");
    Rng rng(seed);
    std::vector<DomainDataset> domains;
    for (double angle : p.angles_deg) {
        const double rad = angle * std::numbers::pi / 180.0;
        const double c = std::cos(rad);
        const double s = std::sin(rad);
        char label[32];
        std::snprintf(label, sizeof label, "rot%g", angle);
        DomainDataset ds{label, Tensor::matrix(p.n_per_domain, 2), {}};
        ds.labels.resize(p.n_per_domain);
        for (std::size_t i = 0; i < p.n_per_domain; ++i) {
            const int y = static_cast<int>(rng.below(2));
            const double t = rng.uniform(0.0, std::numbers::pi);
            double x = y == 0 ? std::cos(t) : 1.0 - std::cos(t);
            double z = y == 0 ? std::sin(t) : 0.5 - std::sin(t);
            x += rng.normal(0.0, p.moon_noise) - 0.5;
            z += rng.normal(0.0, p.moon_noise) - 0.25;
            ds.labels[i] = y;
            ds.features.at(i, 0) = c * x - s * z;
            ds.features.at(i, 1) = s * x + c * z;
        }
        domains.push_back(std::move(ds));
    }
    std::vector<std::string> tests{domains.back().name};
    return Task("rotated_moons", std::move(domains), std::move(tests), 2, p.val_fraction);
}

inline Task builtin_task(BuiltinKind kind, const BuiltinParams& params, std::uint64_t seed) {
    switch (kind) {
        case BuiltinKind::spurious_blobs: return make_spurious_blobs(params, seed);
        case BuiltinKind::rotated_moons: return make_rotated_moons(params, seed);
    }
    throw ConfigError("task", "unknown builtin task");
}

}  // namespace dglab
