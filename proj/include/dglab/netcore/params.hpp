#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dglab/netcore/tensor.hpp"

namespace dglab {

struct Parameter {
    std::string name;
    Tensor value;
    Tensor grad;
    bool trainable = true;
};

/// Ordered, named parameters with a gradient buffer per parameter.
/// Iteration order is insertion order.
class ParamSet {
public:
    ParamSet() = default;
    explicit ParamSet(std::uint64_t seed) : seed_(seed) {}

    std::size_t add(std::string name, Tensor value) {
        Tensor grad(value.shape());
        params_.push_back({std::move(name), std::move(value), std::move(grad), true});
        return params_.size() - 1;
    }

    /// Appends all of `other` with names prefixed by `prefix`; returns the
    /// index of the first appended parameter.
    std::size_t append(const std::string& prefix, const ParamSet& other) {
        const std::size_t first = params_.size();
        for (const auto& p : other.params_)
            params_.push_back({prefix + p.name, p.value, p.grad, p.trainable});
        return first;
    }

    std::size_t size() const noexcept { return params_.size(); }
    Parameter& operator[](std::size_t i) noexcept { return params_[i]; }
    const Parameter& operator[](std::size_t i) const noexcept { return params_[i]; }

    auto begin() noexcept { return params_.begin(); }
    auto end() noexcept { return params_.end(); }
    auto begin() const noexcept { return params_.begin(); }
    auto end() const noexcept { return params_.end(); }

    std::optional<std::size_t> find(std::string_view name) const noexcept {
        for (std::size_t i = 0; i < params_.size(); ++i)
            if (params_[i].name == name) return i;
        return std::nullopt;
    }

    std::uint64_t seed() const noexcept { return seed_; }

    void zero_grad() noexcept {
        for (auto& p : params_) p.grad.fill(0.0);
    }

    std::size_t scalar_count() const noexcept {
        std::size_t n = 0;
        for (const auto& p : params_) n += p.value.size();
        return n;
    }

    std::vector<double> flat_values() const {
        std::vector<double> out;
        out.reserve(scalar_count());
        for (const auto& p : params_) out.insert(out.end(), p.value.values().begin(), p.value.values().end());
        return out;
    }

    std::vector<double> flat_grads() const {
        std::vector<double> out;
        out.reserve(scalar_count());
        for (const auto& p : params_) out.insert(out.end(), p.grad.values().begin(), p.grad.values().end());
        return out;
    }

    void set_flat_values(std::span<const double> flat) {
        if (flat.size() != scalar_count())
            throw NumericError("set_flat_values: expected " + std::to_string(scalar_count()) +
                               " values, got " + std::to_string(flat.size()));
        std::size_t k = 0;
        for (auto& p : params_)
            for (double& v : p.value.values()) v = flat[k++];
    }

    /// Offset of parameter `index` in the flat layout.
    std::size_t flat_offset(std::size_t index) const noexcept {
        std::size_t off = 0;
        for (std::size_t i = 0; i < index; ++i) off += params_[i].value.size();
        return off;
    }

    double grad_norm() const noexcept {
        double s = 0.0;
        for (const auto& p : params_)
            for (double g : p.grad.values()) s += g * g;
        return std::sqrt(s);
    }

private:
    std::vector<Parameter> params_;
    std::uint64_t seed_ = 0;
};

}  // namespace dglab
