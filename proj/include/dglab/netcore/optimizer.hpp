#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "dglab/error.hpp"
#include "dglab/netcore/params.hpp"

namespace dglab {

enum class OptimizerKind { sgd, adam };

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::adam;
    double learning_rate = 1e-3;
    double momentum = 0.0;  // sgd
    double beta1 = 0.9;     // adam
    double beta2 = 0.999;   // adam
    double epsilon = 1e-8;  // adam

    void validate() const {
        if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
            throw ConfigError("lr", "learning rate must be a finite non-negative number");
        auto unit = [](double v) { return v >= 0.0 && v < 1.0; };
        if (!unit(momentum)) throw ConfigError("momentum", "momentum must lie in [0, 1)");
        if (!unit(beta1) || !unit(beta2)) throw ConfigError("optimizer", "adam betas must lie in [0, 1)");
    }
};

/// SGD with heavy-ball momentum, or Adam with bias correction. Moment buffers
/// are created lazily to match the parameter shapes on the first step.
class Optimizer {
public:
    Optimizer() = default;
    explicit Optimizer(OptimizerConfig cfg) : cfg_(cfg) { cfg_.validate(); }

    const OptimizerConfig& config() const noexcept { return cfg_; }
    double learning_rate() const noexcept { return cfg_.learning_rate; }
    long steps() const noexcept { return t_; }

    void step(ParamSet& params) {
        for (const auto& p : params)
            if (!p.grad.all_finite()) throw NumericError("non-finite gradient in parameter " + p.name);
        if (first_.size() != params.size()) {
            first_.clear();
            second_.clear();
            for (const auto& p : params) {
                first_.emplace_back(p.value.shape());
                second_.emplace_back(p.value.shape());
            }
        }
        ++t_;
        const double lr = cfg_.learning_rate;
        if (cfg_.kind == OptimizerKind::sgd) {
            for (std::size_t k = 0; k < params.size(); ++k) {
                auto& p = params[k];
                if (!p.trainable) continue;
                Tensor& m = first_[k];
                for (std::size_t i = 0; i < p.value.size(); ++i) {
                    m[i] = cfg_.momentum * m[i] + p.grad[i];
                    p.value[i] -= lr * m[i];
                }
            }
            return;
        }
        const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
        for (std::size_t k = 0; k < params.size(); ++k) {
            auto& p = params[k];
            if (!p.trainable) continue;
            Tensor& m = first_[k];
            Tensor& v = second_[k];
            for (std::size_t i = 0; i < p.value.size(); ++i) {
                const double g = p.grad[i];
                m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g;
                v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g * g;
                const double m_hat = m[i] / c1;
                const double v_hat = v[i] / c2;
                p.value[i] -= lr * m_hat / (std::sqrt(v_hat) + cfg_.epsilon);
            }
        }
    }

private:
    OptimizerConfig cfg_;
    std::vector<Tensor> first_;
    std::vector<Tensor> second_;
    long t_ = 0;
};

}  // namespace dglab
