#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <vector>

#include "dglab/error.hpp"
#include "dglab/models/model.hpp"
#include "dglab/trainers/config.hpp"

namespace dglab {

// ---------------------------------------------------------------- DIAL

/// Iterated sign-gradient ascent on the class loss, projected back into the
/// l-infinity ball of radius epsilon around the clean inputs.
inline Tensor dial_adversarial_inputs(const Model& model, const ParamSet& theta, const Batch& batch,
                                      const DialConfig& cfg) {
    Batch adv = batch;
    const double step = cfg.resolved_step();
    for (int k = 0; k < cfg.n_steps; ++k) {
        Tensor d_x;
        model.class_loss(theta, adv, 1.0, nullptr, &d_x);
        for (std::size_t i = 0; i < adv.x.size(); ++i) {
            const double g = d_x[i];
            const double sign = g > 0.0 ? 1.0 : (g < 0.0 ? -1.0 : 0.0);
            const double moved = adv.x[i] + step * sign;
            adv.x[i] = std::clamp(moved, batch.x[i] - cfg.epsilon, batch.x[i] + cfg.epsilon);
        }
    }
    return std::move(adv.x);
}

/// Mean class loss on adversarial copies of `batches`. Gradients (scaled by
/// gamma / |batches|) flow through the parameters of the adversarial forward
/// pass only; the construction of x' is treated as constant.
inline RegTerm dial_regularizer(const Model& model, const ParamSet& theta, std::span<const Batch> batches,
                                const DialConfig& cfg, double gamma, ParamSet* grads) {
    const double share = 1.0 / static_cast<double>(batches.size());
    double value = 0.0;
    for (const Batch& b : batches) {
        Batch adv{dial_adversarial_inputs(model, theta, b, cfg), b.y, b.domain};
        value += share * model.class_loss(theta, adv, gamma * share, grads);
    }
    return {"dial", value, gamma};
}

// ---------------------------------------------------------------- MLDG

/// Index of the meta-target domain at a given step.
inline std::size_t mldg_holdout(std::size_t step, std::size_t n_domains) noexcept { return step % n_domains; }

/// First-order meta-learning term. The meta-target domain rotates with the
/// step index; the remaining domains form the meta-source. A virtual step
/// theta' = theta - inner_lr * grad l_S(theta) is taken on a copy, the value is
/// l_T(theta'), and gamma * grad l_T(theta') is added to the gradients of theta.
inline RegTerm mldg_regularizer(const Model& model, const ParamSet& theta, std::span<const Batch> per_domain,
                                std::size_t step, double inner_lr, double gamma, ParamSet* grads) {
    if (per_domain.size() < 2) throw ConfigError("trainer", "mldg requires >= 2 training domains");
    const std::size_t target = mldg_holdout(step, per_domain.size());
    const double source_share = 1.0 / static_cast<double>(per_domain.size() - 1);

    ParamSet virtual_theta = theta;
    virtual_theta.zero_grad();
    for (std::size_t d = 0; d < per_domain.size(); ++d)
        if (d != target) model.class_loss(theta, per_domain[d], source_share, &virtual_theta);
    for (auto& p : virtual_theta) p.value.add_scaled(p.grad, -inner_lr);

    if (grads == nullptr) return {"mldg", model.class_loss(virtual_theta, per_domain[target], 1.0, nullptr), gamma};

    // The gradient is taken at theta' and applied to theta.
    ParamSet meta_grad = virtual_theta;
    meta_grad.zero_grad();
    const double value = model.class_loss(virtual_theta, per_domain[target], gamma, &meta_grad);
    for (std::size_t k = 0; k < grads->size(); ++k) (*grads)[k].grad += meta_grad[k].grad;
    return {"mldg", value, gamma};
}

/// Meta-source batches used for the model loss when mldg is in the chain.
inline std::vector<Batch> mldg_sources(std::span<const Batch> per_domain, std::size_t step) {
    const std::size_t target = mldg_holdout(step, per_domain.size());
    std::vector<Batch> out;
    for (std::size_t d = 0; d < per_domain.size(); ++d)
        if (d != target) out.push_back(per_domain[d]);
    return out;
}

// ---------------------------------------------------------------- Fishr

/// Element-wise population variance of per-sample class-head gradients.
inline std::vector<double> fishr_gradient_variance(const Model& model, const ParamSet& theta, const Batch& batch) {
    if (batch.size() < 2)
        throw NumericError("fishr needs at least 2 samples per domain batch (domain " +
                           std::to_string(batch.domain) + " has " + std::to_string(batch.size()) + ")");
    const auto grads = model.per_sample_head_grads(theta, batch);
    const std::size_t dim = grads.front().size();
    const double inv_n = 1.0 / static_cast<double>(grads.size());
    std::vector<double> mean(dim, 0.0), var(dim, 0.0);
    for (const auto& g : grads)
        for (std::size_t j = 0; j < dim; ++j) mean[j] += g[j] * inv_n;
    for (const auto& g : grads)
        for (std::size_t j = 0; j < dim; ++j) {
            const double d = g[j] - mean[j];
            var[j] += d * d * inv_n;
        }
    return var;
}

/// (1/|D|) sum_d ||v_d - mean_d v_d||^2.
inline double fishr_penalty(const std::vector<std::vector<double>>& variances) {
    if (variances.empty()) return 0.0;
    const std::size_t dim = variances.front().size();
    const double inv_d = 1.0 / static_cast<double>(variances.size());
    std::vector<double> centre(dim, 0.0);
    for (const auto& v : variances)
        for (std::size_t j = 0; j < dim; ++j) centre[j] += v[j] * inv_d;
    double total = 0.0;
    for (const auto& v : variances) {
        double sq = 0.0;
        for (std::size_t j = 0; j < dim; ++j) sq += (v[j] - centre[j]) * (v[j] - centre[j]);
        total += sq;
    }
    return total * inv_d;
}

/// Running averages of per-domain variances, keyed by training-domain id.
struct FishrState {
    std::map<int, std::vector<double>> ema;
};

namespace detail {

inline std::vector<std::vector<double>> fishr_smoothed(const Model& model, const ParamSet& theta,
                                                       std::span<const Batch> batches, const FishrState& state,
                                                       double decay, std::vector<std::vector<double>>* raw) {
    std::vector<std::vector<double>> out;
    for (const Batch& b : batches) {
        std::vector<double> v = fishr_gradient_variance(model, theta, b);
        if (raw != nullptr) raw->push_back(v);
        if (auto it = state.ema.find(b.domain); it != state.ema.end())
            for (std::size_t j = 0; j < v.size(); ++j) v[j] = decay * it->second[j] + (1.0 - decay) * v[j];
        out.push_back(std::move(v));
    }
    return out;
}

}  // namespace detail

/// Penalty value after smoothing with `state` (the first observation of a
/// domain is used as-is).
inline double fishr_value(const Model& model, const ParamSet& theta, std::span<const Batch> batches,
                          const FishrConfig& cfg, const FishrState& state) {
    return fishr_penalty(detail::fishr_smoothed(model, theta, batches, state, cfg.ema_decay, nullptr));
}

/// Variance-matching term on the class-head parameters. Its gradient is
/// obtained by central differences of the penalty with respect to each head
/// parameter (the smoothing state held fixed) and added, times gamma, to
/// `grads`. `state` is advanced with this step's raw variances.
inline RegTerm fishr_regularizer(const Model& model, const ParamSet& theta, std::span<const Batch> batches,
                                 const FishrConfig& cfg, double gamma, FishrState& state, ParamSet* grads) {
    if (batches.size() < 2) throw ConfigError("trainer", "fishr requires >= 2 training domains");
    std::vector<std::vector<double>> raw;
    const double value =
        fishr_penalty(detail::fishr_smoothed(model, theta, batches, state, cfg.ema_decay, &raw));
    if (grads != nullptr) {
        ParamSet probe = theta;
        for (std::size_t k : model.class_head_params()) {
            for (std::size_t i = 0; i < probe[k].value.size(); ++i) {
                const double saved = probe[k].value[i];
                probe[k].value[i] = saved + cfg.fd_epsilon;
                const double up = fishr_value(model, probe, batches, cfg, state);
                probe[k].value[i] = saved - cfg.fd_epsilon;
                const double down = fishr_value(model, probe, batches, cfg, state);
                probe[k].value[i] = saved;
                (*grads)[k].grad[i] += gamma * (up - down) / (2.0 * cfg.fd_epsilon);
            }
        }
    }
    for (std::size_t i = 0; i < batches.size(); ++i) {
        auto [it, fresh] = state.ema.try_emplace(batches[i].domain, raw[i]);
        if (!fresh)
            for (std::size_t j = 0; j < raw[i].size(); ++j)
                it->second[j] = cfg.ema_decay * it->second[j] + (1.0 - cfg.ema_decay) * raw[i][j];
    }
    return {"fishr", value, gamma};
}

}  // namespace dglab
