#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dglab/error.hpp"
#include "dglab/models/loss_report.hpp"
#include "dglab/models/parts.hpp"
#include "dglab/netcore.hpp"
#include "dglab/rng.hpp"
#include "dglab/tasks/batching.hpp"

namespace dglab {

enum class ModelKind { erm, dann, diva };

inline const char* to_string(ModelKind k) noexcept {
    switch (k) {
        case ModelKind::erm: return "erm";
        case ModelKind::dann: return "dann";
        case ModelKind::diva: return "diva";
    }
    return "?";
}

/// Architecture and hyperparameters for a (possibly composed) model.
struct ModelConfig {
    std::vector<ModelKind> parts{ModelKind::erm};  // composition order
    std::size_t input_dim = 0;
    int num_classes = 2;
    int num_domains = 1;  // training domains, for domain heads

    std::vector<std::size_t> net_widths;      // hidden widths of the feature extractor
    std::size_t feature_dim = 8;              // extractor output unless a diva member fixes it
    std::vector<std::size_t> head_widths;     // hidden widths of class heads
    std::vector<std::size_t> net_widths_dom;  // hidden widths of domain heads
    Activation activation = Activation::relu;
    double init_scale = 1.0;

    double gamma_reg = 0.1;  // dann
    std::optional<double> gamma_y;
    std::optional<double> gamma_d;
    std::size_t zx_dim = 2;
    std::size_t zy_dim = 4;
    std::size_t zd_dim = 2;

    bool has(ModelKind k) const noexcept {
        for (auto p : parts)
            if (p == k) return true;
        return false;
    }

    /// Output width of the shared extractor.
    std::size_t extractor_dim() const noexcept {
        return has(ModelKind::diva) ? zx_dim + zy_dim + zd_dim : feature_dim;
    }

    std::string name() const {
        std::string s;
        for (std::size_t i = 0; i < parts.size(); ++i) s += (i ? "_" : "") + std::string(to_string(parts[i]));
        return s;
    }

    void validate() const {
        if (parts.empty()) throw ConfigError("model", "model composition is empty");
        if (input_dim < 1) throw ConfigError("input_dim", "input dimension must be >= 1");
        if (num_classes < 1) throw ConfigError("num_classes", "need at least one class");
        for (auto w : net_widths)
            if (w < 1) throw ConfigError("net_widths", "layer widths must be >= 1");
        for (auto w : net_widths_dom)
            if (w < 1) throw ConfigError("net_widths_dom", "layer widths must be >= 1");
        if (!has(ModelKind::diva) && feature_dim < 1)
            throw ConfigError("feature_dim", "feature_dim must be >= 1");
        if (has(ModelKind::dann)) {
            if (!(gamma_reg >= 0.0)) throw ConfigError("gamma_reg", "gamma_reg must be >= 0");
            if (num_domains < 2) throw ConfigError("model", "dann requires >= 2 training domains");
        }
        if (has(ModelKind::diva)) {
            if (!gamma_y) throw ConfigError("gamma_y", "diva requires gamma_y");
            if (!gamma_d) throw ConfigError("gamma_d", "diva requires gamma_d");
            if (!(*gamma_y > 0.0)) throw ConfigError("gamma_y", "gamma_y must be > 0");
            if (!(*gamma_d >= 0.0)) throw ConfigError("gamma_d", "gamma_d must be >= 0");
            if (zy_dim < 1) throw ConfigError("zy_dim", "zy_dim must be >= 1");
            if (zd_dim < 1) throw ConfigError("zd_dim", "zd_dim must be >= 1");
            if (num_domains < 2) throw ConfigError("model", "diva requires >= 2 training domains");
        }
    }
};

/// A shared feature extractor followed by one or more members. The first
/// member's class loss is the task loss l; every later member contributes
/// its own class loss as a regularizer with multiplier 1, then its
/// regularizers.
///
/// The model owns its parameters, but every computation also accepts an
/// explicit ParamSet so callers can evaluate virtual or perturbed weights.
class Model {
public:
    Model() = default;

    static Model build(const ModelConfig& cfg, std::uint64_t seed) {
        cfg.validate();
        Model m;
        m.cfg_ = cfg;
        m.params_ = ParamSet(seed);
        std::uint64_t stream = 0;
        auto add_net = [&](const std::string& prefix, std::vector<std::size_t> sizes) {
            MlpSpec spec{std::move(sizes), cfg.activation, cfg.init_scale, false};
            const std::size_t first = m.params_.append(prefix, mlp_init(spec, derive_seed(seed, stream++)));
            return Mlp(spec, first);
        };
        auto widths = [](std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out) {
            std::vector<std::size_t> s{in};
            s.insert(s.end(), hidden.begin(), hidden.end());
            s.push_back(out);
            return s;
        };
        const std::size_t feat = cfg.extractor_dim();
        const auto classes = static_cast<std::size_t>(cfg.num_classes);
        const auto domains = static_cast<std::size_t>(std::max(cfg.num_domains, 1));
        m.trunk_ = add_net("features.", widths(cfg.input_dim, cfg.net_widths, feat));
        for (std::size_t i = 0; i < cfg.parts.size(); ++i) {
            const std::string prefix = "m" + std::to_string(i) + "." + to_string(cfg.parts[i]) + ".";
            switch (cfg.parts[i]) {
                case ModelKind::erm:
                    m.parts_.push_back(std::make_shared<ErmPart>(
                        add_net(prefix + "cls.", widths(feat, cfg.head_widths, classes))));
                    break;
                case ModelKind::dann: {
                    Mlp cls = add_net(prefix + "cls.", widths(feat, cfg.head_widths, classes));
                    Mlp dom = add_net(prefix + "dom.", widths(feat, cfg.net_widths_dom, domains));
                    m.parts_.push_back(std::make_shared<DannPart>(std::move(cls), std::move(dom), cfg.gamma_reg));
                    break;
                }
                case ModelKind::diva: {
                    Mlp cls = add_net(prefix + "cls.", widths(cfg.zy_dim, cfg.head_widths, classes));
                    Mlp dom = add_net(prefix + "dom.", widths(cfg.zd_dim, cfg.net_widths_dom, domains));
                    Mlp dec = add_net(prefix + "dec.", widths(feat, {}, cfg.input_dim));
                    m.parts_.push_back(std::make_shared<DivaPart>(std::move(cls), std::move(dom), std::move(dec),
                                                                  cfg.zx_dim, cfg.zy_dim, cfg.zd_dim,
                                                                  *cfg.gamma_y, *cfg.gamma_d));
                    break;
                }
            }
        }
        return m;
    }

    const ModelConfig& config() const noexcept { return cfg_; }
    std::string name() const { return cfg_.name(); }
    ParamSet& params() noexcept { return params_; }
    const ParamSet& params() const noexcept { return params_; }
    const Mlp& extractor() const noexcept { return trunk_; }
    const std::vector<std::shared_ptr<const ModelPart>>& parts() const noexcept { return parts_; }

    Tensor features(const ParamSet& theta, const Tensor& x) const { return trunk_.logits(theta, x); }

    /// Full SRM decomposition for one batch; weighted gradients go to `grads`.
    LossReport compute(const ParamSet& theta, const Batch& batch, double weight, ParamSet* grads) const {
        const ActivationTrace trace = trunk_.forward(theta, batch.x);
        const bool want_grad = grads != nullptr;
        Tensor d_features;
        if (want_grad) d_features = Tensor(trace.logits.shape());
        LossReport report;
        for (std::size_t i = 0; i < parts_.size(); ++i) {
            PartOutput out = parts_[i]->evaluate(theta, trace.logits, batch, weight, grads,
                                                 want_grad ? &d_features : nullptr);
            if (i == 0) {
                report.task_loss = out.task_loss;
            } else {
                report.reg_terms.push_back({parts_[i]->kind() + "_task", out.task_loss, 1.0});
            }
            for (auto& r : out.regs) report.reg_terms.push_back(std::move(r));
        }
        if (want_grad) trunk_.backward(theta, trace, d_features, grads);
        report.finalize();
        return report;
    }

    /// Uses and accumulates into the model's own parameters.
    LossReport compute(const Batch& batch, double weight = 1.0) {
        return compute(params_, batch, weight, &params_);
    }

    LossReport evaluate(const ParamSet& theta, const Batch& batch) const {
        return compute(theta, batch, 1.0, nullptr);
    }

    /// Class cross-entropy of the first member; optionally returns d loss / d input.
    double class_loss(const ParamSet& theta, const Batch& batch, double weight, ParamSet* grads,
                      Tensor* d_input = nullptr) const {
        const ActivationTrace trace = trunk_.forward(theta, batch.x);
        if (grads == nullptr && d_input == nullptr)
            return parts_.front()->class_loss(theta, trace.logits, batch.y, weight, nullptr, nullptr);
        Tensor d_features(trace.logits.shape());
        const double loss = parts_.front()->class_loss(theta, trace.logits, batch.y, weight, grads, &d_features);
        Tensor d_x = trunk_.backward(theta, trace, d_features, grads);
        if (d_input != nullptr) *d_input = std::move(d_x);
        return loss;
    }

    Tensor class_logits(const ParamSet& theta, const Tensor& x) const {
        return parts_.front()->class_logits(theta, features(theta, x));
    }

    std::vector<int> predict(const ParamSet& theta, const Tensor& x) const {
        return argmax_rows(class_logits(theta, x));
    }

    std::vector<int> predict(const Tensor& x) const { return predict(params_, x); }

    /// Indices (into the ParamSet) of the first member's class-head parameters.
    std::vector<std::size_t> class_head_params() const {
        const Mlp& head = parts_.front()->class_head();
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < head.param_count(); ++i) out.push_back(head.first_param() + i);
        return out;
    }

    std::vector<std::size_t> extractor_params() const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < trunk_.param_count(); ++i) out.push_back(trunk_.first_param() + i);
        return out;
    }

    /// Per-sample gradients of the class loss with respect to the class-head
    /// parameters, flattened in ParamSet order. Row i belongs to sample i.
    std::vector<std::vector<double>> per_sample_head_grads(const ParamSet& theta, const Batch& batch) const {
        const Tensor feats = features(theta, batch.x);
        const auto head = class_head_params();
        ParamSet scratch = theta;
        std::vector<std::vector<double>> out;
        out.reserve(batch.size());
        for (std::size_t n = 0; n < batch.size(); ++n) {
            for (std::size_t k : head) scratch[k].grad.fill(0.0);
            const std::size_t row[] = {n};
            const Tensor f = feats.gather_rows(row);
            const int label[] = {batch.y[n]};
            parts_.front()->class_loss(theta, f, label, 1.0, &scratch, nullptr);
            std::vector<double> g;
            for (std::size_t k : head) {
                const auto vals = scratch[k].grad.values();
                g.insert(g.end(), vals.begin(), vals.end());
            }
            out.push_back(std::move(g));
        }
        return out;
    }

private:
    ModelConfig cfg_;
    ParamSet params_;
    Mlp trunk_;
    std::vector<std::shared_ptr<const ModelPart>> parts_;
};

/// Flattening composition: the first config's extractor and class loss win;
/// members of nested compositions are spliced in order.
inline ModelConfig compose_models(const std::vector<ModelConfig>& configs) {
    if (configs.empty()) throw ConfigError("model", "nothing to compose");
    ModelConfig out = configs.front();
    out.parts.clear();
    for (const auto& c : configs) {
        if (c.input_dim != out.input_dim || c.num_classes != out.num_classes)
            throw ConfigError("model", "composed models must share input dimension and class count");
        out.parts.insert(out.parts.end(), c.parts.begin(), c.parts.end());
        if (c.has(ModelKind::dann)) out.gamma_reg = c.gamma_reg;
        if (c.has(ModelKind::diva)) {
            out.gamma_y = c.gamma_y;
            out.gamma_d = c.gamma_d;
            out.zx_dim = c.zx_dim;
            out.zy_dim = c.zy_dim;
            out.zd_dim = c.zd_dim;
        }
    }
    out.validate();
    return out;
}

}  // namespace dglab
