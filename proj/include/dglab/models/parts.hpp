#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "dglab/models/loss_report.hpp"
#include "dglab/netcore.hpp"
#include "dglab/tasks/batching.hpp"

namespace dglab {

/// Losses of one model member computed from the shared features.
struct PartOutput {
    double task_loss = 0.0;
    std::vector<RegTerm> regs;
};

/// A model member attached to the shared feature extractor. `weight` scales
/// every gradient the part writes; parameter gradients go to `grads` and the
/// gradient with respect to the features is added to `d_features`. Either
/// sink may be null.
class ModelPart {
public:
    virtual ~ModelPart() = default;

    virtual std::string kind() const = 0;

    virtual PartOutput evaluate(const ParamSet& theta, const Tensor& features, const Batch& batch,
                                double weight, ParamSet* grads, Tensor* d_features) const = 0;

    virtual Tensor class_logits(const ParamSet& theta, const Tensor& features) const = 0;

    /// Cross-entropy of the class path only.
    virtual double class_loss(const ParamSet& theta, const Tensor& features, std::span<const int> labels,
                              double weight, ParamSet* grads, Tensor* d_features) const = 0;

    virtual const Mlp& class_head() const = 0;
};

namespace detail {

/// Cross-entropy through `head` applied to `input`; writes weighted gradients.
inline double head_cross_entropy(const Mlp& head, const ParamSet& theta, const Tensor& input,
                                 std::span<const int> labels, double weight, ParamSet* grads,
                                 Tensor* d_input) {
    const ActivationTrace trace = head.forward(theta, input);
    LossGrad ce = softmax_cross_entropy(trace.logits, labels);
    if (grads != nullptr || d_input != nullptr) {
        ce.grad *= weight;
        Tensor d = head.backward(theta, trace, ce.grad, grads);
        if (d_input != nullptr) *d_input += d;
    }
    return ce.loss;
}

}  // namespace detail

/// Empirical risk minimization: a class head and nothing else.
class ErmPart final : public ModelPart {
public:
    explicit ErmPart(Mlp class_head) : cls_(std::move(class_head)) {}

    std::string kind() const override { return "erm"; }

    PartOutput evaluate(const ParamSet& theta, const Tensor& features, const Batch& batch, double weight,
                        ParamSet* grads, Tensor* d_features) const override {
        return {class_loss(theta, features, batch.y, weight, grads, d_features), {}};
    }

    Tensor class_logits(const ParamSet& theta, const Tensor& features) const override {
        return cls_.logits(theta, features);
    }

    double class_loss(const ParamSet& theta, const Tensor& features, std::span<const int> labels,
                      double weight, ParamSet* grads, Tensor* d_features) const override {
        return detail::head_cross_entropy(cls_, theta, features, labels, weight, grads, d_features);
    }

    const Mlp& class_head() const override { return cls_; }

private:
    Mlp cls_;
};

/// Domain-adversarial training: a domain classifier on the features whose
/// gradient is sign-flipped at the feature boundary.
class DannPart final : public ModelPart {
public:
    DannPart(Mlp class_head, Mlp domain_head, double gamma_reg)
        : cls_(std::move(class_head)), dom_(std::move(domain_head)), gamma_(gamma_reg) {}

    std::string kind() const override { return "dann"; }

    PartOutput evaluate(const ParamSet& theta, const Tensor& features, const Batch& batch, double weight,
                        ParamSet* grads, Tensor* d_features) const override {
        PartOutput out;
        out.task_loss = class_loss(theta, features, batch.y, weight, grads, d_features);
        const std::vector<int> domains(batch.size(), batch.domain);
        // The domain head descends R itself; the extractor receives -gamma * dR/dphi.
        Tensor d_dom;
        Tensor* d_dom_ptr = nullptr;
        if (d_features != nullptr) {
            d_dom = Tensor(features.shape());
            d_dom_ptr = &d_dom;
        }
        const double domain_loss =
            detail::head_cross_entropy(dom_, theta, features, domains, weight, grads, d_dom_ptr);
        if (d_features != nullptr) d_features->add_scaled(d_dom, -gamma_);
        out.regs.push_back({"dann_domain", domain_loss, gamma_});
        return out;
    }

    Tensor class_logits(const ParamSet& theta, const Tensor& features) const override {
        return cls_.logits(theta, features);
    }

    double class_loss(const ParamSet& theta, const Tensor& features, std::span<const int> labels,
                      double weight, ParamSet* grads, Tensor* d_features) const override {
        return detail::head_cross_entropy(cls_, theta, features, labels, weight, grads, d_features);
    }

    const Mlp& class_head() const override { return cls_; }
    const Mlp& domain_head() const noexcept { return dom_; }
    double gamma_reg() const noexcept { return gamma_; }

private:
    Mlp cls_;
    Mlp dom_;
    double gamma_;
};

/// Deterministic DIVA variant. The features are split into (z_x, z_y, z_d);
/// the class head reads z_y, the domain head reads z_d and a decoder
/// reconstructs the input from all three. The weighting
/// gamma_y * l_class + gamma_d * l_domain + l_recon is divided by gamma_y so
/// that the class loss keeps unit weight.
class DivaPart final : public ModelPart {
public:
    DivaPart(Mlp class_head, Mlp domain_head, Mlp decoder, std::size_t zx, std::size_t zy, std::size_t zd,
             double gamma_y, double gamma_d)
        : cls_(std::move(class_head)),
          dom_(std::move(domain_head)),
          dec_(std::move(decoder)),
          zx_(zx),
          zy_(zy),
          zd_(zd),
          mu_domain_(gamma_d / gamma_y),
          mu_recon_(1.0 / gamma_y) {}

    std::string kind() const override { return "diva"; }

    PartOutput evaluate(const ParamSet& theta, const Tensor& features, const Batch& batch, double weight,
                        ParamSet* grads, Tensor* d_features) const override {
        PartOutput out;
        out.task_loss = class_loss(theta, features, batch.y, weight, grads, d_features);

        const std::vector<int> domains(batch.size(), batch.domain);
        const Tensor zd = features.columns(zx_ + zy_, zd_);
        Tensor d_zd;
        Tensor* d_zd_ptr = nullptr;
        if (d_features != nullptr) {
            d_zd = Tensor(zd.shape());
            d_zd_ptr = &d_zd;
        }
        const double domain_loss =
            detail::head_cross_entropy(dom_, theta, zd, domains, weight * mu_domain_, grads, d_zd_ptr);
        if (d_features != nullptr) d_features->add_columns(zx_ + zy_, d_zd);

        const ActivationTrace trace = dec_.forward(theta, features);
        LossGrad recon = mse_loss(trace.logits, batch.x);
        if (grads != nullptr || d_features != nullptr) {
            recon.grad *= weight * mu_recon_;
            Tensor d = dec_.backward(theta, trace, recon.grad, grads);
            if (d_features != nullptr) *d_features += d;
        }
        out.regs.push_back({"diva_domain", domain_loss, mu_domain_});
        out.regs.push_back({"diva_recon", recon.loss, mu_recon_});
        return out;
    }

    Tensor class_logits(const ParamSet& theta, const Tensor& features) const override {
        return cls_.logits(theta, features.columns(zx_, zy_));
    }

    double class_loss(const ParamSet& theta, const Tensor& features, std::span<const int> labels,
                      double weight, ParamSet* grads, Tensor* d_features) const override {
        const Tensor zy = features.columns(zx_, zy_);
        if (d_features == nullptr)
            return detail::head_cross_entropy(cls_, theta, zy, labels, weight, grads, nullptr);
        Tensor d_zy(zy.shape());
        const double loss = detail::head_cross_entropy(cls_, theta, zy, labels, weight, grads, &d_zy);
        d_features->add_columns(zx_, d_zy);
        return loss;
    }

    const Mlp& class_head() const override { return cls_; }
    const Mlp& domain_head() const noexcept { return dom_; }
    const Mlp& decoder() const noexcept { return dec_; }

private:
    Mlp cls_;
    Mlp dom_;
    Mlp dec_;
    std::size_t zx_, zy_, zd_;
    double mu_domain_;
    double mu_recon_;
};

}  // namespace dglab
