#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "dglab/error.hpp"
#include "dglab/models/model.hpp"
#include "dglab/netcore/optimizer.hpp"
#include "dglab/trainers/config.hpp"
#include "dglab/trainers/regularizers.hpp"

namespace dglab {

struct StepReport {
    LossReport loss;  // model terms first, then trainer terms innermost first
    double grad_norm = 0.0;
    std::size_t step = 0;
};

/// The training operator: feeds one batch per training domain into the
/// model, appends the regularizers of every decorator in the chain (inner
/// first) and applies a single optimizer step for the combined loss.
class Trainer {
public:
    Trainer() = default;
    explicit Trainer(TrainerConfig cfg) : cfg_(std::move(cfg)) {
        cfg_.validate();
        fishr_.resize(cfg_.chain.size());
    }

    const TrainerConfig& config() const noexcept { return cfg_; }
    std::string name() const { return cfg_.name(); }
    std::size_t steps_taken() const noexcept { return step_; }

    /// Batches that feed the model loss: all domains, or the meta-source
    /// domains when mldg is part of the chain.
    std::vector<Batch> flow_batches(std::span<const Batch> per_domain, std::size_t step) const {
        if (cfg_.has(TrainerKind::mldg) && per_domain.size() >= 2) return mldg_sources(per_domain, step);
        return {per_domain.begin(), per_domain.end()};
    }

    /// Loss of the full chain at `theta` with gradients added to `grads`
    /// (may be null). Advances the Fishr smoothing state when `commit`.
    LossReport accumulate(const Model& model, const ParamSet& theta, std::span<const Batch> per_domain,
                          std::size_t step, double default_inner_lr, ParamSet* grads, bool commit) {
        if (per_domain.empty()) throw DataError("trainer step needs at least one domain batch");
        const std::vector<Batch> flow = flow_batches(per_domain, step);
        const double share = 1.0 / static_cast<double>(flow.size());

        LossReport report;
        for (std::size_t i = 0; i < flow.size(); ++i) {
            const LossReport r = model.compute(theta, flow[i], share, grads);
            report.task_loss += share * r.task_loss;
            if (i == 0) {
                report.reg_terms = r.reg_terms;
                for (auto& t : report.reg_terms) t.value *= share;
            } else {
                for (std::size_t k = 0; k < r.reg_terms.size(); ++k)
                    report.reg_terms[k].value += share * r.reg_terms[k].value;
            }
        }

        for (std::size_t s = cfg_.chain.size(); s-- > 0;) {
            const TrainerStage& stage = cfg_.chain[s];
            switch (stage.kind) {
                case TrainerKind::basic: break;
                case TrainerKind::dial:
                    report.reg_terms.push_back(dial_regularizer(model, theta, flow, cfg_.dial, stage.gamma_reg, grads));
                    break;
                case TrainerKind::mldg: {
                    const double lr = cfg_.mldg.inner_lr ? *cfg_.mldg.inner_lr : default_inner_lr;
                    report.reg_terms.push_back(
                        mldg_regularizer(model, theta, per_domain, step, lr, stage.gamma_reg, grads));
                    break;
                }
                case TrainerKind::fishr: {
                    FishrState scratch = fishr_[s];
                    FishrState& state = commit ? fishr_[s] : scratch;
                    report.reg_terms.push_back(
                        fishr_regularizer(model, theta, per_domain, cfg_.fishr, stage.gamma_reg, state, grads));
                    break;
                }
            }
        }
        report.finalize();
        return report;
    }

    StepReport step(Model& model, std::span<const Batch> per_domain, Optimizer& optimizer) {
        ParamSet& params = model.params();
        params.zero_grad();
        StepReport out;
        out.step = step_;
        out.loss = accumulate(model, params, per_domain, step_, optimizer.learning_rate(), &params, true);
        if (!std::isfinite(out.loss.total))
            throw NumericError("non-finite loss at step " + std::to_string(step_));
        out.grad_norm = params.grad_norm();
        optimizer.step(params);
        ++step_;
        return out;
    }

private:
    TrainerConfig cfg_;
    std::vector<FishrState> fishr_;
    std::size_t step_ = 0;
};

/// Wraps `inner` in `outer`: the outer stage's term is appended after the
/// inner chain's terms.
inline TrainerConfig decorate(TrainerStage outer, TrainerConfig inner) {
    if (inner.chain.size() == 1 && inner.chain.front().kind == TrainerKind::basic) inner.chain.clear();
    inner.chain.insert(inner.chain.begin(), outer);
    inner.validate();
    return inner;
}

}  // namespace dglab
