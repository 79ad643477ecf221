#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "dglab/trainers/train_loop.hpp"

namespace dglab {

/// Early stopping plus best-model selection on validation accuracy. A strict
/// improvement resets the counter and snapshots the parameters; training
/// stops once the counter exceeds `patience`.
class Observer final : public EpochObserver {
public:
    Observer() = default;
    Observer(std::vector<DatasetView> validation, std::optional<int> patience)
        : val_(std::move(validation)), patience_(patience) {}

    EpochDecision on_epoch(std::size_t epoch, const Model& model) override {
        return record(epoch, accuracy(model, model.params(), val_), model.params());
    }

    /// The bookkeeping half of `on_epoch`, given a precomputed metric.
    EpochDecision record(std::size_t epoch, double metric, const ParamSet& params) {
        last_ = metric;
        if (!best_epoch_ || metric > best_) {
            best_ = metric;
            best_epoch_ = epoch;
            snapshot_ = params;
            since_ = 0;
        } else {
            ++since_;
        }
        if (patience_ && since_ > static_cast<std::size_t>(*patience_)) return EpochDecision::stop;
        return EpochDecision::proceed;
    }

    double last_metric() const override { return last_; }
    double best_metric() const noexcept { return best_; }
    std::optional<std::size_t> best_epoch() const noexcept { return best_epoch_; }
    const ParamSet& snapshot() const noexcept { return snapshot_; }
    const std::vector<DatasetView>& validation() const noexcept { return val_; }

private:
    std::vector<DatasetView> val_;
    std::optional<int> patience_;
    double best_ = -std::numeric_limits<double>::infinity();
    double last_ = 0.0;
    std::optional<std::size_t> best_epoch_;
    std::size_t since_ = 0;
    ParamSet snapshot_;
};

}  // namespace dglab
