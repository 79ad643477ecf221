#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <vector>

#include "dglab/models/model.hpp"
#include "dglab/netcore/optimizer.hpp"
#include "dglab/tasks/batching.hpp"
#include "dglab/trainers/trainer.hpp"

namespace dglab {

enum class EpochDecision { proceed, stop };

/// Callback run after every epoch.
class EpochObserver {
public:
    virtual ~EpochObserver() = default;
    virtual EpochDecision on_epoch(std::size_t epoch, const Model& model) = 0;
    virtual double last_metric() const = 0;
};

struct EpochRecord {
    std::size_t epoch = 0;
    LossReport mean_loss;
    double val_accuracy = 0.0;
};

struct TrainOptions {
    std::size_t epochs = 1;
    std::size_t batch_size = 32;
    std::uint64_t shuffle_seed = 0;  // epoch e shuffles with shuffle_seed + e
    std::function<void(const EpochRecord&)> on_record;
};

/// Fraction of correctly predicted samples over the union of `views`.
inline double accuracy(const Model& model, const ParamSet& theta, const std::vector<DatasetView>& views) {
    std::size_t correct = 0, total = 0;
    for (const auto& v : views) {
        if (v.indices.empty()) continue;
        const Tensor x = v.data->features.gather_rows(v.indices);
        const auto pred = model.predict(theta, x);
        for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == v.data->labels[v.indices[i]];
        total += pred.size();
    }
    return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
}

/// Runs up to `opts.epochs` epochs. Each epoch shuffles every training domain
/// independently; step k draws the k-th batch of each domain (shorter domains
/// wrap around), so every step sees one batch per training domain.
inline std::vector<EpochRecord> train(Model& model, Trainer& trainer, const Task& task,
                                      const SplitIndices& split, const TrainOptions& opts, Optimizer& optimizer,
                                      EpochObserver& observer) {
    const auto views = train_views(task, split);
    std::vector<EpochRecord> history;
    for (std::size_t epoch = 0; epoch < opts.epochs; ++epoch) {
        std::vector<std::vector<Batch>> per_domain;
        std::size_t steps = 0;
        for (const auto& v : views) {
            per_domain.push_back(domain_minibatches(v, opts.batch_size, opts.shuffle_seed + epoch));
            steps = std::max(steps, per_domain.back().size());
        }
        EpochRecord record;
        record.epoch = epoch;
        std::vector<Batch> step_batches(per_domain.size());
        const double share = 1.0 / static_cast<double>(steps);
        for (std::size_t k = 0; k < steps; ++k) {
            for (std::size_t d = 0; d < per_domain.size(); ++d)
                step_batches[d] = per_domain[d][k % per_domain[d].size()];
            const StepReport r = trainer.step(model, step_batches, optimizer);
            if (k == 0) {
                record.mean_loss = r.loss;
                record.mean_loss.task_loss *= share;
                for (auto& t : record.mean_loss.reg_terms) t.value *= share;
            } else {
                record.mean_loss.task_loss += share * r.loss.task_loss;
                for (std::size_t t = 0; t < r.loss.reg_terms.size(); ++t)
                    record.mean_loss.reg_terms[t].value += share * r.loss.reg_terms[t].value;
            }
        }
        record.mean_loss.finalize();
        const EpochDecision decision = observer.on_epoch(epoch, model);
        record.val_accuracy = observer.last_metric();
        history.push_back(record);
        if (opts.on_record) opts.on_record(record);
        if (decision == EpochDecision::stop) break;
    }
    return history;
}

}  // namespace dglab
