#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "dglab/error.hpp"
#include "dglab/netcore/tensor.hpp"
#include "dglab/rng.hpp"
#include "dglab/tasks/task.hpp"

namespace dglab {

struct DomainSplit {
    std::string domain;
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
};

/// Train/validation indices for every training domain, in task order.
struct SplitIndices {
    std::vector<DomainSplit> domains;
    std::uint64_t seed = 0;
};

/// Shuffles each training domain and holds out round(val_fraction * n)
/// samples (at least one, at most n - 1) for validation. Test domains are
/// never touched.
inline SplitIndices split_train_val(const Task& task, std::uint64_t seed) {
    SplitIndices out;
    out.seed = seed;
    for (std::size_t d = 0; d < task.train_domain_count(); ++d) {
        const DomainDataset& data = task.train_data(d);
        const std::size_t n = data.size();
        if (n < 2) throw DataError("domain " + data.name + " has " + std::to_string(n) +
                                   " samples; a train/validation split needs at least 2");
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        Rng rng(derive_seed(seed, d));
        rng.shuffle(std::span<std::size_t>(idx));
        auto n_val = static_cast<std::size_t>(std::llround(task.val_fraction() * static_cast<double>(n)));
        n_val = std::clamp<std::size_t>(n_val, 1, n - 1);
        DomainSplit split{data.name, {}, {}};
        split.val.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_val));
        split.train.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_val), idx.end());
        out.domains.push_back(std::move(split));
    }
    return out;
}

/// One single-domain mini-batch. `domain` indexes the task's training domains.
struct Batch {
    Tensor x;
    std::vector<int> y;
    int domain = 0;

    std::size_t size() const noexcept { return y.size(); }
};

/// A subset of one domain's samples.
struct DatasetView {
    const DomainDataset* data = nullptr;
    std::vector<std::size_t> indices;
    int domain = 0;
};

inline Batch make_batch(const DatasetView& view, std::span<const std::size_t> rows) {
    std::vector<std::size_t> picked;
    picked.reserve(rows.size());
    Batch b;
    for (std::size_t r : rows) {
        picked.push_back(view.indices[r]);
        b.y.push_back(view.data->labels[view.indices[r]]);
    }
    b.x = view.data->features.gather_rows(picked);
    b.domain = view.domain;
    return b;
}

/// Sequential batches over a fresh shuffle of one view; the last may be short.
inline std::vector<Batch> domain_minibatches(const DatasetView& view, std::size_t batch_size,
                                             std::uint64_t epoch_seed) {
    if (batch_size < 1) throw ConfigError("bs", "batch size must be >= 1");
    std::vector<std::size_t> order(view.indices.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(epoch_seed, static_cast<std::uint64_t>(view.domain)));
    rng.shuffle(std::span<std::size_t>(order));
    std::vector<Batch> out;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
        const std::size_t stop = std::min(order.size(), start + batch_size);
        out.push_back(make_batch(view, std::span<const std::size_t>(order).subspan(start, stop - start)));
    }
    return out;
}

/// One pass over several domains: each domain is shuffled and batched on its
/// own, then the batches are interleaved round-robin (domain 0, 1, ..., 0, 1, ...).
/// Every batch carries a single domain id.
inline std::vector<Batch> minibatches(const std::vector<DatasetView>& views, std::size_t batch_size,
                                      std::uint64_t epoch_seed) {
    std::vector<std::vector<Batch>> per_domain;
    std::size_t longest = 0;
    for (const auto& v : views) {
        per_domain.push_back(domain_minibatches(v, batch_size, epoch_seed));
        longest = std::max(longest, per_domain.back().size());
    }
    std::vector<Batch> out;
    for (std::size_t k = 0; k < longest; ++k)
        for (auto& batches : per_domain)
            if (k < batches.size()) out.push_back(std::move(batches[k]));
    return out;
}

/// Training views (split.train) of every training domain.
inline std::vector<DatasetView> train_views(const Task& task, const SplitIndices& split) {
    std::vector<DatasetView> out;
    for (std::size_t d = 0; d < split.domains.size(); ++d)
        out.push_back({&task.train_data(d), split.domains[d].train, static_cast<int>(d)});
    return out;
}

inline std::vector<DatasetView> val_views(const Task& task, const SplitIndices& split) {
    std::vector<DatasetView> out;
    for (std::size_t d = 0; d < split.domains.size(); ++d)
        out.push_back({&task.train_data(d), split.domains[d].val, static_cast<int>(d)});
    return out;
}

inline DatasetView full_view(const DomainDataset& data, int domain = 0) {
    std::vector<std::size_t> idx(data.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    return {&data, std::move(idx), domain};
}

}  // namespace dglab
