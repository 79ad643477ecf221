#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "dglab/error.hpp"
#include "dglab/netcore/tensor.hpp"

namespace dglab {

struct LossGrad {
    double loss = 0.0;
    Tensor grad;
};

/// Mean softmax cross-entropy over the batch; gradient is (softmax - onehot) / batch.
inline LossGrad softmax_cross_entropy(const Tensor& logits, std::span<const int> labels) {
    const std::size_t batch = logits.rows();
    const std::size_t classes = logits.cols();
    if (labels.size() != batch)
        throw NumericError("cross-entropy: " + std::to_string(labels.size()) + " labels for batch of " +
                           std::to_string(batch));
    LossGrad out{0.0, Tensor::matrix(batch, classes)};
    if (batch == 0) return out;
    const double inv_batch = 1.0 / static_cast<double>(batch);
    for (std::size_t n = 0; n < batch; ++n) {
        const int y = labels[n];
        if (y < 0 || static_cast<std::size_t>(y) >= classes)
            throw NumericError("cross-entropy: label " + std::to_string(y) + " outside [0, " +
                               std::to_string(classes) + ")");
        const auto row = logits.row(n);
        const double peak = *std::max_element(row.begin(), row.end());
        double sum = 0.0;
        for (double v : row) sum += std::exp(v - peak);
        const double log_z = peak + std::log(sum);
        out.loss += (log_z - row[static_cast<std::size_t>(y)]) * inv_batch;
        auto g = out.grad.row(n);
        for (std::size_t c = 0; c < classes; ++c) g[c] = std::exp(row[c] - log_z) * inv_batch;
        g[static_cast<std::size_t>(y)] -= inv_batch;
    }
    return out;
}

/// Mean squared error over all elements; gradient 2 (x - t) / N.
inline LossGrad mse_loss(const Tensor& x, const Tensor& target) {
    if (!x.same_shape(target))
        throw NumericError("mse: shape " + x.shape_string() + " vs " + target.shape_string());
    LossGrad out{0.0, Tensor(x.shape())};
    if (x.empty()) return out;
    const double inv_n = 1.0 / static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - target[i];
        out.loss += d * d;
        out.grad[i] = 2.0 * d * inv_n;
    }
    out.loss *= inv_n;
    return out;
}

/// Row-wise argmax; ties go to the lower index.
inline std::vector<int> argmax_rows(const Tensor& logits) {
    std::vector<int> out(logits.rows());
    for (std::size_t n = 0; n < logits.rows(); ++n) {
        const auto row = logits.row(n);
        std::size_t best = 0;
        for (std::size_t c = 1; c < row.size(); ++c)
            if (row[c] > row[best]) best = c;
        out[n] = static_cast<int>(best);
    }
    return out;
}

}  // namespace dglab
