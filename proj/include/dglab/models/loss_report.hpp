#pragma once

#include <string>
#include <vector>

namespace dglab {

/// One weighted regularization term mu * R.
struct RegTerm {
    std::string name;
    double value = 0.0;
    double multiplier = 0.0;

    friend bool operator==(const RegTerm&, const RegTerm&) = default;
};

/// Task loss plus ordered regularizers; `total` is always recomputed by
/// `finalize` by summing multiplier * value left to right.
struct LossReport {
    double task_loss = 0.0;
    std::vector<RegTerm> reg_terms;
    double total = 0.0;

    void finalize() noexcept {
        double t = task_loss;
        for (const auto& r : reg_terms) t += r.multiplier * r.value;
        total = t;
    }

    std::vector<std::string> reg_names() const {
        std::vector<std::string> out;
        for (const auto& r : reg_terms) out.push_back(r.name);
        return out;
    }
};

}  // namespace dglab
