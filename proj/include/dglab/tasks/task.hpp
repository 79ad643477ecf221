#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dglab/error.hpp"
#include "dglab/netcore/tensor.hpp"

namespace dglab {

/// Labeled samples of one domain.
struct DomainDataset {
    std::string name;
    Tensor features;  // n x d
    std::vector<int> labels;

    std::size_t size() const noexcept { return labels.size(); }
    std::size_t dim() const noexcept { return features.cols(); }
};

/// A domain-generalization scenario: domains in a fixed order plus the names
/// of the held-out test domains.
///
/// Test-domain data is only reachable through `test_data()`, which reports
/// every access to an optional hook.
class Task {
public:
    using AccessHook = std::function<void(const std::string& domain)>;

    Task() = default;

    Task(std::string name, std::vector<DomainDataset> domains, std::vector<std::string> test_domains,
         int num_classes, double val_fraction)
        : name_(std::move(name)),
          domains_(std::move(domains)),
          test_domains_(std::move(test_domains)),
          num_classes_(num_classes),
          val_fraction_(val_fraction) {
        validate();
    }

    const std::string& name() const noexcept { return name_; }
    int num_classes() const noexcept { return num_classes_; }
    double val_fraction() const noexcept { return val_fraction_; }
    std::size_t feature_dim() const noexcept { return domains_.front().dim(); }
    const std::vector<std::string>& test_domains() const noexcept { return test_domains_; }

    std::vector<std::string> domain_names() const {
        std::vector<std::string> out;
        for (const auto& d : domains_) out.push_back(d.name);
        return out;
    }

    /// Training domains in task order.
    std::vector<std::string> train_domains() const {
        std::vector<std::string> out;
        for (const auto& d : domains_)
            if (!is_test(d.name)) out.push_back(d.name);
        return out;
    }

    std::size_t train_domain_count() const noexcept {
        return domains_.size() - test_domains_.size();
    }

    bool is_test(const std::string& domain) const noexcept {
        return std::find(test_domains_.begin(), test_domains_.end(), domain) != test_domains_.end();
    }

    /// The i-th training domain.
    const DomainDataset& train_data(std::size_t i) const {
        std::size_t seen = 0;
        for (const auto& d : domains_) {
            if (is_test(d.name)) continue;
            if (seen++ == i) return d;
        }
        throw DataError("training domain index " + std::to_string(i) + " out of range");
    }

    const DomainDataset& test_data(const std::string& domain) const {
        if (!is_test(domain)) throw DataError("'" + domain + "' is not a test domain");
        if (access_hook_) access_hook_(domain);
        return *find(domain);
    }

    /// Every domain regardless of role; for loaders and tests, not for training code.
    const std::vector<DomainDataset>& all_domains() const noexcept { return domains_; }

    void set_access_hook(AccessHook hook) { access_hook_ = std::move(hook); }

    /// Same data with a different test-domain selection.
    Task with_test_domains(std::vector<std::string> test_domains) const {
        Task t(name_, domains_, std::move(test_domains), num_classes_, val_fraction_);
        return t;
    }

    friend bool operator==(const Task& a, const Task& b) {
        if (a.name_ != b.name_ || a.test_domains_ != b.test_domains_ ||
            a.num_classes_ != b.num_classes_ || a.val_fraction_ != b.val_fraction_ ||
            a.domains_.size() != b.domains_.size())
            return false;
        for (std::size_t i = 0; i < a.domains_.size(); ++i) {
            const auto& x = a.domains_[i];
            const auto& y = b.domains_[i];
            if (x.name != y.name || x.labels != y.labels || !(x.features == y.features)) return false;
        }
        return true;
    }

private:
    const DomainDataset* find(const std::string& name) const noexcept {
        for (const auto& d : domains_)
            if (d.name == name) return &d;
        return nullptr;
    }

    void validate() const {
        if (domains_.empty()) throw DataError("task '" + name_ + "' has no domains");
        if (!(val_fraction_ > 0.0 && val_fraction_ < 1.0))
            throw ConfigError("val_fraction", "val_fraction must lie in (0, 1)");
        if (num_classes_ < 1) throw DataError("task '" + name_ + "' needs at least one class");
        const DomainDataset& ref = domains_.front();
        for (const auto& d : domains_) {
            if (d.size() == 0) throw DataError("domain " + d.name + " is empty");
            if (d.features.rows() != d.labels.size())
                throw DataError("domain " + d.name + ": feature rows and label count differ");
            if (d.dim() != ref.dim())
                throw DataError("feature dimension mismatch: domain " + ref.name + " has d=" +
                                std::to_string(ref.dim()) + ", domain " + d.name + " has d=" +
                                std::to_string(d.dim()));
            for (int y : d.labels)
                if (y < 0 || y >= num_classes_)
                    throw DataError("domain " + d.name + ": label " + std::to_string(y) +
                                    " outside [0, " + std::to_string(num_classes_) + ")");
            if (std::count_if(domains_.begin(), domains_.end(),
                              [&](const DomainDataset& o) { return o.name == d.name; }) > 1)
                throw DataError("duplicate domain name " + d.name);
            if (d.name.empty()) throw DataError("empty domain name");
        }
        if (test_domains_.empty()) throw ConfigError("te_d", "at least one test domain is required");
        for (std::size_t i = 0; i < test_domains_.size(); ++i) {
            if (find(test_domains_[i]) == nullptr)
                throw ConfigError("te_d", "unknown test domain " + test_domains_[i]);
            for (std::size_t j = 0; j < i; ++j)
                if (test_domains_[j] == test_domains_[i])
                    throw ConfigError("te_d", "test domain " + test_domains_[i] + " listed twice");
        }
        if (train_domain_count() == 0)
            throw ConfigError("te_d", "no training domain remains after removing test domains");
    }

    std::string name_;
    std::vector<DomainDataset> domains_;
    std::vector<std::string> test_domains_;
    int num_classes_ = 0;
    double val_fraction_ = 0.2;
    AccessHook access_hook_;
};

/// In-memory datasets, one per domain. When `num_classes` is omitted it is
/// one more than the largest label.
inline Task task_from_datasets(std::string name, std::vector<DomainDataset> datasets,
                               std::vector<std::string> test_domains, double val_fraction = 0.2,
                               std::optional<int> num_classes = std::nullopt) {
    int classes = 0;
    if (num_classes) {
        classes = *num_classes;
    } else {
        for (const auto& d : datasets)
            for (int y : d.labels) classes = std::max(classes, y + 1);
    }
    return Task(std::move(name), std::move(datasets), std::move(test_domains), classes, val_fraction);
}

}  // namespace dglab
