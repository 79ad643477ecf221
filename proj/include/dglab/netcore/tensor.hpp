#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dglab/error.hpp"

namespace dglab {

/// Dense row-major array of doubles.
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0)
        : shape_(std::move(shape)), data_(element_count(shape_), fill) {}

    Tensor(std::vector<std::size_t> shape, std::vector<double> data)
        : shape_(std::move(shape)), data_(std::move(data)) {
        if (element_count(shape_) != data_.size())
            throw NumericError("tensor data length " + std::to_string(data_.size()) +
                               " does not match shape " + shape_string());
    }

    static Tensor matrix(std::size_t rows, std::size_t cols, double fill = 0.0) {
        return Tensor({rows, cols}, fill);
    }

    /// Builds a matrix from nested rows; all rows must have equal length.
    static Tensor from_rows(const std::vector<std::vector<double>>& rows) {
        const std::size_t cols = rows.empty() ? 0 : rows.front().size();
        std::vector<double> flat;
        flat.reserve(rows.size() * cols);
        for (const auto& r : rows) {
            if (r.size() != cols) throw NumericError("ragged rows in Tensor::from_rows");
            flat.insert(flat.end(), r.begin(), r.end());
        }
        return Tensor({rows.size(), cols}, std::move(flat));
    }

    const std::vector<std::size_t>& shape() const noexcept { return shape_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    std::size_t rows() const noexcept { return shape_.empty() ? 0 : shape_[0]; }
    std::size_t cols() const noexcept {
        return shape_.size() < 2 ? 1 : data_.size() / (shape_[0] == 0 ? 1 : shape_[0]);
    }

    double& operator[](std::size_t i) noexcept { return data_[i]; }
    double operator[](std::size_t i) const noexcept { return data_[i]; }

    double& at(std::size_t r, std::size_t c) noexcept { return data_[r * cols() + c]; }
    double at(std::size_t r, std::size_t c) const noexcept { return data_[r * cols() + c]; }

    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }
    std::span<const double> row(std::size_t r) const noexcept {
        return std::span<const double>(data_).subspan(r * cols(), cols());
    }
    std::span<double> row(std::size_t r) noexcept {
        return std::span<double>(data_).subspan(r * cols(), cols());
    }

    void fill(double v) noexcept { std::fill(data_.begin(), data_.end(), v); }

    bool same_shape(const Tensor& other) const noexcept { return shape_ == other.shape_; }

    bool all_finite() const noexcept {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    /// Rows selected by index, in the given order.
    Tensor gather_rows(std::span<const std::size_t> indices) const {
        const std::size_t c = cols();
        Tensor out({indices.size(), c});
        for (std::size_t i = 0; i < indices.size(); ++i) {
            const auto src = row(indices[i]);
            std::copy(src.begin(), src.end(), out.data_.begin() + static_cast<std::ptrdiff_t>(i * c));
        }
        return out;
    }

    /// Column block [first, first + count) of a matrix.
    Tensor columns(std::size_t first, std::size_t count) const {
        Tensor out({rows(), count});
        for (std::size_t r = 0; r < rows(); ++r)
            for (std::size_t c = 0; c < count; ++c) out.at(r, c) = at(r, first + c);
        return out;
    }

    /// Adds `block` into columns starting at `first`.
    void add_columns(std::size_t first, const Tensor& block) {
        for (std::size_t r = 0; r < block.rows(); ++r)
            for (std::size_t c = 0; c < block.cols(); ++c) at(r, first + c) += block.at(r, c);
    }

    Tensor& operator+=(const Tensor& other) {
        require_same_shape(other, "+=");
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
        return *this;
    }

    /// this += scale * other
    void add_scaled(const Tensor& other, double scale) {
        require_same_shape(other, "add_scaled");
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += scale * other.data_[i];
    }

    Tensor& operator*=(double s) noexcept {
        for (double& v : data_) v *= s;
        return *this;
    }

    std::string shape_string() const {
        std::string s = "[";
        for (std::size_t i = 0; i < shape_.size(); ++i) {
            if (i) s += "x";
            s += std::to_string(shape_[i]);
        }
        return s + "]";
    }

    friend bool operator==(const Tensor&, const Tensor&) = default;

private:
    static std::size_t element_count(const std::vector<std::size_t>& shape) {
        return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>{});
    }

    void require_same_shape(const Tensor& other, const char* op) const {
        if (shape_ != other.shape_)
            throw NumericError(std::string("shape mismatch in ") + op + ": " + shape_string() +
                               " vs " + other.shape_string());
    }

    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

}  // namespace dglab
