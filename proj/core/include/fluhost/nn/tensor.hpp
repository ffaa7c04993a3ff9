#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fluhost/error.hpp"

namespace fluhost::nn {

using Shape = std::vector<std::size_t>;

std::string to_string(const Shape& s);
std::size_t shape_size(const Shape& s) noexcept;

// Raised for incompatible operand shapes or out-of-range indices.
class ShapeError : public DataError {
public:
    using DataError::DataError;
};

// n-d array of doubles in row-major order.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape, double fill = 0.0);
    Tensor(Shape shape, std::vector<double> values);

    const Shape& shape() const noexcept { return shape_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
    std::size_t size() const noexcept { return values_.size(); }

    double* data() noexcept { return values_.data(); }
    const double* data() const noexcept { return values_.data(); }
    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }

    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }

    // Same values under a new shape of equal size.
    Tensor reshaped(Shape shape) const;

    void fill(double v);

    friend bool operator==(const Tensor&, const Tensor&) = default;

private:
    Shape shape_;
    std::vector<double> values_;
};

}  // namespace fluhost::nn
