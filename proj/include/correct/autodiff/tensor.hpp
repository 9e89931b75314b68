#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace correct::ad {

using Real = double;

/// Thrown when operand shapes are incompatible. The message names both shapes.
class ShapeError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Dense row-major matrix. Vectors are 1 x n, scalars are 1 x 1.
class Tensor {
  public:
    Tensor() = default;
    Tensor(std::size_t rows, std::size_t cols, Real fill = 0.0);
    Tensor(std::size_t rows, std::size_t cols, std::vector<Real> data);

    static Tensor scalar(Real value) { return Tensor(1, 1, value); }
    static Tensor row(std::vector<Real> values);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    std::vector<std::size_t> shape() const { return {rows_, cols_}; }
    bool empty() const { return data_.empty(); }

    Real& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    Real operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    Real& operator[](std::size_t i) { return data_[i]; }
    Real operator[](std::size_t i) const { return data_[i]; }

    std::span<Real> data() { return data_; }
    std::span<const Real> data() const { return data_; }
    std::span<const Real> row_span(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
    std::span<Real> row_span(std::size_t r) { return {data_.data() + r * cols_, cols_}; }

    /// Value of a 1 x 1 tensor.
    Real item() const;

    void fill(Real value);

    bool operator==(const Tensor& other) const = default;

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Real> data_;
};

std::string shape_string(const Tensor& t);

/// C (+)= op(A) * op(B).
void gemm(const Tensor& a, bool transpose_a, const Tensor& b, bool transpose_b, Tensor& c,
          bool accumulate);

}  // namespace correct::ad
