#include "correct/autodiff/tensor.hpp"

#include <algorithm>

namespace correct::ad {

Tensor::Tensor(std::size_t rows, std::size_t cols, Real fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Tensor::Tensor(std::size_t rows, std::size_t cols, std::vector<Real> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
        throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                         " does not match shape [" + std::to_string(rows) + "x" +
                         std::to_string(cols) + "]");
    }
}

Tensor Tensor::row(std::vector<Real> values) {
    const auto n = values.size();
    return Tensor(1, n, std::move(values));
}

Real Tensor::item() const {
    if (rows_ != 1 || cols_ != 1) {
        throw ShapeError("item() on non-scalar tensor " + shape_string(*this));
    }
    return data_[0];
}

void Tensor::fill(Real value) { std::fill(data_.begin(), data_.end(), value); }

std::string shape_string(const Tensor& t) {
    return "[" + std::to_string(t.rows()) + "x" + std::to_string(t.cols()) + "]";
}

void gemm(const Tensor& a, bool transpose_a, const Tensor& b, bool transpose_b, Tensor& c,
          bool accumulate) {
    const std::size_t m = transpose_a ? a.cols() : a.rows();
    const std::size_t k = transpose_a ? a.rows() : a.cols();
    const std::size_t kb = transpose_b ? b.cols() : b.rows();
    const std::size_t n = transpose_b ? b.rows() : b.cols();
    if (k != kb) {
        throw ShapeError("matmul: inner dimensions differ, " + shape_string(a) +
                         (transpose_a ? "^T" : "") + " vs " + shape_string(b) +
                         (transpose_b ? "^T" : ""));
    }
    if (c.rows() != m || c.cols() != n) {
        c = Tensor(m, n);
    } else if (!accumulate) {
        c.fill(0.0);
    }

    const Real* pa = a.data().data();
    const Real* pb = b.data().data();
    Real* pc = c.data().data();
    const std::size_t lda = a.cols();
    const std::size_t ldb = b.cols();

    // Loop orders keep the innermost access contiguous in every case.
    if (!transpose_a && !transpose_b) {
        for (std::size_t i = 0; i < m; ++i) {
            Real* crow = pc + i * n;
            for (std::size_t p = 0; p < k; ++p) {
                const Real av = pa[i * lda + p];
                if (av == 0.0) continue;
                const Real* brow = pb + p * ldb;
                for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
            }
        }
    } else if (!transpose_a && transpose_b) {
        for (std::size_t i = 0; i < m; ++i) {
            const Real* arow = pa + i * lda;
            for (std::size_t j = 0; j < n; ++j) {
                const Real* brow = pb + j * ldb;
                Real acc = 0.0;
                for (std::size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
                pc[i * n + j] += acc;
            }
        }
    } else if (transpose_a && !transpose_b) {
        for (std::size_t p = 0; p < k; ++p) {
            const Real* arow = pa + p * lda;
            const Real* brow = pb + p * ldb;
            for (std::size_t i = 0; i < m; ++i) {
                const Real av = arow[i];
                if (av == 0.0) continue;
                Real* crow = pc + i * n;
                for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
            }
        }
    } else {
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                Real acc = 0.0;
                for (std::size_t p = 0; p < k; ++p) acc += pa[p * lda + i] * pb[j * ldb + p];
                pc[i * n + j] += acc;
            }
        }
    }
}

}  // namespace correct::ad
