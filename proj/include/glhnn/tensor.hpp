#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace glhnn {

// Dense row-major tensor of rank 1..3 in double precision.
//
// A Tensor is a plain value: copying copies the data. Element accessors do
// no bounds checking; shape-level contracts are checked by the operations.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);
    Tensor(std::vector<std::size_t> shape, std::vector<double> data);

    static Tensor zeros(std::vector<std::size_t> shape) { return Tensor(std::move(shape)); }
    static Tensor zeros_like(const Tensor& t) { return Tensor(t.shape()); }
    // Rank-2 tensor from nested rows; all rows must have equal length.
    static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);
    static Tensor vector(std::initializer_list<double> values);

    const std::vector<std::size_t>& shape() const noexcept { return shape_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t dim(std::size_t axis) const;
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }
    double* raw() noexcept { return data_.data(); }
    const double* raw() const noexcept { return data_.data(); }

    double& operator[](std::size_t i) noexcept { return data_[i]; }
    double operator[](std::size_t i) const noexcept { return data_[i]; }

    double& at(std::size_t i, std::size_t j) noexcept { return data_[i * shape_[1] + j]; }
    double at(std::size_t i, std::size_t j) const noexcept { return data_[i * shape_[1] + j]; }
    double& at(std::size_t i, std::size_t j, std::size_t k) noexcept {
        return data_[(i * shape_[1] + j) * shape_[2] + k];
    }
    double at(std::size_t i, std::size_t j, std::size_t k) const noexcept {
        return data_[(i * shape_[1] + j) * shape_[2] + k];
    }

    // Row i of a rank-2 tensor.
    std::span<double> row(std::size_t i) noexcept {
        return {data_.data() + i * shape_[1], shape_[1]};
    }
    std::span<const double> row(std::size_t i) const noexcept {
        return {data_.data() + i * shape_[1], shape_[1]};
    }

    void fill(double value) noexcept;
    bool all_finite() const noexcept;
    bool same_shape(const Tensor& other) const noexcept { return shape_ == other.shape_; }

    // Elementwise in-place helpers used by gradient accumulation.
    Tensor& operator+=(const Tensor& other);
    Tensor& operator*=(double scale) noexcept;

    friend bool operator==(const Tensor&, const Tensor&) = default;

private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

// "[2x3]" style rendering for error messages.
std::string shape_string(const std::vector<std::size_t>& shape);

// Standard matrix product of [m x k] and [k x n]. Each output element is
// accumulated over k in increasing order, so the result is bit-identical to
// the naive triple loop.
Tensor matmul(const Tensor& a, const Tensor& b);

// Causal 1-D convolution with stride 1. x is [L x d_in], kernels is
// [k x d_in x d_out]. The input is zero-padded with k-1 rows in front, so
// output row m depends only on input rows m-k+1 .. m.
Tensor conv1d_causal(const Tensor& x, const Tensor& kernels);

// Low-level kernels shared by the layers. All are accumulate-into forms with
// a fixed reduction order over the inner dimension.
namespace kernels {

// c[m x n] += a[m x k] * b[k x n]; lda/ldb/ldc are row strides.
void gemm_acc(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
              const double* b, std::size_t ldb, double* c, std::size_t ldc) noexcept;

// c[k x n] += a[m x k]^T * b[m x n].
void gemm_tn_acc(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
                 const double* b, std::size_t ldb, double* c, std::size_t ldc) noexcept;

// y[n] += alpha * x[n]
inline void axpy(std::size_t n, double alpha, const double* x, double* y) noexcept {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

// Dot product with four interleaved partial sums, combined as
// ((s0 + s1) + (s2 + s3)) + tail. Deterministic for a given n.
double dot(std::size_t n, const double* x, const double* y) noexcept;

// Transpose a [rows x cols] block into [cols x rows].
void transpose(std::size_t rows, std::size_t cols, const double* src, double* dst) noexcept;

}  // namespace kernels

}  // namespace glhnn
