#include "glhnn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#if defined(__AVX2__)
#include <immintrin.h>
#endif

#include "glhnn/error.hpp"

namespace glhnn {

namespace {

std::size_t element_count(const std::vector<std::size_t>& shape) {
    if (shape.empty() || shape.size() > 3) {
        throw ShapeError("tensor rank must be 1..3, got shape " + shape_string(shape));
    }
    std::size_t n = 1;
    for (std::size_t d : shape) {
        if (d == 0) throw ShapeError("tensor dimensions must be positive: " + shape_string(shape));
        n *= d;
    }
    return n;
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), data_(element_count(shape_), fill) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (element_count(shape_) != data_.size()) {
        throw ShapeError("data length " + std::to_string(data_.size()) + " does not match shape " +
                         shape_string(shape_));
    }
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t m = rows.size();
    const std::size_t n = m == 0 ? 0 : rows.begin()->size();
    std::vector<double> data;
    data.reserve(m * n);
    for (const auto& r : rows) {
        if (r.size() != n) throw ShapeError("ragged matrix literal");
        data.insert(data.end(), r.begin(), r.end());
    }
    return Tensor({m, n}, std::move(data));
}

Tensor Tensor::vector(std::initializer_list<double> values) {
    return Tensor({values.size()}, std::vector<double>(values));
}

std::size_t Tensor::dim(std::size_t axis) const {
    if (axis >= shape_.size()) {
        throw ShapeError("axis " + std::to_string(axis) + " out of range for " + shape_string(shape_));
    }
    return shape_[axis];
}

void Tensor::fill(double value) noexcept { std::fill(data_.begin(), data_.end(), value); }

bool Tensor::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Tensor& Tensor::operator+=(const Tensor& other) {
    if (shape_ != other.shape_) {
        throw ShapeError("cannot add " + shape_string(other.shape_) + " to " + shape_string(shape_));
    }
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

Tensor& Tensor::operator*=(double scale) noexcept {
    for (double& v : data_) v *= scale;
    return *this;
}

std::string shape_string(const std::vector<std::size_t>& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += "x";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
        throw ShapeError("matmul shape mismatch: " + shape_string(a.shape()) + " x " +
                         shape_string(b.shape()));
    }
    const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
    Tensor c({m, n});
    kernels::gemm_acc(m, n, k, a.raw(), k, b.raw(), n, c.raw(), n);
    return c;
}

Tensor conv1d_causal(const Tensor& x, const Tensor& kernels) {
    if (x.rank() != 2 || kernels.rank() != 3 || kernels.dim(1) != x.dim(1)) {
        throw ShapeError("conv1d_causal shape mismatch: input " + shape_string(x.shape()) +
                         ", kernels " + shape_string(kernels.shape()));
    }
    const std::size_t len = x.dim(0), d_in = x.dim(1);
    const std::size_t k = kernels.dim(0), d_out = kernels.dim(2);
    Tensor y({len, d_out});
    // Tap n of the kernel reads input row m - (k-1) + n; rows before 0 are the
    // zero padding and contribute nothing.
    for (std::size_t m = 0; m < len; ++m) {
        double* out = y.raw() + m * d_out;
        for (std::size_t n = 0; n < k; ++n) {
            if (m + n + 1 < k) continue;
            const std::size_t src = m + n + 1 - k;
            const double* xr = x.raw() + src * d_in;
            const double* kr = kernels.raw() + n * d_in * d_out;
            for (std::size_t d = 0; d < d_in; ++d) kernels::axpy(d_out, xr[d], kr + d * d_out, out);
        }
    }
    return y;
}

namespace kernels {

namespace {

// c[m x n] += sum_q A(i, q) * b[q, j] where A(i, q) = a[i * ars + q * aqs].
// Each c(i, j) is updated as c + a*b for q = 0, 1, ... in order, whether it
// falls in a vector tile or in the scalar remainder, so results do not depend
// on the tiling.
void gemm_strided(std::size_t m, std::size_t n, std::size_t kdim, const double* a, std::size_t ars,
                  std::size_t aqs, const double* b, std::size_t ldb, double* c, std::size_t ldc) noexcept {
    std::size_t i = 0;
#if defined(__AVX2__)
    constexpr std::size_t kRows = 4;
    for (; i + kRows <= m; i += kRows) {
        const double* a0 = a + i * ars;
        std::size_t j = 0;
        for (; j + 8 <= n; j += 8) {
            double* c0 = c + i * ldc + j;
            __m256d acc[kRows][2];
            for (std::size_t r = 0; r < kRows; ++r) {
                acc[r][0] = _mm256_loadu_pd(c0 + r * ldc);
                acc[r][1] = _mm256_loadu_pd(c0 + r * ldc + 4);
            }
            for (std::size_t q = 0; q < kdim; ++q) {
                const double* br = b + q * ldb + j;
                const __m256d b0 = _mm256_loadu_pd(br);
                const __m256d b1 = _mm256_loadu_pd(br + 4);
                const double* aq = a0 + q * aqs;
                for (std::size_t r = 0; r < kRows; ++r) {
                    const __m256d av = _mm256_broadcast_sd(aq + r * ars);
                    acc[r][0] = _mm256_add_pd(acc[r][0], _mm256_mul_pd(av, b0));
                    acc[r][1] = _mm256_add_pd(acc[r][1], _mm256_mul_pd(av, b1));
                }
            }
            for (std::size_t r = 0; r < kRows; ++r) {
                _mm256_storeu_pd(c0 + r * ldc, acc[r][0]);
                _mm256_storeu_pd(c0 + r * ldc + 4, acc[r][1]);
            }
        }
        for (; j < n; ++j) {
            for (std::size_t r = 0; r < kRows; ++r) {
                double s = c[(i + r) * ldc + j];
                for (std::size_t q = 0; q < kdim; ++q) s += a0[r * ars + q * aqs] * b[q * ldb + j];
                c[(i + r) * ldc + j] = s;
            }
        }
    }
    for (; i < m; ++i) {
        const double* ar = a + i * ars;
        double* cr = c + i * ldc;
        std::size_t j = 0;
        for (; j + 16 <= n; j += 16) {
            __m256d acc0 = _mm256_loadu_pd(cr + j), acc1 = _mm256_loadu_pd(cr + j + 4);
            __m256d acc2 = _mm256_loadu_pd(cr + j + 8), acc3 = _mm256_loadu_pd(cr + j + 12);
            for (std::size_t q = 0; q < kdim; ++q) {
                const double* br = b + q * ldb + j;
                const __m256d av = _mm256_broadcast_sd(ar + q * aqs);
                acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(av, _mm256_loadu_pd(br)));
                acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(av, _mm256_loadu_pd(br + 4)));
                acc2 = _mm256_add_pd(acc2, _mm256_mul_pd(av, _mm256_loadu_pd(br + 8)));
                acc3 = _mm256_add_pd(acc3, _mm256_mul_pd(av, _mm256_loadu_pd(br + 12)));
            }
            _mm256_storeu_pd(cr + j, acc0);
            _mm256_storeu_pd(cr + j + 4, acc1);
            _mm256_storeu_pd(cr + j + 8, acc2);
            _mm256_storeu_pd(cr + j + 12, acc3);
        }
        for (; j < n; ++j) {
            double s = cr[j];
            for (std::size_t q = 0; q < kdim; ++q) s += ar[q * aqs] * b[q * ldb + j];
            cr[j] = s;
        }
    }
#endif
    for (; i < m; ++i) {
        const double* ar = a + i * ars;
        double* cr = c + i * ldc;
        for (std::size_t q = 0; q < kdim; ++q) axpy(n, ar[q * aqs], b + q * ldb, cr);
    }
}

}  // namespace

void gemm_acc(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
              const double* b, std::size_t ldb, double* c, std::size_t ldc) noexcept {
    gemm_strided(m, n, k, a, lda, 1, b, ldb, c, ldc);
}

void gemm_tn_acc(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
                 const double* b, std::size_t ldb, double* c, std::size_t ldc) noexcept {
    // Row p of the result reads column p of a; the reduction runs over the m
    // rows of a and b.
    gemm_strided(k, n, m, a, 1, lda, b, ldb, c, ldc);
}

double dot(std::size_t n, const double* x, const double* y) noexcept {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 += x[i] * y[i];
        s1 += x[i + 1] * y[i + 1];
        s2 += x[i + 2] * y[i + 2];
        s3 += x[i + 3] * y[i + 3];
    }
    double tail = 0.0;
    for (; i < n; ++i) tail += x[i] * y[i];
    return ((s0 + s1) + (s2 + s3)) + tail;
}

void transpose(std::size_t rows, std::size_t cols, const double* src, double* dst) noexcept {
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) dst[j * rows + i] = src[i * cols + j];
}

}  // namespace kernels

}  // namespace glhnn
