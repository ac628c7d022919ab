#pragma once

// The six layer types of the classifier. Each layer is a pair of free
// functions: forward fills an optional cache, backward consumes it and
// *accumulates* parameter gradients into a caller-owned gradient struct (so
// a mini-batch can sum into one buffer) while returning the input gradient.

#include <cstdint>
#include <span>
#include <vector>

#include "glhnn/rng.hpp"
#include "glhnn/tensor.hpp"

namespace glhnn::layers {

double sigmoid(double x) noexcept;

// ---------------------------------------------------------------- embedding

// Row lookup: output row i is table row indices[i]. Equivalent to the
// one-hot matrix times the table.
Tensor embedding_forward(std::span<const std::uint8_t> indices, const Tensor& table);
void embedding_backward(std::span<const std::uint8_t> indices, const Tensor& dy, Tensor& dtable);

// ------------------------------------------------------------------ dropout

struct DropoutConfig {
    double keep_prob = 0.75;  // Bernoulli parameter of the keep mask
    bool training = false;    // identity when false
    bool inverted = true;     // divide kept values by keep_prob; false = bare mask
};

struct DropoutResult {
    Tensor output;
    Tensor mask;         // 0/1 entries, same shape as the input
    double scale = 1.0;  // factor applied to kept values
};

// Throws ConfigError unless keep_prob is in (0, 1].
void validate(const DropoutConfig& cfg);

// Draws a fresh mask in training mode (row-major order, one draw per
// element); returns the input with an all-ones mask otherwise.
DropoutResult dropout_forward(const Tensor& x, const DropoutConfig& cfg, Rng& rng);
// Applies a fixed mask; used by backward and by frozen-mask gradient checks.
Tensor dropout_apply(const Tensor& x, const Tensor& mask, double scale);

// --------------------------------------------------------------------- gcnn

// Gated causal convolution with a residual path:
//   y = x + (conv(x, W) + b) * sigm(conv(x, V) + d)
// W, V are [k x d x d]; the biases are per channel and broadcast over rows.
struct GcnnParams {
    Tensor w;
    Tensor v;
    Tensor b;
    Tensor d;
};

struct GcnnCache {
    Tensor columns;  // [L x k*d] causal im2col of the input
    Tensor linear;   // conv(x, W) + b
    Tensor gate;     // sigm(conv(x, V) + d)
};

void validate(const GcnnParams& p);
Tensor gcnn_forward(const Tensor& x, const GcnnParams& p, GcnnCache* cache = nullptr);
Tensor gcnn_backward(const Tensor& dy, const GcnnParams& p, const GcnnCache& cache, GcnnParams& grads);

// ------------------------------------------------------------------ maxpool

// Max over windows of `window` rows advanced by `stride`, with "same"
// padding: floor((window-1)/2) padding rows on the left, the rest on the
// right, giving L/stride output rows. Padding never wins a max.
struct PoolConfig {
    std::size_t window = 2;
    std::size_t stride = 2;
};

struct PoolCache {
    std::vector<std::uint32_t> argmax;  // [S x channels] source row of each output
    std::size_t input_rows = 0;
};

void validate(const PoolConfig& cfg, std::size_t length);
Tensor maxpool_forward(const Tensor& x, const PoolConfig& cfg, PoolCache* cache = nullptr);
// Routes each output gradient to its argmax row (leftmost on ties).
Tensor maxpool_backward(const Tensor& dy, const PoolCache& cache);

// --------------------------------------------------------------------- lstm

// w is [(d_in + h) x 4h]: rows 0..d_in-1 multiply x_t, the remaining rows
// multiply h_{t-1}. Columns are four blocks of width h in the order
// input, forget, output, candidate.
struct LstmParams {
    Tensor w;
    Tensor bias;  // [4h]

    std::size_t hidden() const { return bias.size() / 4; }
    std::size_t input_width() const { return w.dim(0) - hidden(); }
};

struct LstmCache {
    Tensor input;   // [S x d_in]
    Tensor gates;   // [S x 4h] post-activation i, f, o, candidate
    Tensor cells;   // [(S+1) x h], row 0 is c_0
    Tensor hidden;  // [(S+1) x h], row 0 is h_0
    Tensor tanh_c;  // [S x h]
};

void validate(const LstmParams& p);
// Runs all steps and returns the last hidden state. h0/c0 default to zero.
Tensor lstm_forward(const Tensor& x, const LstmParams& p, LstmCache* cache = nullptr,
                    const Tensor* h0 = nullptr, const Tensor* c0 = nullptr);
// Backpropagation through time from a gradient on the last hidden state.
Tensor lstm_backward(const Tensor& dh_last, const LstmParams& p, const LstmCache& cache, LstmParams& grads);

// -------------------------------------------------------------------- dense

// Single-output affine map followed by the logistic sigmoid.
struct DenseParams {
    Tensor w;  // [d x 1]
    Tensor b;  // [1]
};

void validate(const DenseParams& p);
double dense_logit(const Tensor& x, const DenseParams& p);
double dense_sigmoid_forward(const Tensor& x, const DenseParams& p);
// `dlogit` is the loss gradient w.r.t. the pre-sigmoid value.
Tensor dense_backward(const Tensor& x, double dlogit, const DenseParams& p, DenseParams& grads);

}  // namespace glhnn::layers
