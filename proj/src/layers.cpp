#include "glhnn/layers.hpp"

#include <cmath>
#include <limits>

#include "glhnn/error.hpp"

namespace glhnn::layers {

using kernels::axpy;

double sigmoid(double x) noexcept {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// ---------------------------------------------------------------- embedding

Tensor embedding_forward(std::span<const std::uint8_t> indices, const Tensor& table) {
    if (table.rank() != 2) throw ShapeError("embedding table must be rank 2, got " + shape_string(table.shape()));
    const std::size_t width = table.dim(1);
    Tensor y({indices.size(), width});
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= table.dim(0)) {
            throw ShapeError("token index " + std::to_string(indices[i]) + " outside embedding table " +
                             shape_string(table.shape()));
        }
        const auto src = table.row(indices[i]);
        std::copy(src.begin(), src.end(), y.row(i).begin());
    }
    return y;
}

void embedding_backward(std::span<const std::uint8_t> indices, const Tensor& dy, Tensor& dtable) {
    const std::size_t width = dtable.dim(1);
    if (dy.rank() != 2 || dy.dim(0) != indices.size() || dy.dim(1) != width) {
        throw ShapeError("embedding gradient " + shape_string(dy.shape()) + " does not match table " +
                         shape_string(dtable.shape()));
    }
    for (std::size_t i = 0; i < indices.size(); ++i) {
        axpy(width, 1.0, dy.raw() + i * width, dtable.raw() + indices[i] * width);
    }
}

// ------------------------------------------------------------------ dropout

void validate(const DropoutConfig& cfg) {
    if (!(cfg.keep_prob > 0.0 && cfg.keep_prob <= 1.0)) {
        throw ConfigError("dropout keep_prob must be in (0, 1], got " + std::to_string(cfg.keep_prob));
    }
}

DropoutResult dropout_forward(const Tensor& x, const DropoutConfig& cfg, Rng& rng) {
    validate(cfg);
    DropoutResult r{x, Tensor(x.shape(), 1.0), 1.0};
    if (!cfg.training) return r;
    r.scale = cfg.inverted ? 1.0 / cfg.keep_prob : 1.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const bool keep = rng.bernoulli(cfg.keep_prob);
        r.mask[i] = keep ? 1.0 : 0.0;
        r.output[i] = keep ? x[i] * r.scale : 0.0;
    }
    return r;
}

Tensor dropout_apply(const Tensor& x, const Tensor& mask, double scale) {
    if (!x.same_shape(mask)) {
        throw ShapeError("dropout mask " + shape_string(mask.shape()) + " does not match " + shape_string(x.shape()));
    }
    Tensor y(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = mask[i] != 0.0 ? x[i] * scale : 0.0;
    return y;
}

// --------------------------------------------------------------------- gcnn

namespace {

// [k*d x 2d] matrix whose left half is W and right half is V, both viewed as
// [k*d x d].
Tensor pack_kernels(const Tensor& w, const Tensor& v) {
    const std::size_t rows = w.dim(0) * w.dim(1), width = w.dim(2);
    Tensor packed({rows, 2 * width});
    for (std::size_t r = 0; r < rows; ++r) {
        std::copy_n(w.raw() + r * width, width, packed.raw() + r * 2 * width);
        std::copy_n(v.raw() + r * width, width, packed.raw() + r * 2 * width + width);
    }
    return packed;
}

// Row m holds input rows m-k+1 .. m side by side; rows before 0 are zeros.
Tensor causal_columns(const Tensor& x, std::size_t k) {
    const std::size_t len = x.dim(0), width = x.dim(1);
    Tensor cols({len, k * width});
    for (std::size_t m = 0; m < len; ++m) {
        for (std::size_t n = 0; n < k; ++n) {
            if (m + n + 1 < k) continue;
            std::copy_n(x.raw() + (m + n + 1 - k) * width, width, cols.raw() + m * k * width + n * width);
        }
    }
    return cols;
}

}  // namespace

void validate(const GcnnParams& p) {
    if (p.w.rank() != 3 || p.w.shape() != p.v.shape() || p.w.dim(1) != p.w.dim(2)) {
        throw ShapeError("gcnn kernels must share shape [k x d x d]: W " + shape_string(p.w.shape()) + ", V " +
                         shape_string(p.v.shape()));
    }
    const std::vector<std::size_t> bias_shape{p.w.dim(2)};
    if (p.b.shape() != bias_shape || p.d.shape() != bias_shape) {
        throw ShapeError("gcnn biases must be " + shape_string(bias_shape));
    }
}

Tensor gcnn_forward(const Tensor& x, const GcnnParams& p, GcnnCache* cache) {
    validate(p);
    const std::size_t k = p.w.dim(0), width = p.w.dim(1);
    if (x.rank() != 2 || x.dim(1) != width) {
        throw ShapeError("gcnn input " + shape_string(x.shape()) + " does not match kernels " +
                         shape_string(p.w.shape()));
    }
    const std::size_t len = x.dim(0);
    Tensor cols = causal_columns(x, k);
    const Tensor packed = pack_kernels(p.w, p.v);
    Tensor both({len, 2 * width});
    kernels::gemm_acc(len, 2 * width, k * width, cols.raw(), k * width, packed.raw(), 2 * width, both.raw(),
                      2 * width);

    Tensor linear({len, width}), gate({len, width}), y({len, width});
    for (std::size_t m = 0; m < len; ++m) {
        const double* z = both.raw() + m * 2 * width;
        for (std::size_t c = 0; c < width; ++c) {
            const double a = z[c] + p.b[c];
            const double g = sigmoid(z[width + c] + p.d[c]);
            linear.at(m, c) = a;
            gate.at(m, c) = g;
            y.at(m, c) = x.at(m, c) + a * g;
        }
    }
    if (cache) *cache = GcnnCache{std::move(cols), std::move(linear), std::move(gate)};
    return y;
}

Tensor gcnn_backward(const Tensor& dy, const GcnnParams& p, const GcnnCache& cache, GcnnParams& grads) {
    const std::size_t k = p.w.dim(0), width = p.w.dim(1);
    const std::size_t len = cache.linear.dim(0);
    if (dy.shape() != cache.linear.shape()) {
        throw ShapeError("gcnn output gradient " + shape_string(dy.shape()) + " does not match cache " +
                         shape_string(cache.linear.shape()));
    }
    // Gradient w.r.t. the pre-bias convolution outputs, packed like `both`.
    Tensor dz({len, 2 * width});
    for (std::size_t m = 0; m < len; ++m) {
        double* out = dz.raw() + m * 2 * width;
        for (std::size_t c = 0; c < width; ++c) {
            const double g = cache.gate.at(m, c);
            const double up = dy.at(m, c);
            const double da = up * g;
            const double db = up * cache.linear.at(m, c) * g * (1.0 - g);
            out[c] = da;
            out[width + c] = db;
            grads.b[c] += da;
            grads.d[c] += db;
        }
    }

    // d[W|V] += cols^T dz, scattered back into the two kernel tensors.
    const std::size_t rows = k * width;
    Tensor dpacked({rows, 2 * width});
    kernels::gemm_tn_acc(len, 2 * width, rows, cache.columns.raw(), rows, dz.raw(), 2 * width, dpacked.raw(),
                         2 * width);
    for (std::size_t r = 0; r < rows; ++r) {
        axpy(width, 1.0, dpacked.raw() + r * 2 * width, grads.w.raw() + r * width);
        axpy(width, 1.0, dpacked.raw() + r * 2 * width + width, grads.v.raw() + r * width);
    }

    // dcols = dz [W|V]^T, then fold the columns back onto the input rows.
    const Tensor packed = pack_kernels(p.w, p.v);
    Tensor packed_t({2 * width, rows});
    kernels::transpose(rows, 2 * width, packed.raw(), packed_t.raw());
    Tensor dcols({len, rows});
    kernels::gemm_acc(len, rows, 2 * width, dz.raw(), 2 * width, packed_t.raw(), rows, dcols.raw(), rows);

    Tensor dx = dy;  // residual path
    for (std::size_t m = 0; m < len; ++m) {
        for (std::size_t n = 0; n < k; ++n) {
            if (m + n + 1 < k) continue;
            axpy(width, 1.0, dcols.raw() + m * rows + n * width, dx.raw() + (m + n + 1 - k) * width);
        }
    }
    return dx;
}

// ------------------------------------------------------------------ maxpool

void validate(const PoolConfig& cfg, std::size_t length) {
    if (cfg.window == 0 || cfg.stride == 0) throw ConfigError("pool window and stride must be positive");
    if (length % cfg.stride != 0) {
        throw ConfigError("pool stride " + std::to_string(cfg.stride) + " does not divide sequence length " +
                          std::to_string(length));
    }
}

Tensor maxpool_forward(const Tensor& x, const PoolConfig& cfg, PoolCache* cache) {
    if (x.rank() != 2) throw ShapeError("maxpool input must be rank 2, got " + shape_string(x.shape()));
    const std::size_t len = x.dim(0), width = x.dim(1);
    validate(cfg, len);
    const std::size_t out_rows = len / cfg.stride;
    const std::size_t pad_left = (cfg.window - 1) / 2;
    Tensor y({out_rows, width}, std::numeric_limits<double>::lowest());
    std::vector<std::uint32_t> argmax(out_rows * width, 0);
    for (std::size_t i = 0; i < out_rows; ++i) {
        // Window covers padded positions [i*r, i*r + window); real row = pos - pad_left.
        const std::size_t first = i * cfg.stride;
        bool seeded = false;
        for (std::size_t w = 0; w < cfg.window; ++w) {
            const std::size_t pos = first + w;
            if (pos < pad_left || pos - pad_left >= len) continue;
            const std::size_t src = pos - pad_left;
            for (std::size_t c = 0; c < width; ++c) {
                const double v = x.at(src, c);
                if (!seeded || v > y.at(i, c)) {
                    y.at(i, c) = v;
                    argmax[i * width + c] = static_cast<std::uint32_t>(src);
                }
            }
            seeded = true;
        }
    }
    if (cache) *cache = PoolCache{std::move(argmax), len};
    return y;
}

Tensor maxpool_backward(const Tensor& dy, const PoolCache& cache) {
    const std::size_t out_rows = dy.dim(0), width = dy.dim(1);
    if (cache.argmax.size() != out_rows * width) {
        throw ShapeError("maxpool gradient " + shape_string(dy.shape()) + " does not match cache");
    }
    Tensor dx({cache.input_rows, width});
    for (std::size_t i = 0; i < out_rows; ++i)
        for (std::size_t c = 0; c < width; ++c) dx.at(cache.argmax[i * width + c], c) += dy.at(i, c);
    return dx;
}

// --------------------------------------------------------------------- lstm

void validate(const LstmParams& p) {
    if (p.bias.rank() != 1 || p.bias.size() % 4 != 0 || p.w.rank() != 2 || p.w.dim(1) != p.bias.size() ||
        p.w.dim(0) <= p.bias.size() / 4) {
        throw ShapeError("lstm weights " + shape_string(p.w.shape()) + " and bias " + shape_string(p.bias.shape()) +
                         " do not form [(d_in+h) x 4h] / [4h]");
    }
}

Tensor lstm_forward(const Tensor& x, const LstmParams& p, LstmCache* cache, const Tensor* h0, const Tensor* c0) {
    validate(p);
    const std::size_t h = p.hidden(), d_in = p.input_width(), g4 = 4 * h;
    if (x.rank() != 2 || x.dim(1) != d_in) {
        throw ShapeError("lstm input " + shape_string(x.shape()) + " does not match weights " +
                         shape_string(p.w.shape()));
    }
    for (const Tensor* s : {h0, c0}) {
        if (s && (s->rank() != 1 || s->size() != h)) {
            throw ShapeError("lstm initial state must be [" + std::to_string(h) + "], got " + shape_string(s->shape()));
        }
    }
    const std::size_t steps = x.dim(0);

    // Input contribution for every step at once; the recurrent part follows.
    Tensor gates({steps, g4});
    kernels::gemm_acc(steps, g4, d_in, x.raw(), d_in, p.w.raw(), g4, gates.raw(), g4);
    const double* w_rec = p.w.raw() + d_in * g4;

    Tensor cells({steps + 1, h}), hidden({steps + 1, h}), tanh_c({steps, h});
    if (h0) std::copy_n(h0->raw(), h, hidden.raw());
    if (c0) std::copy_n(c0->raw(), h, cells.raw());

    for (std::size_t t = 0; t < steps; ++t) {
        double* z = gates.raw() + t * g4;
        const double* h_prev = hidden.raw() + t * h;
        kernels::gemm_acc(1, g4, h, h_prev, h, w_rec, g4, z, g4);
        const double* c_prev = cells.raw() + t * h;
        double* c_now = cells.raw() + (t + 1) * h;
        double* h_now = hidden.raw() + (t + 1) * h;
        double* tc = tanh_c.raw() + t * h;
        for (std::size_t j = 0; j < h; ++j) {
            const double ig = sigmoid(z[j] + p.bias[j]);
            const double fg = sigmoid(z[h + j] + p.bias[h + j]);
            const double og = sigmoid(z[2 * h + j] + p.bias[2 * h + j]);
            const double cand = std::tanh(z[3 * h + j] + p.bias[3 * h + j]);
            z[j] = ig;
            z[h + j] = fg;
            z[2 * h + j] = og;
            z[3 * h + j] = cand;
            c_now[j] = fg * c_prev[j] + ig * cand;
            tc[j] = std::tanh(c_now[j]);
            h_now[j] = og * tc[j];
        }
    }
    Tensor out({h});
    std::copy_n(hidden.raw() + steps * h, h, out.raw());
    if (cache) *cache = LstmCache{x, std::move(gates), std::move(cells), std::move(hidden), std::move(tanh_c)};
    return out;
}

Tensor lstm_backward(const Tensor& dh_last, const LstmParams& p, const LstmCache& cache, LstmParams& grads) {
    const std::size_t h = p.hidden(), d_in = p.input_width(), g4 = 4 * h;
    const std::size_t steps = cache.input.dim(0);
    if (dh_last.size() != h) throw ShapeError("lstm output gradient must have " + std::to_string(h) + " entries");

    // Recurrent weights transposed to [4h x h] so dh_{t-1} is a sum of rows.
    Tensor w_rec_t({g4, h});
    kernels::transpose(h, g4, p.w.raw() + d_in * g4, w_rec_t.raw());

    Tensor dpre({steps, g4});
    std::vector<double> dh(dh_last.data().begin(), dh_last.data().end());
    std::vector<double> dc(h, 0.0), dh_prev(h);
    for (std::size_t t = steps; t-- > 0;) {
        const double* gt = cache.gates.raw() + t * g4;
        const double* tc = cache.tanh_c.raw() + t * h;
        const double* c_prev = cache.cells.raw() + t * h;
        double* dz = dpre.raw() + t * g4;
        for (std::size_t j = 0; j < h; ++j) {
            const double ig = gt[j], fg = gt[h + j], og = gt[2 * h + j], cand = gt[3 * h + j];
            const double d_o = dh[j] * tc[j];
            const double d_c = dc[j] + dh[j] * og * (1.0 - tc[j] * tc[j]);
            dz[j] = d_c * cand * ig * (1.0 - ig);
            dz[h + j] = d_c * c_prev[j] * fg * (1.0 - fg);
            dz[2 * h + j] = d_o * og * (1.0 - og);
            dz[3 * h + j] = d_c * ig * (1.0 - cand * cand);
            dc[j] = d_c * fg;
        }
        std::fill(dh_prev.begin(), dh_prev.end(), 0.0);
        kernels::gemm_acc(1, h, g4, dz, g4, w_rec_t.raw(), h, dh_prev.data(), h);
        dh.swap(dh_prev);
    }

    for (std::size_t t = 0; t < steps; ++t) axpy(g4, 1.0, dpre.raw() + t * g4, grads.bias.raw());
    kernels::gemm_tn_acc(steps, g4, d_in, cache.input.raw(), d_in, dpre.raw(), g4, grads.w.raw(), g4);
    kernels::gemm_tn_acc(steps, g4, h, cache.hidden.raw(), h, dpre.raw(), g4, grads.w.raw() + d_in * g4, g4);

    Tensor w_in_t({g4, d_in});
    kernels::transpose(d_in, g4, p.w.raw(), w_in_t.raw());
    Tensor dx({steps, d_in});
    kernels::gemm_acc(steps, d_in, g4, dpre.raw(), g4, w_in_t.raw(), d_in, dx.raw(), d_in);
    return dx;
}

// -------------------------------------------------------------------- dense

void validate(const DenseParams& p) {
    if (p.w.rank() != 2 || p.w.dim(1) != 1 || p.b.shape() != std::vector<std::size_t>{1}) {
        throw ShapeError("dense weights must be [d x 1] with bias [1], got " + shape_string(p.w.shape()) + " / " +
                         shape_string(p.b.shape()));
    }
}

double dense_logit(const Tensor& x, const DenseParams& p) {
    validate(p);
    if (x.size() != p.w.dim(0)) {
        throw ShapeError("dense input " + shape_string(x.shape()) + " does not match weights " +
                         shape_string(p.w.shape()));
    }
    double z = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) z += x[i] * p.w[i];
    return z + p.b[0];
}

double dense_sigmoid_forward(const Tensor& x, const DenseParams& p) { return sigmoid(dense_logit(x, p)); }

Tensor dense_backward(const Tensor& x, double dlogit, const DenseParams& p, DenseParams& grads) {
    Tensor dx(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) {
        grads.w[i] += dlogit * x[i];
        dx[i] = dlogit * p.w[i];
    }
    grads.b[0] += dlogit;
    return dx;
}

}  // namespace glhnn::layers
