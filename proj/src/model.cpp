#include "glhnn/model.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

#include "glhnn/error.hpp"

namespace glhnn {

namespace {

std::size_t parse_size(std::string_view key, std::string_view value) {
    std::size_t out = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size()) {
        throw ConfigError("config key '" + std::string(key) + "' expects a non-negative integer, got '" +
                          std::string(value) + "'");
    }
    return out;
}

double parse_double(std::string_view key, std::string_view value) {
    try {
        std::size_t used = 0;
        const std::string s(value);
        const double v = std::stod(s, &used);
        if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError("config key '" + std::string(key) + "' expects a number, got '" + std::string(value) + "'");
}

bool parse_bool(std::string_view key, std::string_view value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError("config key '" + std::string(key) + "' expects true/false, got '" + std::string(value) + "'");
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Tensor uniform_tensor(std::vector<std::size_t> shape, double limit, Rng& rng) {
    Tensor t(std::move(shape));
    for (double& v : t.data()) v = rng.uniform(-limit, limit);
    return t;
}

}  // namespace

std::string_view to_string(Architecture a) noexcept {
    return a == Architecture::lstm_baseline ? "lstm_baseline" : "glhnn";
}

Architecture parse_architecture(std::string_view name) {
    if (name == "glhnn") return Architecture::glhnn;
    if (name == "lstm_baseline" || name == "lstm") return Architecture::lstm_baseline;
    throw ConfigError("unknown architecture '" + std::string(name) + "' (expected glhnn or lstm_baseline)");
}

// ------------------------------------------------------------------ config

void ModelConfig::validate() const {
    if (d_emb == 0 || k_conv == 0 || k_pool == 0 || stride == 0 || seq_len == 0 || vocab_size == 0) {
        throw ConfigError("model sizes must all be positive");
    }
    if (seq_len % stride != 0) {
        throw ConfigError("pool stride " + std::to_string(stride) + " does not divide sequence length " +
                          std::to_string(seq_len));
    }
    for (double p : {keep_prob_1, keep_prob_2}) {
        if (!(p > 0.0 && p <= 1.0)) throw ConfigError("dropout keep probability must be in (0, 1]");
    }
}

std::size_t ModelConfig::lstm_steps() const noexcept {
    return architecture == Architecture::glhnn ? seq_len / stride : seq_len;
}

void ModelConfig::set(std::string_view key, std::string_view value) {
    if (key == "d_emb") d_emb = parse_size(key, value);
    else if (key == "k_conv") k_conv = parse_size(key, value);
    else if (key == "k_pool") k_pool = parse_size(key, value);
    else if (key == "stride") stride = parse_size(key, value);
    else if (key == "keep_prob_1") keep_prob_1 = parse_double(key, value);
    else if (key == "keep_prob_2") keep_prob_2 = parse_double(key, value);
    else if (key == "inverted_dropout") inverted_dropout = parse_bool(key, value);
    else if (key == "seq_len") seq_len = parse_size(key, value);
    else if (key == "vocab_size") vocab_size = parse_size(key, value);
    else if (key == "align_right") align_right = parse_bool(key, value);
    else if (key == "architecture") architecture = parse_architecture(value);
    else throw ConfigError("unknown model config key '" + std::string(key) + "'");
}

std::vector<std::pair<std::string, std::string>> ModelConfig::entries() const {
    return {
        {"architecture", std::string(to_string(architecture))},
        {"d_emb", std::to_string(d_emb)},
        {"k_conv", std::to_string(k_conv)},
        {"k_pool", std::to_string(k_pool)},
        {"stride", std::to_string(stride)},
        {"keep_prob_1", format_double(keep_prob_1)},
        {"keep_prob_2", format_double(keep_prob_2)},
        {"inverted_dropout", inverted_dropout ? "true" : "false"},
        {"seq_len", std::to_string(seq_len)},
        {"vocab_size", std::to_string(vocab_size)},
        {"align_right", align_right ? "true" : "false"},
    };
}

// ------------------------------------------------------------------ params

std::vector<std::pair<std::string, Tensor*>> ModelParams::named() {
    std::vector<std::pair<std::string, Tensor*>> out;
    auto add = [&](const char* name, Tensor& t) {
        if (!t.empty()) out.emplace_back(name, &t);
    };
    add("embedding", embedding);
    add("gcnn.w", gcnn.w);
    add("gcnn.v", gcnn.v);
    add("gcnn.b", gcnn.b);
    add("gcnn.d", gcnn.d);
    add("lstm.w", lstm.w);
    add("lstm.bias", lstm.bias);
    add("dense.w", dense.w);
    add("dense.b", dense.b);
    return out;
}

std::vector<std::pair<std::string, const Tensor*>> ModelParams::named() const {
    std::vector<std::pair<std::string, const Tensor*>> out;
    for (auto& [name, t] : const_cast<ModelParams*>(this)->named()) out.emplace_back(name, t);
    return out;
}

ModelParams ModelParams::zeros_like() const {
    ModelParams z = *this;
    z.fill(0.0);
    return z;
}

void ModelParams::fill(double value) {
    for (auto& [name, t] : named()) t->fill(value);
}

ModelParams& ModelParams::operator+=(const ModelParams& other) {
    auto mine = named();
    auto theirs = other.named();
    if (mine.size() != theirs.size()) throw ShapeError("parameter sets differ in tensor count");
    for (std::size_t i = 0; i < mine.size(); ++i) *mine[i].second += *theirs[i].second;
    return *this;
}

ModelParams& ModelParams::operator*=(double scale) {
    for (auto& [name, t] : named()) *t *= scale;
    return *this;
}

std::vector<std::vector<std::size_t>> ForwardCache::activation_shapes() const {
    return {embedded.shape(),      drop1.output.shape(), gated.shape(), pooled.shape(),
            drop2.output.shape(), last_hidden.shape(),  {1}};
}

// ------------------------------------------------------------------- model

GlhnnModel::GlhnnModel(ModelConfig config, std::uint64_t init_seed) : config_(config) {
    config_.validate();
    const std::size_t d = config_.d_emb, v = config_.vocab_size, k = config_.k_conv;
    Rng rng(init_seed);
    params_.embedding = uniform_tensor({v, d}, 0.05, rng);
    if (config_.architecture == Architecture::glhnn) {
        const double conv_limit = std::sqrt(6.0 / static_cast<double>(k * d + k * d));
        params_.gcnn.w = uniform_tensor({k, d, d}, conv_limit, rng);
        params_.gcnn.v = uniform_tensor({k, d, d}, conv_limit, rng);
        params_.gcnn.b = Tensor({d});
        params_.gcnn.d = Tensor({d});
    }
    const double lstm_limit = std::sqrt(6.0 / static_cast<double>((d + d) + 4 * d));
    params_.lstm.w = uniform_tensor({2 * d, 4 * d}, lstm_limit, rng);
    params_.lstm.bias = Tensor({4 * d});
    for (std::size_t j = d; j < 2 * d; ++j) params_.lstm.bias[j] = 1.0;
    params_.dense.w = uniform_tensor({d, 1}, 0.05, rng);
    params_.dense.b = Tensor({1});
}

GlhnnModel::GlhnnModel(ModelConfig config, ModelParams params) : config_(config), params_(std::move(params)) {
    config_.validate();
    const std::size_t d = config_.d_emb, v = config_.vocab_size, k = config_.k_conv;
    auto expect = [](const Tensor& t, std::vector<std::size_t> shape, const char* name) {
        if (t.shape() != shape) {
            throw ConfigError(std::string("parameter ") + name + " has shape " + shape_string(t.shape()) +
                              ", config requires " + shape_string(shape));
        }
    };
    expect(params_.embedding, {v, d}, "embedding");
    if (config_.architecture == Architecture::glhnn) {
        expect(params_.gcnn.w, {k, d, d}, "gcnn.w");
        expect(params_.gcnn.v, {k, d, d}, "gcnn.v");
        expect(params_.gcnn.b, {d}, "gcnn.b");
        expect(params_.gcnn.d, {d}, "gcnn.d");
    } else if (!params_.gcnn.w.empty() || !params_.gcnn.v.empty()) {
        throw ConfigError("lstm_baseline model must not carry GCNN parameters");
    }
    expect(params_.lstm.w, {2 * d, 4 * d}, "lstm.w");
    expect(params_.lstm.bias, {4 * d}, "lstm.bias");
    expect(params_.dense.w, {d, 1}, "dense.w");
    expect(params_.dense.b, {1}, "dense.b");
}

GlhnnModel GlhnnModel::zeros(ModelConfig config) {
    GlhnnModel m(config, std::uint64_t{0});
    m.params_.fill(0.0);
    return m;
}

void GlhnnModel::check_input(const EncodedDomain& x) const {
    if (x.length() != config_.seq_len) {
        throw ConfigError("encoded length " + std::to_string(x.length()) + " does not match model sequence length " +
                          std::to_string(config_.seq_len));
    }
    for (std::uint8_t idx : x.indices) {
        if (idx >= config_.vocab_size) {
            throw ConfigError("token index " + std::to_string(idx) + " outside model vocabulary of size " +
                              std::to_string(config_.vocab_size));
        }
    }
    if (x.original_length > x.length()) throw ValidationError("original_length exceeds the encoded length");
    for (std::size_t i = x.original_length; i < x.length(); ++i) {
        if (x.indices[i] != Vocabulary::pad_index()) {
            throw ValidationError("non-padding token at position " + std::to_string(i) + " after original_length " +
                                  std::to_string(x.original_length));
        }
    }
}

std::vector<std::uint8_t> GlhnnModel::model_tokens(const EncodedDomain& x) const {
    if (!config_.align_right) return x.indices;
    std::vector<std::uint8_t> out(x.length(), Vocabulary::pad_index());
    std::copy_n(x.indices.begin(), x.original_length, out.end() - static_cast<std::ptrdiff_t>(x.original_length));
    return out;
}

double GlhnnModel::forward(const EncodedDomain& x, bool training, Rng& rng, ForwardCache* cache) const {
    check_input(x);
    ForwardCache local;
    ForwardCache& c = cache ? *cache : local;
    c.model_version = version_;
    c.training = training;
    c.tokens = model_tokens(x);

    const layers::DropoutConfig drop1{config_.keep_prob_1, training, config_.inverted_dropout};
    const layers::DropoutConfig drop2{config_.keep_prob_2, training, config_.inverted_dropout};
    const bool glhnn = config_.architecture == Architecture::glhnn;

    c.embedded = layers::embedding_forward(c.tokens, params_.embedding);
    c.drop1 = layers::dropout_forward(c.embedded, drop1, rng);

    if (glhnn) {
        const std::size_t len = config_.seq_len, width = config_.d_emb, k = config_.k_conv;
        const std::size_t pad = len - x.original_length;
        if (!training && !cache && pad > k) {
            // Padding rows whose causal window holds only padding see
            // identical inputs, so their outputs are bit-identical. One
            // representative row is computed for the whole run.
            c.gated = Tensor({len, width});
            if (config_.align_right) {
                // Rows k-1 .. pad-1 repeat; keep k padding rows then the text.
                const std::size_t rows = k + x.original_length;
                Tensor compact({rows, width});
                std::copy_n(c.drop1.output.raw(), k * width, compact.raw());
                std::copy_n(c.drop1.output.raw() + pad * width, x.original_length * width, compact.raw() + k * width);
                const Tensor out = layers::gcnn_forward(compact, params_.gcnn);
                std::copy_n(out.raw(), k * width, c.gated.raw());
                for (std::size_t r = k; r < pad; ++r) std::copy_n(out.raw() + (k - 1) * width, width, c.gated.raw() + r * width);
                std::copy_n(out.raw() + k * width, x.original_length * width, c.gated.raw() + pad * width);
            } else {
                // Rows from original_length + k - 1 onwards repeat.
                const std::size_t rows = x.original_length + k;
                Tensor prefix({rows, width});
                std::copy_n(c.drop1.output.raw(), rows * width, prefix.raw());
                const Tensor out = layers::gcnn_forward(prefix, params_.gcnn);
                std::copy_n(out.raw(), rows * width, c.gated.raw());
                for (std::size_t r = rows; r < len; ++r) std::copy_n(out.raw() + (rows - 1) * width, width, c.gated.raw() + r * width);
            }
        } else {
            c.gated = layers::gcnn_forward(c.drop1.output, params_.gcnn, &c.gcnn);
        }
        c.pooled = layers::maxpool_forward(c.gated, {config_.k_pool, config_.stride}, &c.pool);
    } else {
        c.gated = c.drop1.output;
        c.pooled = c.gated;
    }
    c.drop2 = layers::dropout_forward(c.pooled, drop2, rng);
    c.last_hidden = layers::lstm_forward(c.drop2.output, params_.lstm, &c.lstm);
    c.logit = layers::dense_logit(c.last_hidden, params_.dense);
    c.probability = layers::sigmoid(c.logit);
    return c.probability;
}

double GlhnnModel::predict(const EncodedDomain& x) const {
    Rng unused(0);
    return forward(x, false, unused);
}

void GlhnnModel::backward(const ForwardCache& cache, int label, ModelParams& grads, double scale) const {
    if (cache.model_version != version_) {
        throw UsageError("backward called with a forward cache from an older parameter version");
    }
    if (label != 0 && label != 1) throw UsageError("label must be 0 or 1");
    if (cache.tokens.size() != config_.seq_len || cache.lstm.input.empty()) {
        throw UsageError("forward cache is incomplete");
    }
    const bool glhnn = config_.architecture == Architecture::glhnn;
    if (glhnn && cache.gcnn.columns.empty()) throw UsageError("forward cache lacks GCNN activations");

    // d BCE / d logit = p - y.
    const double dlogit = scale * (cache.probability - static_cast<double>(label));
    const Tensor d_hidden = layers::dense_backward(cache.last_hidden, dlogit, params_.dense, grads.dense);
    const Tensor d_drop2_out = layers::lstm_backward(d_hidden, params_.lstm, cache.lstm, grads.lstm);
    const Tensor d_pooled = layers::dropout_apply(d_drop2_out, cache.drop2.mask, cache.drop2.scale);
    Tensor d_drop1_out;
    if (glhnn) {
        const Tensor d_gated = layers::maxpool_backward(d_pooled, cache.pool);
        d_drop1_out = layers::gcnn_backward(d_gated, params_.gcnn, cache.gcnn, grads.gcnn);
    } else {
        d_drop1_out = d_pooled;
    }
    const Tensor d_embedded = layers::dropout_apply(d_drop1_out, cache.drop1.mask, cache.drop1.scale);
    layers::embedding_backward(cache.tokens, d_embedded, grads.embedding);
}

ModelParams GlhnnModel::gradients(const ForwardCache& cache, int label, double scale) const {
    ModelParams g = params_.zeros_like();
    backward(cache, label, g, scale);
    return g;
}

}  // namespace glhnn
