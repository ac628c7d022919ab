#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "glhnn/hash.hpp"
#include "glhnn/layers.hpp"
#include "glhnn/preprocess.hpp"
#include "glhnn/rng.hpp"
#include "glhnn/tensor.hpp"

namespace glhnn {

enum class Architecture : std::uint32_t {
    glhnn = 0,          // embedding, dropout, GCNN, max-pool, dropout, LSTM, dense
    lstm_baseline = 1,  // same graph with GCNN and pooling replaced by identity
};

std::string_view to_string(Architecture a) noexcept;
Architecture parse_architecture(std::string_view name);

struct ModelConfig {
    std::size_t d_emb = 128;
    std::size_t k_conv = 4;
    std::size_t k_pool = 2;
    std::size_t stride = 2;
    double keep_prob_1 = 0.75;
    double keep_prob_2 = 0.75;
    bool inverted_dropout = true;
    std::size_t seq_len = kSequenceLength;
    std::size_t vocab_size = 39;
    Architecture architecture = Architecture::glhnn;
    // Move the characters of each encoded domain to the end of the window
    // before embedding, so the padding precedes the text and the last LSTM
    // step reads the last character.
    bool align_right = true;

    // Throws ConfigError on non-positive sizes, stride not dividing seq_len,
    // or keep probabilities outside (0, 1].
    void validate() const;
    // Rows fed to the LSTM: seq_len / stride, or seq_len for the baseline.
    std::size_t lstm_steps() const noexcept;
    // Sets one field from a "key=value" style pair; unknown keys throw.
    void set(std::string_view key, std::string_view value);
    std::vector<std::pair<std::string, std::string>> entries() const;

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// All trainable tensors. The GCNN members are empty for the LSTM baseline.
struct ModelParams {
    Tensor embedding;  // [vocab x d]
    layers::GcnnParams gcnn;
    layers::LstmParams lstm;
    layers::DenseParams dense;

    // Non-empty tensors in a fixed order, with stable names.
    std::vector<std::pair<std::string, Tensor*>> named();
    std::vector<std::pair<std::string, const Tensor*>> named() const;
    // Same shapes, all zeros.
    ModelParams zeros_like() const;
    void fill(double value);
    ModelParams& operator+=(const ModelParams& other);
    ModelParams& operator*=(double scale);
};

// Activations of one forward pass, kept for backward().
struct ForwardCache {
    std::uint64_t model_version = 0;
    bool training = false;
    std::vector<std::uint8_t> tokens;
    Tensor embedded;              // y1 [L x d]
    layers::DropoutResult drop1;  // y2 = drop1.output
    layers::GcnnCache gcnn;
    Tensor gated;  // y3 [L x d]
    layers::PoolCache pool;
    Tensor pooled;                // y4 [S x d]
    layers::DropoutResult drop2;  // y5 = drop2.output
    layers::LstmCache lstm;
    Tensor last_hidden;  // y6 [d]
    double logit = 0.0;
    double probability = 0.5;  // y7

    // Shapes of y1 .. y7 in data-flow order.
    std::vector<std::vector<std::size_t>> activation_shapes() const;
};

class GlhnnModel {
public:
    // Randomly initialised parameters drawn from Rng(init_seed):
    // embedding and dense weights U[-0.05, 0.05]; conv and LSTM kernels
    // U[-s, s] with s = sqrt(6 / (fan_in + fan_out)); LSTM forget bias 1,
    // other biases 0.
    GlhnnModel(ModelConfig config, std::uint64_t init_seed);
    GlhnnModel(ModelConfig config, ModelParams params);

    static GlhnnModel zeros(ModelConfig config);

    const ModelConfig& config() const noexcept { return config_; }
    const ModelParams& params() const noexcept { return params_; }
    // Mutable access invalidates outstanding forward caches.
    ModelParams& mutable_params() noexcept {
        ++version_;
        return params_;
    }
    std::uint64_t version() const noexcept { return version_; }

    // Probability that `x` is algorithmically generated. With training off
    // dropout is the identity and `rng` is not touched.
    double forward(const EncodedDomain& x, bool training, Rng& rng, ForwardCache* cache = nullptr) const;
    // Inference-mode forward.
    double predict(const EncodedDomain& x) const;

    // Adds (scale * d loss / d theta) into `grads` for the binary
    // cross-entropy loss of the cached forward pass against `label`.
    // Throws UsageError if the cache was produced before the parameters last
    // changed or by a different architecture.
    void backward(const ForwardCache& cache, int label, ModelParams& grads, double scale = 1.0) const;
    // Convenience: fresh gradients for one example.
    ModelParams gradients(const ForwardCache& cache, int label, double scale = 1.0) const;

private:
    void check_input(const EncodedDomain& x) const;
    std::vector<std::uint8_t> model_tokens(const EncodedDomain& x) const;

    ModelConfig config_;
    ModelParams params_;
    std::uint64_t version_ = 1;
};

// ------------------------------------------------------------- checkpoints

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Little-endian binary container:
//   "GLHNNCKP"                      8-byte magic
//   u32 format version
//   u32 n_config, n_config x (u32 len, key bytes, u32 len, value bytes)
//   u32 n_tensors, n_tensors x (u32 len, name, u32 rank, rank x u64 dim,
//                                 prod(dims) x f64 as IEEE-754 bits)
//   u64 FNV-1a 64 checksum of every preceding byte
void save_checkpoint(const GlhnnModel& model, const std::filesystem::path& path);
// Throws IoError for unreadable, truncated or corrupt files and ConfigError
// for version or vocabulary mismatches. Never returns a partial model.
GlhnnModel load_checkpoint(const std::filesystem::path& path, std::size_t expected_vocab_size = 39);

}  // namespace glhnn
