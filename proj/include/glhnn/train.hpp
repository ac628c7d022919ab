#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "glhnn/corpus.hpp"
#include "glhnn/model.hpp"
#include "glhnn/tensor.hpp"

namespace glhnn {

// Binary cross-entropy on a probability clamped to [1e-12, 1 - 1e-12].
double bce_loss(double p, int label);
// Gradient of bce_loss(sigm(z), y) w.r.t. the logit z: p - y.
inline double bce_logit_grad(double p, int label) noexcept { return p - static_cast<double>(label); }

struct AdamConfig {
    double lr = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Moment estimates for one parameter set.
class AdamState {
public:
    AdamState() = default;
    AdamState(std::span<const Tensor* const> params, AdamConfig cfg);

    const AdamConfig& config() const noexcept { return cfg_; }
    std::uint64_t steps() const noexcept { return t_; }
    const std::vector<Tensor>& first_moments() const noexcept { return m_; }
    const std::vector<Tensor>& second_moments() const noexcept { return v_; }

    // One bias-corrected update:
    //   m <- b1 m + (1-b1) g,  v <- b2 v + (1-b2) g^2,
    //   theta <- theta - lr * m_hat / (sqrt(v_hat) + eps)
    // with m_hat = m / (1 - b1^t), v_hat = v / (1 - b2^t) and t incremented
    // first. Throws NumericError naming the tensor if a gradient is not
    // finite; no parameter is modified in that case.
    void step(std::span<Tensor* const> params, std::span<const Tensor* const> grads,
              std::span<const std::string> names = {});

private:
    AdamConfig cfg_;
    std::uint64_t t_ = 0;
    std::vector<Tensor> m_;
    std::vector<Tensor> v_;
};

struct TrainConfig {
    std::size_t batch_size = 256;
    double lr = 0.001;
    std::size_t patience = 10;  // epochs without strict val-accuracy improvement
    std::size_t max_epochs = 200;
    std::uint64_t seed = 0;
    double clip_norm = 5.0;  // global gradient norm; 0 disables clipping

    // Throws ValidationError on zero batch size, non-positive lr or
    // max_epochs == 0.
    void validate() const;
};

struct EpochRecord {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double val_accuracy = 0.0;
    double wall_seconds = 0.0;
};

struct TrainResult {
    std::vector<EpochRecord> history;
    std::size_t best_epoch = 0;
    double best_val_accuracy = 0.0;
};

struct TrainingExample {
    EncodedDomain x;
    int label = 0;
};

std::vector<TrainingExample> encode_corpus(const LabeledCorpus& corpus, const ModelConfig& config);

// Accuracy at threshold 0.5 (inclusive) in inference mode.
double accuracy(const GlhnnModel& model, std::span<const TrainingExample> data);

// Mini-batch Adam on the mean BCE of each batch. The training set is
// reshuffled every epoch from the seed; validation accuracy is measured after
// each epoch and training stops once `patience` consecutive epochs fail to
// beat the best accuracy strictly (or at max_epochs). The model is left
// holding the parameters of the best epoch. Throws ValidationError if either
// set is empty or lacks one of the classes.
using EpochCallback = std::function<void(const EpochRecord&)>;
TrainResult fit(GlhnnModel& model, std::span<const TrainingExample> train, std::span<const TrainingExample> val,
                const TrainConfig& cfg, const EpochCallback& on_epoch = {});
TrainResult fit(GlhnnModel& model, const LabeledCorpus& train, const LabeledCorpus& val, const TrainConfig& cfg,
                const EpochCallback& on_epoch = {});

// "epoch,train_loss,val_accuracy,wall_seconds" with %.17g numbers.
void write_history_csv(std::ostream& out, std::span<const EpochRecord> history);

}  // namespace glhnn
