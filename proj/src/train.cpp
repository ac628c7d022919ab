#include "glhnn/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

#include "glhnn/error.hpp"

namespace glhnn {

namespace {

constexpr double kProbClamp = 1e-12;

std::vector<const Tensor*> const_view(const std::vector<std::pair<std::string, Tensor*>>& named) {
    std::vector<const Tensor*> out;
    for (const auto& [name, t] : named) out.push_back(t);
    return out;
}

void require_both_classes(std::span<const TrainingExample> data, const char* which) {
    if (data.empty()) throw ValidationError(std::string(which) + " set is empty");
    const bool has_pos = std::any_of(data.begin(), data.end(), [](const auto& e) { return e.label == 1; });
    const bool has_neg = std::any_of(data.begin(), data.end(), [](const auto& e) { return e.label == 0; });
    if (!has_pos || !has_neg) throw ValidationError(std::string(which) + " set must contain both classes");
}

}  // namespace

double bce_loss(double p, int label) {
    const double q = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
    return label == 1 ? -std::log(q) : -std::log(1.0 - q);
}

// -------------------------------------------------------------------- adam

AdamState::AdamState(std::span<const Tensor* const> params, AdamConfig cfg) : cfg_(cfg) {
    for (const Tensor* p : params) {
        m_.push_back(Tensor::zeros_like(*p));
        v_.push_back(Tensor::zeros_like(*p));
    }
}

void AdamState::step(std::span<Tensor* const> params, std::span<const Tensor* const> grads,
                     std::span<const std::string> names) {
    if (params.size() != m_.size() || grads.size() != m_.size()) {
        throw ShapeError("adam: expected " + std::to_string(m_.size()) + " parameter/gradient tensors");
    }
    for (std::size_t i = 0; i < grads.size(); ++i) {
        if (!grads[i]->same_shape(m_[i]) || !params[i]->same_shape(m_[i])) {
            throw ShapeError("adam: tensor " + std::to_string(i) + " changed shape");
        }
        if (!grads[i]->all_finite()) {
            const std::string name = i < names.size() ? names[i] : "#" + std::to_string(i);
            throw NumericError("non-finite gradient in parameter '" + name + "'");
        }
    }
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        double* theta = params[i]->raw();
        const double* g = grads[i]->raw();
        double* m = m_[i].raw();
        double* v = v_[i].raw();
        for (std::size_t j = 0; j < m_[i].size(); ++j) {
            m[j] = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * g[j];
            v[j] = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * g[j] * g[j];
            const double m_hat = m[j] / c1;
            const double v_hat = v[j] / c2;
            theta[j] -= cfg_.lr * m_hat / (std::sqrt(v_hat) + cfg_.eps);
        }
    }
}

// ------------------------------------------------------------------- train

void TrainConfig::validate() const {
    if (batch_size == 0) throw ValidationError("batch size must be positive");
    if (!(lr > 0.0) || !std::isfinite(lr)) throw ValidationError("learning rate must be positive");
    if (max_epochs == 0) throw ValidationError("max_epochs must be positive");
    if (clip_norm < 0.0) throw ValidationError("clip norm must be non-negative");
}

std::vector<TrainingExample> encode_corpus(const LabeledCorpus& corpus, const ModelConfig& config) {
    std::vector<TrainingExample> out;
    out.reserve(corpus.size());
    for (const auto& r : corpus.records) out.push_back({encode(r.domain, Vocabulary::standard(), config.seq_len), r.label});
    return out;
}

double accuracy(const GlhnnModel& model, std::span<const TrainingExample> data) {
    if (data.empty()) throw ValidationError("accuracy of an empty set");
    std::size_t correct = 0;
    for (const auto& e : data) {
        const int predicted = model.predict(e.x) >= 0.5 ? 1 : 0;
        correct += predicted == e.label ? 1 : 0;
    }
    return static_cast<double>(correct) / static_cast<double>(data.size());
}

TrainResult fit(GlhnnModel& model, std::span<const TrainingExample> train, std::span<const TrainingExample> val,
                const TrainConfig& cfg, const EpochCallback& on_epoch) {
    cfg.validate();
    require_both_classes(train, "training");
    require_both_classes(val, "validation");

    Rng rng(cfg.seed);
    auto named = model.mutable_params().named();
    std::vector<std::string> names;
    std::vector<Tensor*> param_ptrs;
    for (auto& [name, t] : named) {
        names.push_back(name);
        param_ptrs.push_back(t);
    }
    AdamState adam(const_view(named), AdamConfig{cfg.lr});

    ModelParams grads = model.params().zeros_like();
    auto grad_named = grads.named();
    const auto grad_ptrs = const_view(grad_named);

    TrainResult result;
    ModelParams best = model.params();
    double best_acc = -1.0;
    std::size_t stale = 0;

    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    ForwardCache cache;
    const auto start = std::chrono::steady_clock::now();

    for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.uniform_int(i)]);

        double loss_sum = 0.0;
        for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
            const double inv = 1.0 / static_cast<double>(end - begin);
            grads.fill(0.0);
            for (std::size_t b = begin; b < end; ++b) {
                const auto& ex = train[order[b]];
                const double p = model.forward(ex.x, true, rng, &cache);
                loss_sum += bce_loss(p, ex.label);
                model.backward(cache, ex.label, grads, inv);
            }
            if (cfg.clip_norm > 0.0) {
                double sq = 0.0;
                for (const Tensor* g : grad_ptrs)
                    for (double v : g->data()) sq += v * v;
                const double norm = std::sqrt(sq);
                if (norm > cfg.clip_norm) grads *= cfg.clip_norm / norm;
            }
            // mutable_params() bumps the version so stale caches are rejected.
            (void)model.mutable_params();
            adam.step(param_ptrs, grad_ptrs, names);
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_loss = loss_sum / static_cast<double>(train.size());
        if (!std::isfinite(rec.train_loss)) throw NumericError("training loss diverged at epoch " + std::to_string(epoch));
        rec.val_accuracy = accuracy(model, val);
        rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        result.history.push_back(rec);
        if (on_epoch) on_epoch(rec);

        if (rec.val_accuracy > best_acc) {
            best_acc = rec.val_accuracy;
            best = model.params();
            result.best_epoch = epoch;
            stale = 0;
        } else {
            ++stale;
        }
        if (stale >= cfg.patience) break;
    }
    model.mutable_params() = std::move(best);
    result.best_val_accuracy = best_acc;
    return result;
}

TrainResult fit(GlhnnModel& model, const LabeledCorpus& train, const LabeledCorpus& val, const TrainConfig& cfg,
                const EpochCallback& on_epoch) {
    const auto tr = encode_corpus(train, model.config());
    const auto va = encode_corpus(val, model.config());
    return fit(model, tr, va, cfg, on_epoch);
}

void write_history_csv(std::ostream& out, std::span<const EpochRecord> history) {
    out << "epoch,train_loss,val_accuracy,wall_seconds\n";
    char buf[128];
    for (const auto& r : history) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.6f\n", r.epoch, r.train_loss, r.val_accuracy, r.wall_seconds);
        out << buf;
    }
}

}  // namespace glhnn
