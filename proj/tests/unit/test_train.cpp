#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "doctest.h"
#include "glhnn/error.hpp"
#include "glhnn/train.hpp"

using namespace glhnn;

namespace {

// Benign names use only a-h, generated names only digits and s-z.
LabeledCorpus separable_corpus(std::size_t per_class, std::uint64_t seed) {
    Rng rng(seed);
    LabeledCorpus c;
    const std::string benign_chars = "abcdefgh", agd_chars = "stuvwxyz0123456789";
    for (int label : {kBenign, kMalicious}) {
        const std::string& chars = label == kBenign ? benign_chars : agd_chars;
        std::size_t made = 0;
        while (made < per_class) {
            std::string s;
            const std::size_t n = 3 + rng.uniform_int(8);
            for (std::size_t i = 0; i < n; ++i) s.push_back(chars[rng.uniform_int(chars.size())]);
            const std::size_t before = c.size();
            c.records.push_back({s, label, label ? "TID-A-N" : "benign", "toy"});
            c.deduplicate();
            if (c.size() > before) ++made;
        }
    }
    return c;
}

ModelConfig toy_model() {
    ModelConfig m;
    m.d_emb = 8;
    m.seq_len = 16;
    return m;
}

struct ToySplit {
    LabeledCorpus train, val;
};

ToySplit toy_split() {
    const LabeledCorpus all = separable_corpus(40, 3);
    ToySplit s;
    for (std::size_t i = 0; i < all.size(); ++i) (i % 4 == 0 ? s.val : s.train).records.push_back(all.records[i]);
    return s;
}

}  // namespace

TEST_SUITE("train") {

TEST_CASE("binary cross-entropy examples") {
    CHECK(bce_loss(0.5, 1) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(bce_loss(0.5, 0) == doctest::Approx(0.693147).epsilon(1e-6));
    CHECK(bce_loss(1.0, 1) < 1e-11);
    CHECK(bce_loss(0.0, 0) < 1e-11);
    CHECK(std::isfinite(bce_loss(0.0, 1)));
    CHECK(bce_loss(0.0, 1) == doctest::Approx(-std::log(1e-12)));
}

TEST_CASE("logit gradient of the loss matches finite differences") {
    Rng rng(4);
    for (int trial = 0; trial < 200; ++trial) {
        const double z = rng.uniform(-6, 6);
        const int y = static_cast<int>(rng.uniform_int(2));
        const double h = 1e-5;
        const auto f = [&](double v) { return bce_loss(1.0 / (1.0 + std::exp(-v)), y); };
        const double numeric = (f(z + h) - f(z - h)) / (2 * h);
        const double analytic = bce_logit_grad(1.0 / (1.0 + std::exp(-z)), y);
        CHECK(std::abs(numeric - analytic) / std::max(1.0, std::abs(analytic)) < 1e-6);
    }
}

TEST_CASE("adam leaves parameters alone under zero gradients") {
    Tensor w = Tensor::vector({1.0, -2.0, 3.0});
    const Tensor g({3});
    std::array<Tensor*, 1> params{&w};
    std::array<const Tensor*, 1> grads{&g};
    std::array<const Tensor*, 1> cparams{&w};
    AdamState adam(cparams, {});
    for (int i = 0; i < 100; ++i) adam.step(params, grads);
    CHECK(w == Tensor::vector({1.0, -2.0, 3.0}));
    CHECK(adam.steps() == 100);
}

TEST_CASE("first adam step moves each element by about lr") {
    Tensor w = Tensor::vector({0.0, 0.0, 0.0, 0.0});
    const Tensor g = Tensor::vector({0.5, -3.0, 1e-3, 40.0});
    std::array<Tensor*, 1> params{&w};
    std::array<const Tensor*, 1> grads{&g};
    std::array<const Tensor*, 1> cparams{&w};
    AdamState adam(cparams, {});
    adam.step(params, grads);
    for (std::size_t i = 0; i < 4; ++i) {
        // m_hat = g, v_hat = g^2, so the step is lr * g / (|g| + eps).
        const double expect = -0.001 * g[i] / (std::abs(g[i]) + 1e-8);
        CHECK(std::abs(w[i] - expect) < 1e-15);
        CHECK(std::abs(std::abs(w[i]) - 0.001) < 1e-7);
    }
    CHECK(adam.first_moments()[0].shape() == w.shape());
    CHECK(adam.second_moments()[0].shape() == w.shape());
}

TEST_CASE("adam minimises a convex quadratic") {
    Tensor theta = Tensor::vector({5.0});
    Tensor g({1});
    std::array<Tensor*, 1> params{&theta};
    std::array<const Tensor*, 1> grads{&g};
    std::array<const Tensor*, 1> cparams{&theta};
    AdamConfig cfg;
    cfg.lr = 0.1;
    AdamState adam(cparams, cfg);
    for (int i = 0; i < 500; ++i) {
        g[0] = 2.0 * theta[0];
        adam.step(params, grads);
    }
    CHECK(std::abs(theta[0]) < 0.01);
}

TEST_CASE("non-finite gradients are reported by name without an update") {
    Tensor a = Tensor::vector({1.0}), b = Tensor::vector({2.0});
    const Tensor ga = Tensor::vector({0.3});
    const Tensor gb = Tensor::vector({std::numeric_limits<double>::quiet_NaN()});
    std::array<Tensor*, 2> params{&a, &b};
    std::array<const Tensor*, 2> grads{&ga, &gb};
    std::array<const Tensor*, 2> cparams{&a, &b};
    const std::array<std::string, 2> names{"alpha", "beta"};
    AdamState adam(cparams, {});
    try {
        adam.step(params, grads, names);
        FAIL("expected NumericError");
    } catch (const NumericError& e) {
        CHECK(std::string(e.what()).find("beta") != std::string::npos);
    }
    CHECK(a[0] == 1.0);
    CHECK(b[0] == 2.0);
    CHECK(adam.steps() == 0);
}

TEST_CASE("train config validation") {
    TrainConfig t;
    CHECK_NOTHROW(t.validate());
    t.batch_size = 0;
    CHECK_THROWS_AS(t.validate(), ValidationError);
    t = TrainConfig{};
    t.lr = 0.0;
    CHECK_THROWS_AS(t.validate(), ValidationError);
    t = TrainConfig{};
    t.max_epochs = 0;
    CHECK_THROWS_AS(t.validate(), ValidationError);
}

TEST_CASE("separable toy corpus is learned perfectly") {
    const ToySplit s = toy_split();
    GlhnnModel model(toy_model(), 1);
    TrainConfig cfg;
    cfg.batch_size = 8;
    cfg.lr = 0.01;
    cfg.max_epochs = 20;
    cfg.patience = 20;
    cfg.seed = 2;
    const TrainResult r = fit(model, s.train, s.val, cfg);
    CHECK(r.history.size() == 20);
    CHECK(r.best_val_accuracy == 1.0);

    const auto val = encode_corpus(s.val, model.config());
    CHECK(accuracy(model, val) == r.best_val_accuracy);
    double best = 0.0;
    for (const auto& e : r.history) best = std::max(best, e.val_accuracy);
    CHECK(best == r.best_val_accuracy);
    CHECK(r.history[r.best_epoch - 1].val_accuracy == best);

    double first = 0.0, last = 0.0;
    for (std::size_t i = 0; i < 5; ++i) {
        first += r.history[i].train_loss;
        last += r.history[r.history.size() - 1 - i].train_loss;
    }
    CHECK(first > last);
}

TEST_CASE("patience zero runs exactly one epoch") {
    const ToySplit s = toy_split();
    GlhnnModel model(toy_model(), 1);
    TrainConfig cfg;
    cfg.batch_size = 16;
    cfg.patience = 0;
    const TrainResult r = fit(model, s.train, s.val, cfg);
    CHECK(r.history.size() == 1);
    CHECK(r.best_epoch == 1);
}

TEST_CASE("early stopping waits patience epochs after the best") {
    const ToySplit s = toy_split();
    GlhnnModel model(toy_model(), 1);
    TrainConfig cfg;
    cfg.batch_size = 8;
    cfg.lr = 0.01;
    cfg.patience = 3;
    cfg.max_epochs = 60;
    const TrainResult r = fit(model, s.train, s.val, cfg);
    REQUIRE(r.history.size() < 60);
    CHECK(r.history.size() == r.best_epoch + 3);
    for (std::size_t i = r.best_epoch; i < r.history.size(); ++i) CHECK(r.history[i].val_accuracy <= r.best_val_accuracy);
}

TEST_CASE("same seed reproduces the loss history bit for bit") {
    const ToySplit s = toy_split();
    TrainConfig cfg;
    cfg.batch_size = 8;
    cfg.max_epochs = 4;
    cfg.seed = 9;
    GlhnnModel a(toy_model(), 5), b(toy_model(), 5);
    const TrainResult ra = fit(a, s.train, s.val, cfg);
    const TrainResult rb = fit(b, s.train, s.val, cfg);
    REQUIRE(ra.history.size() == rb.history.size());
    for (std::size_t i = 0; i < ra.history.size(); ++i) {
        CHECK(ra.history[i].train_loss == rb.history[i].train_loss);
        CHECK(ra.history[i].val_accuracy == rb.history[i].val_accuracy);
    }
    const auto pa = a.params().named(), pb = b.params().named();
    for (std::size_t t = 0; t < pa.size(); ++t) CHECK(*pa[t].second == *pb[t].second);
}

TEST_CASE("fit rejects empty or single-class sets") {
    const ToySplit s = toy_split();
    GlhnnModel model(toy_model(), 1);
    LabeledCorpus one_class;
    for (const auto& r : s.train.records)
        if (r.label == kBenign) one_class.records.push_back(r);
    CHECK_THROWS_AS(fit(model, one_class, s.val, {}), ValidationError);
    CHECK_THROWS_AS(fit(model, s.train, LabeledCorpus{}, {}), ValidationError);
    TrainConfig zero;
    zero.batch_size = 0;
    CHECK_THROWS_AS(fit(model, s.train, s.val, zero), ValidationError);
}

TEST_CASE("history csv format") {
    std::ostringstream out;
    const std::vector<EpochRecord> h{{1, 0.5, 0.75, 1.25}, {2, 0.25, 1.0, 2.5}};
    write_history_csv(out, h);
    CHECK(out.str() == "epoch,train_loss,val_accuracy,wall_seconds\n1,0.5,0.75,1.250000\n2,0.25,1,2.500000\n");
}

}  // TEST_SUITE
