// Acceptance runner. `glhnn_acceptance N` checks criterion N and prints one
// "criterion N: PASS|FAIL ..." line; with no argument every criterion runs.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "glhnn/cli.hpp"
#include "glhnn/dga_corpus.hpp"
#include "glhnn/evaluate.hpp"
#include "glhnn/hmm.hpp"
#include "glhnn/model.hpp"
#include "glhnn/train.hpp"
#include "gradient_suite.hpp"
#include "oracles.hpp"
#include "published_grid.hpp"

using namespace glhnn;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass = true;
    std::string detail;

    void fail(const std::string& why) {
        if (pass) detail.clear();
        pass = false;
        if (!detail.empty()) detail += "; ";
        detail += why;
    }
    void note(const std::string& s) {
        if (pass) detail = s;
    }
};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// ------------------------------------------------------------------ 1

Verdict gradients() {
    Verdict v;
    constexpr double kTol = 1e-4;
    const std::vector<std::pair<std::string, std::function<double(std::uint64_t)>>> checks{
        {"embedding", gradient_suite::embedding},
        {"dropout", gradient_suite::dropout},
        {"gcnn", gradient_suite::gcnn},
        {"maxpool", gradient_suite::maxpool},
        {"lstm", gradient_suite::lstm},
        {"dense", gradient_suite::dense},
        {"model", [](std::uint64_t s) { return gradient_suite::full_model(s, Architecture::glhnn); }},
        {"baseline", [](std::uint64_t s) { return gradient_suite::full_model(s, Architecture::lstm_baseline); }},
    };
    double worst = 0.0;
    for (const auto& [name, check] : checks) {
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            const double err = check(seed);
            worst = std::max(worst, err);
            if (!(err < kTol)) v.fail(name + " seed " + std::to_string(seed) + " rel err " + num(err));
        }
    }
    v.note("8 checks x 20 seeds, worst rel err " + num(worst));
    return v;
}

// ------------------------------------------------------------------ 2

Verdict oracles() {
    Verdict v;
    constexpr double kTol = 1e-12;
    Rng rng(2024);
    double worst = 0.0;
    auto track = [&](const std::string& what, double err) {
        worst = std::max(worst, err);
        if (!(err <= kTol)) v.fail(what + " diff " + num(err));
    };
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t len = 2 + rng.uniform_int(20), d = 1 + rng.uniform_int(6), k = 1 + rng.uniform_int(5);
        const Tensor x = oracle::random_tensor({len, d}, rng);
        const layers::GcnnParams p = gradient_suite::random_gcnn(k, d, rng, 1.0);
        track("gcnn", oracle::max_abs_diff(layers::gcnn_forward(x, p), oracle::gcnn(x, p)));

        const std::size_t r = 1 + rng.uniform_int(3), window = 1 + rng.uniform_int(4);
        const Tensor px = oracle::random_tensor({r * (1 + rng.uniform_int(8)), d}, rng);
        track("maxpool", oracle::max_abs_diff(layers::maxpool_forward(px, {window, r}),
                                              oracle::maxpool(px, window, r)));

        const std::size_t din = 1 + rng.uniform_int(5), hid = 1 + rng.uniform_int(5);
        layers::LstmParams lp{oracle::random_tensor({din + hid, 4 * hid}, rng), oracle::random_tensor({4 * hid}, rng)};
        const Tensor xs = oracle::random_tensor({1, din}, rng);
        const Tensor h0 = oracle::random_tensor({hid}, rng), c0 = oracle::random_tensor({hid}, rng);
        layers::LstmCache cache;
        const Tensor h1 = layers::lstm_forward(xs, lp, &cache, &h0, &c0);
        const auto step = oracle::lstm_step({xs.data().begin(), xs.data().end()}, {h0.data().begin(), h0.data().end()},
                                            {c0.data().begin(), c0.data().end()}, lp);
        for (std::size_t j = 0; j < hid; ++j) {
            track("lstm h", std::abs(h1[j] - step.h[j]));
            track("lstm c", std::abs(cache.cells.at(1, j) - step.c[j]));
        }

        std::string text;
        for (std::size_t i = 0, n = 1 + rng.uniform_int(30); i < n; ++i)
            text.push_back(Vocabulary::standard().symbols()[rng.uniform_int(38)]);
        const EncodedDomain enc = encode(text);
        const Tensor table = oracle::random_tensor({39, d}, rng);
        track("embedding",
              oracle::max_abs_diff(layers::embedding_forward(enc.indices, table), oracle::matmul(one_hot(enc), table)));
    }
    v.note("gcnn, maxpool, lstm step, embedding over 20 instances, worst diff " + num(worst));
    return v;
}

// ------------------------------------------------------------------ 3

Verdict shapes() {
    Verdict v;
    Rng rng(33);
    std::string summary;
    for (int trial = 0; trial < 5; ++trial) {
        ModelConfig c;
        c.stride = 1 + rng.uniform_int(4);
        c.seq_len = c.stride * (4 + rng.uniform_int(30));
        c.d_emb = 1 + rng.uniform_int(16);
        c.k_conv = 1 + rng.uniform_int(5);
        c.k_pool = 1 + rng.uniform_int(4);
        const GlhnnModel model(c, rng.next_u64());
        const EncodedDomain x = encode("shape", Vocabulary::standard(), c.seq_len);
        ForwardCache cache;
        Rng drop(1);
        model.forward(x, true, drop, &cache);
        const std::size_t L = c.seq_len, d = c.d_emb, S = L / c.stride;
        const std::vector<std::vector<std::size_t>> expect{{L, d}, {L, d}, {L, d}, {S, d}, {S, d}, {d}, {1}};
        if (cache.activation_shapes() != expect)
            v.fail("config L=" + std::to_string(L) + " r=" + std::to_string(c.stride) + " d=" + std::to_string(d));
        if (c.lstm_steps() != S) v.fail("lstm_steps " + std::to_string(c.lstm_steps()) + " != " + std::to_string(S));
        summary += (summary.empty() ? "" : " ") + std::to_string(L) + "/" + std::to_string(c.stride) + "->" +
                   std::to_string(S);
    }
    v.note("L/r->S: " + summary);
    return v;
}

// ------------------------------------------------------------------ 4

Verdict causality() {
    Verdict v;
    Rng rng(44);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t len = 2 + rng.uniform_int(30), d = 1 + rng.uniform_int(6), k = 1 + rng.uniform_int(5);
        const layers::GcnnParams p = gradient_suite::random_gcnn(k, d, rng, 1.0);
        const Tensor x = oracle::random_tensor({len, d}, rng);
        const std::size_t pos = rng.uniform_int(len);
        Tensor xp = x;
        for (std::size_t c = 0; c < d; ++c) xp.at(pos, c) += rng.uniform(0.5, 2.0);
        const Tensor a = layers::gcnn_forward(x, p), b = layers::gcnn_forward(xp, p);
        for (std::size_t m = 0; m < pos; ++m)
            for (std::size_t c = 0; c < d; ++c)
                if (a.at(m, c) != b.at(m, c)) {
                    v.fail("trial " + std::to_string(trial) + " row " + std::to_string(m) + " moved");
                    m = pos;
                    break;
                }
        bool moved = false;
        for (std::size_t c = 0; c < d; ++c) moved |= a.at(pos, c) != b.at(pos, c);
        if (!moved) v.fail("trial " + std::to_string(trial) + " perturbed row unchanged");
    }
    v.note("100 perturbations, earlier rows bit-identical");
    return v;
}

// ------------------------------------------------------------------ 5

Verdict fixed_points() {
    Verdict v;
    Rng rng(55);
    for (Architecture arch : {Architecture::glhnn, Architecture::lstm_baseline}) {
        for (int trial = 0; trial < 10; ++trial) {
            ModelConfig c;
            c.architecture = arch;
            c.d_emb = 1 + rng.uniform_int(32);
            c.seq_len = 64;
            const GlhnnModel zero = GlhnnModel::zeros(c);
            std::string text;
            for (std::size_t i = 0, n = 1 + rng.uniform_int(60); i < n; ++i)
                text.push_back(Vocabulary::standard().symbols()[rng.uniform_int(38)]);
            const EncodedDomain x = encode(text, Vocabulary::standard(), 64);
            Rng drop(rng.next_u64());
            if (zero.predict(x) != 0.5 || zero.forward(x, true, drop) != 0.5)
                v.fail(std::string(to_string(arch)) + " zero model output " + num(zero.predict(x)));
        }
    }
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t len = 1 + rng.uniform_int(20), d = 1 + rng.uniform_int(8), k = 1 + rng.uniform_int(5);
        const layers::GcnnParams p{Tensor({k, d, d}), Tensor({k, d, d}), Tensor({d}), Tensor({d})};
        const Tensor x = oracle::random_tensor({len, d}, rng);
        if (oracle::max_abs_diff(layers::gcnn_forward(x, p), x) != 0.0) v.fail("zero-kernel gcnn is not the identity");
    }
    v.note("zero model -> 0.5 exactly (both architectures); zero-kernel gcnn -> identity");
    return v;
}

// ------------------------------------------------------------------ 6

Verdict metric_cases() {
    Verdict v;
    struct Case {
        ConfusionMatrix cm;
        double acc, pre, rec, f1;
        bool dp, dr, df;
    };
    // Expected values counted by hand.
    const std::vector<Case> cases{
        {{50, 5, 5, 40}, 90.0 / 100, 50.0 / 55, 50.0 / 55, 10.0 / 11, false, false, false},
        {{10, 0, 0, 10}, 1.0, 1.0, 1.0, 1.0, false, false, false},
        {{0, 10, 10, 0}, 0.0, 0.0, 0.0, 0.0, false, false, true},
        {{3, 1, 2, 4}, 7.0 / 10, 3.0 / 4, 3.0 / 5, 2.0 / 3, false, false, false},
        {{8, 2, 0, 0}, 8.0 / 10, 8.0 / 10, 1.0, 8.0 / 9, false, false, false},
        {{1, 0, 9, 90}, 91.0 / 100, 1.0, 1.0 / 10, 2.0 / 11, false, false, false},
        {{45, 15, 5, 35}, 80.0 / 100, 3.0 / 4, 9.0 / 10, 9.0 / 11, false, false, false},
        {{0, 0, 7, 3}, 3.0 / 10, 0.0, 0.0, 0.0, true, false, true},
        {{0, 4, 0, 6}, 6.0 / 10, 0.0, 0.0, 0.0, false, true, true},
        {{0, 0, 0, 9}, 1.0, 0.0, 0.0, 0.0, true, true, true},
    };
    std::size_t degenerate = 0;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const Case& c = cases[i];
        const Metrics m = metrics(c.cm);
        auto close = [](double a, double b) { return std::abs(a - b) <= 1e-12; };
        if (!close(m.accuracy, c.acc) || !close(m.precision, c.pre) || !close(m.recall, c.rec) || !close(m.f1, c.f1) ||
            m.precision_degenerate != c.dp || m.recall_degenerate != c.dr || m.f1_degenerate != c.df)
            v.fail("matrix " + std::to_string(i + 1));
        degenerate += c.dp || c.dr || c.df;
    }
    v.note("10 matrices, " + std::to_string(degenerate) + " with degenerate denominators");
    return v;
}

// ------------------------------------------------------------------ 7

Verdict published_ranking() {
    Verdict v;
    const RankingResult r = mean_ranking(published::kAccuracy);
    for (std::size_t f = 0; f < published::kFamilies.size(); ++f)
        for (std::size_t m = 0; m < published::kModels.size(); ++m) {
            const std::size_t got = r.ranks[f][m].value_or(0);
            if (static_cast<int>(got) != published::kPrintedRanks[f][m])
                v.fail(std::string(published::kFamilies[f]) + "/" + std::string(published::kModels[m]) + " rank " +
                       std::to_string(got) + " vs printed " + std::to_string(published::kPrintedRanks[f][m]));
        }
    std::string means;
    for (std::size_t m = 0; m < published::kModels.size(); ++m) {
        means += (m ? " " : "") + num(std::round(r.mean_rank[m] * 100) / 100);
        if (!(std::abs(r.mean_rank[m] - published::kPrintedMeanRank[m]) <= 0.01))
            v.fail(std::string(published::kModels[m]) + " mean " + num(r.mean_rank[m]) + " vs printed " +
                   num(published::kPrintedMeanRank[m]));
    }
    v.note("mean ranks " + means);
    return v;
}

// ---------------------------------------------------------- 8, 9, 10

struct Protocol {
    ModelConfig model;
    TrainConfig train;
    std::size_t folds = 5;
};

LabeledCorpus make(Family family, std::size_t count, std::uint64_t seed, int label, const HmmModel* hmm = nullptr) {
    GeneratorConfig g;
    g.family = family;
    g.count = count;
    g.seed = seed;
    if (hmm) g.hmm = *hmm;
    return generate_corpus(g, label);
}

// One fold: early stopping on a stratified 1/5 of the training split, the
// best model scored on the untouched fold.
ConfusionMatrix run_fold(const LabeledCorpus& data, const Fold& fold, const Protocol& p, std::uint64_t seed) {
    const LabeledCorpus train_all = subset(data, fold.train);
    const Fold inner = stratified_kfold(train_all, 5, Rng::derive(seed, 0)).front();
    GlhnnModel model(p.model, Rng::derive(seed, 1));
    TrainConfig tc = p.train;
    tc.seed = Rng::derive(seed, 2);
    fit(model, subset(train_all, inner.train), subset(train_all, inner.val), tc);
    return classify_batch(model, subset(data, fold.val));
}

double cross_validate(const LabeledCorpus& data, const Protocol& p, std::uint64_t seed, std::string& log) {
    const auto folds = stratified_kfold(data, p.folds, seed);
    // Pooled over folds from integer counts.
    ConfusionMatrix pooled;
    for (std::size_t f = 0; f < folds.size(); ++f) {
        const ConfusionMatrix cm = run_fold(data, folds[f], p, Rng::derive(seed, 100 + f));
        log += (log.empty() ? "" : " ") + num(metrics(cm).accuracy);
        pooled += cm;
    }
    return metrics(pooled).accuracy;
}

LabeledCorpus task(const LabeledCorpus& benign, const LabeledCorpus& agd) {
    LabeledCorpus c = benign;
    c.merge(agd);
    return c;
}

Protocol small_protocol() {
    Protocol p;
    p.model.d_emb = 32;
    p.train.batch_size = 32;
    p.train.patience = 4;
    p.train.max_epochs = 15;
    return p;
}

Verdict separability() {
    Verdict v;
    constexpr std::size_t kPerClass = 600;
    Protocol p;  // default model
    p.train.batch_size = 32;
    p.train.patience = 3;
    p.train.max_epochs = 12;
    const LabeledCorpus data =
        task(make(Family::benign_like, kPerClass, 81, kBenign), make(Family::arithmetic, kPerClass, 82, kMalicious));
    std::string log;
    const double acc = cross_validate(data, p, 83, log);
    if (!(acc >= 0.98)) v.fail("pooled accuracy " + num(acc) + " < 0.98 (folds " + log + ")");
    v.note("d=128, " + std::to_string(kPerClass) + "/class, 5-fold pooled accuracy " + num(acc) + " (folds " + log + ")");
    return v;
}

Verdict difficulty() {
    Verdict v;
    constexpr std::size_t kPerClass = 300;
    const Protocol p = small_protocol();
    const LabeledCorpus benign = make(Family::benign_like, kPerClass, 91, kBenign);

    std::vector<std::string> names;
    for (const auto& r : make(Family::benign_like, 1500, 92, kBenign).records) names.push_back(r.domain);
    const HmmModel hmm = hmm_fit(names, 8, 50, 93).model;

    std::string la, lw, lh;
    const double arith = cross_validate(task(benign, make(Family::arithmetic, kPerClass, 94, kMalicious)), p, 97, la);
    const double words = cross_validate(task(benign, make(Family::wordlist, kPerClass, 95, kMalicious)), p, 97, lw);
    const double hmm_acc =
        cross_validate(task(benign, make(Family::hmm, kPerClass, 96, kMalicious, &hmm)), p, 97, lh);
    const std::string summary = "arithmetic " + num(arith) + ", wordlist " + num(words) + ", hmm " + num(hmm_acc);
    if (!(arith >= words)) v.fail("arithmetic < wordlist: " + summary);
    if (!(arith >= hmm_acc)) v.fail("arithmetic < hmm: " + summary);
    v.note(summary);
    return v;
}

Verdict baseline() {
    Verdict v;
    constexpr std::size_t kPerClass = 300;
    std::size_t wins = 0;
    std::string log;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const LabeledCorpus data = task(make(Family::benign_like, kPerClass, Rng::derive(seed, 10), kBenign),
                                        make(Family::wordlist, kPerClass, Rng::derive(seed, 11), kMalicious));
        const Fold fold = stratified_kfold(data, 5, Rng::derive(seed, 12)).front();
        Protocol g = small_protocol(), b = small_protocol();
        b.model.architecture = Architecture::lstm_baseline;
        const double acc_g = metrics(run_fold(data, fold, g, Rng::derive(seed, 13))).accuracy;
        const double acc_b = metrics(run_fold(data, fold, b, Rng::derive(seed, 13))).accuracy;
        wins += acc_b <= acc_g;
        log += (log.empty() ? "" : ", ") + std::string("seed ") + std::to_string(seed) + " " + num(acc_g) + " vs " +
               num(acc_b);
    }
    if (wins < 3) v.fail("baseline <= glhnn in " + std::to_string(wins) + "/5 seeds (" + log + ")");
    v.note("baseline <= glhnn in " + std::to_string(wins) + "/5 seeds (" + log + ")");
    return v;
}

// ------------------------------------------------------------------ 11

Verdict hmm_suite() {
    Verdict v;
    Rng rng(111);
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t states = 1 + rng.uniform_int(3);
        const std::string alphabet = std::string("abcd").substr(0, 1 + rng.uniform_int(4));
        const HmmModel m = oracle::random_hmm(states, alphabet, rng);
        std::string s;
        for (std::size_t i = 0, n = 1 + rng.uniform_int(5); i < n; ++i)
            s.push_back(alphabet[rng.uniform_int(alphabet.size())]);
        const double brute = oracle::hmm_path_sum(m, s);
        const double err = std::abs(std::exp(hmm_log_likelihood(m, s)) - brute);
        worst = std::max(worst, err);
        if (!(err <= 1e-10)) v.fail("path sum trial " + std::to_string(trial) + " diff " + num(err));
    }
    std::size_t fits = 0, steps = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Rng data_rng(seed);
        std::vector<std::string> data;
        for (int i = 0; i < 40; ++i) {
            std::string s;
            for (std::size_t j = 0, n = 2 + data_rng.uniform_int(10); j < n; ++j)
                s.push_back("abcdefg"[data_rng.uniform_int(7)]);
            data.push_back(s);
        }
        const auto r = hmm_fit(data, 2 + seed % 6, 40, seed);
        ++fits;
        for (std::size_t i = 1; i < r.log_likelihood.size(); ++i, ++steps)
            if (r.log_likelihood[i] < r.log_likelihood[i - 1] - 1e-9)
                v.fail("fit " + std::to_string(seed) + " iteration " + std::to_string(i) + " decreased");
    }
    v.note("200 path sums (worst diff " + num(worst) + "), " + std::to_string(fits) + " fits / " +
           std::to_string(steps) + " EM steps monotone");
    return v;
}

// ------------------------------------------------------------------ 12

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

// History files carry wall-clock seconds in their last column.
std::string without_wall_clock(const std::string& csv) {
    std::istringstream in(csv);
    std::string out;
    for (std::string line; std::getline(in, line);) out += line.substr(0, line.rfind(',')) + '\n';
    return out;
}

Verdict determinism() {
    Verdict v;
    const fs::path dir = fs::temp_directory_path() / "glhnn_acceptance_determinism";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const auto p = [&](const std::string& name) { return (dir / name).string(); };
    {
        std::ofstream top(dir / "top.csv");
        const char* names[] = {"google.com", "youtube.com", "facebook.com", "wikipedia.org", "amazon.com",
                               "twitter.com", "instagram.com", "linkedin.com", "netflix.com", "reddit.com"};
        for (int i = 0; i < 10; ++i) top << i + 1 << ',' << names[i] << '\n';
    }
    const std::vector<std::string> model{"--d-emb", "4", "--batch-size", "16", "--max-epochs", "2"};
    auto with = [](std::vector<std::string> a, const std::vector<std::string>& b) {
        a.insert(a.begin(), "glhnn");
        a.insert(a.end(), b.begin(), b.end());
        return a;
    };
    const std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>> commands{
        {with({"generate", "--family", "benign", "--seed", "1", "--count", "60", "--out", p("benign.tsv")}, {}),
         {p("benign.tsv")}},
        {with({"generate", "--family", "arithmetic", "--seed", "2", "--count", "60", "--out", p("agd.tsv")}, {}),
         {p("agd.tsv")}},
        {with({"generate", "--family", "wordlist", "--seed", "3", "--count", "60", "--out", p("words.tsv")}, {}),
         {p("words.tsv")}},
        {with({"hmm-fit", "--input", p("top.csv"), "--domain-list", "--states", "3", "--iterations", "5", "--seed",
               "4", "--out", p("hmm.json")},
              {}),
         {p("hmm.json")}},
        {with({"generate", "--family", "hmm", "--hmm", p("hmm.json"), "--seed", "5", "--count", "20", "--min-len", "3",
               "--out", p("hmm.tsv")},
              {}),
         {p("hmm.tsv")}},
        {with({"xval", "--benign", p("benign.tsv"), "--agd", p("agd.tsv"), "--repeats", "1", "--folds", "2",
               "--samples", "20", "--seed", "7", "--out-csv", p("xval.csv"), "--out-json", p("xval.json")},
              model),
         {p("xval.csv"), p("xval.json")}},
        {with({"report", "--input", p("xval.csv"), "--out-json", p("report.json"), "--manifest",
               p("report.manifest.json")},
              {}),
         {p("report.json")}},
    };
    std::vector<std::pair<fs::path, std::vector<std::string>>> manifests;
    std::ostringstream sink;
    for (const auto& [args, outputs] : commands) {
        const int code = cli::run(args, sink, sink);
        if (code != 0) {
            v.fail(args[1] + " exited " + std::to_string(code));
            continue;
        }
        const std::string primary = outputs.front();
        manifests.push_back({primary == p("report.json") ? p("report.manifest.json") : primary + ".manifest.json",
                             outputs});
    }
    if (!v.pass) return v;

    {
        std::ofstream both(dir / "both.tsv");
        both << slurp(dir / "benign.tsv") << slurp(dir / "agd.tsv");
    }
    const auto train = with({"train", "--train", p("both.tsv"), "--seed", "6", "--out", p("model.ckpt")}, model);
    if (cli::run(train, sink, sink) != 0) {
        v.fail("train failed");
        return v;
    }
    manifests.push_back({p("model.ckpt.manifest.json"), {p("model.ckpt"), p("model.ckpt.history.csv")}});
    {
        std::ofstream in(dir / "domains.txt");
        in << "google.com\nqwkzjdxv.net\nexample.org\n";
    }
    const auto classify = with({"classify", "--model", p("model.ckpt"), "--input", p("domains.txt"), "--output",
                                p("scores.tsv")},
                               {});
    if (cli::run(classify, sink, sink) != 0) {
        v.fail("classify failed");
        return v;
    }
    manifests.push_back({p("scores.tsv.manifest.json"), {p("scores.tsv")}});

    std::size_t compared = 0;
    for (const auto& [manifest_path, outputs] : manifests) {
        std::vector<std::string> before;
        for (const auto& o : outputs) before.push_back(slurp(o));
        auto manifest_before = nlohmann::json::parse(slurp(manifest_path));
        for (const auto& o : outputs) fs::remove(o);
        const int code = cli::replay(manifest_before, sink, sink);
        if (code != 0) {
            v.fail("replay of " + manifest_path.filename().string() + " exited " + std::to_string(code));
            continue;
        }
        for (std::size_t i = 0; i < outputs.size(); ++i) {
            std::string a = before[i], b = slurp(outputs[i]);
            if (outputs[i].ends_with(".history.csv")) {
                a = without_wall_clock(a);
                b = without_wall_clock(b);
            }
            if (a != b) v.fail(fs::path(outputs[i]).filename().string() + " differs on replay");
            ++compared;
        }
        auto manifest_after = nlohmann::json::parse(slurp(manifest_path));
        for (auto* m : {&manifest_before, &manifest_after}) {
            m->erase("started_at");
            m->erase("finished_at");
        }
        if (manifest_before != manifest_after)
            v.fail(manifest_path.filename().string() + " differs beyond timestamps");
    }
    v.note(std::to_string(manifests.size()) + " manifests replayed, " + std::to_string(compared) +
           " outputs byte-identical");
    fs::remove_all(dir);
    return v;
}

const std::vector<std::function<Verdict()>> kCriteria{
    gradients, oracles,    shapes,   causality, fixed_points, metric_cases,
    published_ranking, separability, difficulty, baseline, hmm_suite, determinism,
};

bool run_one(std::size_t n) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
        v = kCriteria.at(n - 1)();
    } catch (const std::exception& e) {
        v.fail(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << "criterion " << n << ": " << (v.pass ? "PASS" : "FAIL") << " (" << num(secs) << " s) " << v.detail
              << std::endl;
    return v.pass;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::size_t> which;
    for (int i = 1; i < argc; ++i) {
        const long n = std::strtol(argv[i], nullptr, 10);
        if (n < 1 || n > static_cast<long>(kCriteria.size())) {
            std::cerr << "usage: glhnn_acceptance [1-" << kCriteria.size() << "]...\n";
            return 2;
        }
        which.push_back(static_cast<std::size_t>(n));
    }
    if (which.empty())
        for (std::size_t n = 1; n <= kCriteria.size(); ++n) which.push_back(n);
    bool ok = true;
    for (std::size_t n : which) ok &= run_one(n);
    return ok ? 0 : 1;
}
