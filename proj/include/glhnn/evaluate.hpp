#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "glhnn/corpus.hpp"
#include "glhnn/model.hpp"

namespace glhnn {

// Positive class = algorithmically generated.
struct ConfusionMatrix {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t tn = 0;

    std::size_t total() const noexcept { return tp + fp + fn + tn; }
    ConfusionMatrix& operator+=(const ConfusionMatrix& o) noexcept {
        tp += o.tp;
        fp += o.fp;
        fn += o.fn;
        tn += o.tn;
        return *this;
    }
    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

struct Metrics {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    // Set when the corresponding denominator was zero and the metric was
    // reported as 0.
    bool precision_degenerate = false;
    bool recall_degenerate = false;
    bool f1_degenerate = false;
};

// acc = (tp+tn)/N, pre = tp/(tp+fp), rec = tp/(tp+fn),
// f1 = 2 pre rec / (pre + rec). Throws InputError on an empty matrix.
Metrics metrics(const ConfusionMatrix& cm);

// Scores every record in inference mode; p >= threshold counts as positive.
// Throws InputError on an empty corpus and std::invalid_argument unless
// 0 < threshold < 1.
ConfusionMatrix classify_batch(const GlhnnModel& model, const LabeledCorpus& corpus, double threshold = 0.5);
// Same rule applied to precomputed probabilities.
ConfusionMatrix confusion_from_scores(std::span<const double> probabilities, std::span<const int> labels,
                                      double threshold = 0.5);

struct EvalReport {
    ConfusionMatrix cm;
    Metrics m;
    std::size_t repeat = 0;
    std::size_t fold = 0;
    std::string dga_class;
};

struct PairedSample {
    LabeledCorpus benign;
    LabeledCorpus agd;
};

// n_repeats pairs, each side drawn with replacement (n_samples records) from
// its corpus. Resampled records keep their domain strings, so a side can
// contain repeats.
std::vector<PairedSample> bootstrap_sets(const LabeledCorpus& benign, const LabeledCorpus& agd, std::size_t n_repeats,
                                         std::size_t n_samples, std::uint64_t seed);

struct Fold {
    std::vector<std::size_t> train;  // record indices into the corpus
    std::vector<std::size_t> val;
};

// Stratified k-fold split. Each class is shuffled with the seed and dealt
// round-robin over the folds, so per-fold class counts differ from the exact
// proportion by less than one. Throws InputError if k < 2 or a present class
// has fewer than k members.
std::vector<Fold> stratified_kfold(const LabeledCorpus& corpus, std::size_t k, std::uint64_t seed);
LabeledCorpus subset(const LabeledCorpus& corpus, std::span<const std::size_t> indices);

// Competition ranking ("1224"): in each row the highest accuracy is rank 1
// and tied values share the smallest rank of their group. Rows where every
// model has the same value are left unranked and excluded from the mean.
struct RankingResult {
    std::vector<std::vector<std::optional<std::size_t>>> ranks;  // [row][model]
    std::vector<double> mean_rank;                               // [model]
    std::size_t ranked_rows = 0;
};
// Throws InputError for an empty or ragged table and if no row is ranked.
RankingResult mean_ranking(const std::vector<std::vector<double>>& accuracy_table);

}  // namespace glhnn
