#include "glhnn/evaluate.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>

#include "glhnn/error.hpp"
#include "glhnn/rng.hpp"

namespace glhnn {

Metrics metrics(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw InputError("metrics of an empty confusion matrix");
    Metrics m;
    const auto d = [](std::size_t v) { return static_cast<double>(v); };
    m.accuracy = d(cm.tp + cm.tn) / d(cm.total());
    if (cm.tp + cm.fp == 0) m.precision_degenerate = true;
    else m.precision = d(cm.tp) / d(cm.tp + cm.fp);
    if (cm.tp + cm.fn == 0) m.recall_degenerate = true;
    else m.recall = d(cm.tp) / d(cm.tp + cm.fn);
    if (m.precision + m.recall == 0.0) m.f1_degenerate = true;
    else m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    return m;
}

ConfusionMatrix confusion_from_scores(std::span<const double> probabilities, std::span<const int> labels,
                                      double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0)) throw std::invalid_argument("threshold must lie in (0, 1)");
    if (probabilities.size() != labels.size()) throw std::invalid_argument("one label per probability required");
    if (probabilities.empty()) throw InputError("nothing to classify");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const bool positive = probabilities[i] >= threshold;
        if (labels[i] == kMalicious) (positive ? cm.tp : cm.fn) += 1;
        else (positive ? cm.fp : cm.tn) += 1;
    }
    return cm;
}

ConfusionMatrix classify_batch(const GlhnnModel& model, const LabeledCorpus& corpus, double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0)) throw std::invalid_argument("threshold must lie in (0, 1)");
    if (corpus.empty()) throw InputError("classify_batch: empty corpus");
    std::vector<double> probs;
    std::vector<int> labels;
    probs.reserve(corpus.size());
    labels.reserve(corpus.size());
    for (const auto& r : corpus.records) {
        probs.push_back(model.predict(encode(r.domain, Vocabulary::standard(), model.config().seq_len)));
        labels.push_back(r.label);
    }
    return confusion_from_scores(probs, labels, threshold);
}

std::vector<PairedSample> bootstrap_sets(const LabeledCorpus& benign, const LabeledCorpus& agd, std::size_t n_repeats,
                                         std::size_t n_samples, std::uint64_t seed) {
    if (benign.empty() || agd.empty()) throw InputError("bootstrap_sets: both corpora must be non-empty");
    if (n_samples == 0) throw InputError("bootstrap_sets: n_samples must be positive");
    std::vector<PairedSample> out;
    out.reserve(n_repeats);
    for (std::size_t r = 0; r < n_repeats; ++r) {
        Rng rng(Rng::derive(seed, r));
        PairedSample pair;
        pair.benign.root_seed = pair.agd.root_seed = seed;
        for (auto [src, dst] : {std::pair{&benign, &pair.benign}, std::pair{&agd, &pair.agd}}) {
            dst->records.reserve(n_samples);
            for (std::size_t i = 0; i < n_samples; ++i) dst->records.push_back(src->records[rng.uniform_int(src->size())]);
        }
        out.push_back(std::move(pair));
    }
    return out;
}

std::vector<Fold> stratified_kfold(const LabeledCorpus& corpus, std::size_t k, std::uint64_t seed) {
    if (k < 2) throw InputError("stratified_kfold: k must be at least 2");
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < corpus.size(); ++i) by_class[corpus.records[i].label].push_back(i);
    if (by_class.empty()) throw InputError("stratified_kfold: empty corpus");

    std::vector<std::vector<std::size_t>> val(k);
    Rng rng(seed);
    // Each class continues the round-robin where the previous one stopped so
    // that fold sizes also stay within one of each other.
    std::size_t next_fold = 0;
    for (auto& [label, members] : by_class) {
        if (members.size() < k) {
            throw InputError("stratified_kfold: class " + std::to_string(label) + " has " +
                             std::to_string(members.size()) + " members, fewer than k=" + std::to_string(k));
        }
        for (std::size_t i = members.size(); i > 1; --i) std::swap(members[i - 1], members[rng.uniform_int(i)]);
        for (std::size_t idx : members) {
            val[next_fold].push_back(idx);
            next_fold = (next_fold + 1) % k;
        }
    }

    std::vector<Fold> folds(k);
    for (std::size_t f = 0; f < k; ++f) {
        std::sort(val[f].begin(), val[f].end());
        folds[f].val = val[f];
        for (std::size_t g = 0; g < k; ++g)
            if (g != f) folds[f].train.insert(folds[f].train.end(), val[g].begin(), val[g].end());
        std::sort(folds[f].train.begin(), folds[f].train.end());
    }
    return folds;
}

LabeledCorpus subset(const LabeledCorpus& corpus, std::span<const std::size_t> indices) {
    LabeledCorpus out;
    out.root_seed = corpus.root_seed;
    out.records.reserve(indices.size());
    for (std::size_t i : indices) out.records.push_back(corpus.records.at(i));
    return out;
}

RankingResult mean_ranking(const std::vector<std::vector<double>>& accuracy_table) {
    if (accuracy_table.empty() || accuracy_table.front().empty()) throw InputError("mean_ranking: empty table");
    const std::size_t models = accuracy_table.front().size();
    RankingResult result;
    result.mean_rank.assign(models, 0.0);
    for (const auto& row : accuracy_table) {
        if (row.size() != models) throw InputError("mean_ranking: rows differ in length");
        std::vector<std::optional<std::size_t>> ranks(models);
        const bool all_equal = std::all_of(row.begin(), row.end(), [&](double v) { return v == row.front(); });
        if (!all_equal) {
            for (std::size_t j = 0; j < models; ++j) {
                // 1 + number of models strictly better.
                const auto better = std::count_if(row.begin(), row.end(), [&](double v) { return v > row[j]; });
                ranks[j] = static_cast<std::size_t>(better) + 1;
                result.mean_rank[j] += static_cast<double>(*ranks[j]);
            }
            ++result.ranked_rows;
        }
        result.ranks.push_back(std::move(ranks));
    }
    if (result.ranked_rows == 0) throw InputError("mean_ranking: every row is a full tie, nothing to rank");
    for (double& m : result.mean_rank) m /= static_cast<double>(result.ranked_rows);
    return result;
}

}  // namespace glhnn
