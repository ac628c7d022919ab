#include "glhnn/hmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "json.hpp"

#include "glhnn/error.hpp"
#include "glhnn/rng.hpp"

namespace glhnn {

namespace {

void normalise(std::vector<double>& row) {
    double s = 0.0;
    for (double v : row) s += v;
    if (s <= 0.0) {
        std::fill(row.begin(), row.end(), 1.0 / static_cast<double>(row.size()));
        return;
    }
    for (double& v : row) v /= s;
}

std::vector<double> random_row(std::size_t n, Rng& rng) {
    std::vector<double> row(n);
    for (double& v : row) v = 0.05 + rng.uniform();
    normalise(row);
    return row;
}

std::vector<int> symbols_of(const HmmModel& m, std::string_view seq) {
    std::vector<int> out(seq.size());
    for (std::size_t i = 0; i < seq.size(); ++i) out[i] = m.symbol_index(seq[i]);
    return out;
}

// Scaled forward pass. alpha[t][s] is normalised per step; scale[t] holds
// the normaliser. Returns log P including the END transition.
double forward_scaled(const HmmModel& m, const std::vector<int>& x, std::vector<std::vector<double>>& alpha,
                      std::vector<double>& scale) {
    const std::size_t n = m.states(), len = x.size();
    alpha.assign(len, std::vector<double>(n, 0.0));
    scale.assign(len, 0.0);
    double log_p = 0.0;
    for (std::size_t t = 0; t < len; ++t) {
        if (x[t] < 0) return -std::numeric_limits<double>::infinity();
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            double a = 0.0;
            if (t == 0) {
                a = m.start[j];
            } else {
                for (std::size_t i = 0; i < n; ++i) a += alpha[t - 1][i] * m.trans[i][j];
            }
            alpha[t][j] = a * m.emit[j][static_cast<std::size_t>(x[t])];
            s += alpha[t][j];
        }
        if (s <= 0.0) return -std::numeric_limits<double>::infinity();
        for (double& a : alpha[t]) a /= s;
        scale[t] = s;
        log_p += std::log(s);
    }
    double end = 0.0;
    for (std::size_t i = 0; i < n; ++i) end += alpha[len - 1][i] * m.trans[i][n];
    if (end <= 0.0) return -std::numeric_limits<double>::infinity();
    return log_p + std::log(end);
}

}  // namespace

int HmmModel::symbol_index(char c) const noexcept {
    const auto pos = alphabet.find(c);
    return pos == std::string::npos ? -1 : static_cast<int>(pos);
}

nlohmann::json HmmModel::to_json() const {
    return {{"format", "glhnn-hmm"}, {"version", 1}, {"alphabet", alphabet},
            {"start", start},        {"trans", trans}, {"emit", emit}};
}

HmmModel HmmModel::from_json(const nlohmann::json& j) {
    try {
        if (j.at("format") != "glhnn-hmm" || j.at("version") != 1) throw InputError("not a version-1 HMM file");
        HmmModel m;
        m.alphabet = j.at("alphabet").get<std::string>();
        m.start = j.at("start").get<std::vector<double>>();
        m.trans = j.at("trans").get<std::vector<std::vector<double>>>();
        m.emit = j.at("emit").get<std::vector<std::vector<double>>>();
        const std::size_t n = m.start.size();
        if (n < 1 || m.alphabet.empty() || m.trans.size() != n || m.emit.size() != n) {
            throw InputError("HMM file has inconsistent dimensions");
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (m.trans[i].size() != n + 1 || m.emit[i].size() != m.alphabet.size()) {
                throw InputError("HMM file has inconsistent dimensions");
            }
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed HMM file: ") + e.what());
    }
}

double hmm_log_likelihood(const HmmModel& m, std::string_view sequence) {
    if (sequence.empty()) throw InputError("HMM likelihood of an empty sequence");
    std::vector<std::vector<double>> alpha;
    std::vector<double> scale;
    return forward_scaled(m, symbols_of(m, sequence), alpha, scale);
}

double hmm_log_likelihood(const HmmModel& m, std::span<const std::string> sequences) {
    double total = 0.0;
    for (const auto& s : sequences) total += hmm_log_likelihood(m, s);
    return total;
}

HmmFitResult hmm_fit(std::span<const std::string> domains, std::size_t n_states, std::size_t iterations,
                     std::uint64_t seed) {
    if (domains.empty()) throw InputError("hmm_fit: empty training corpus");
    if (n_states < 2) throw std::invalid_argument("hmm_fit: at least two states are required");

    HmmModel m;
    for (const auto& d : domains) {
        if (d.empty()) throw InputError("hmm_fit: empty training string");
        for (char c : d)
            if (m.alphabet.find(c) == std::string::npos) m.alphabet.push_back(c);
    }
    std::sort(m.alphabet.begin(), m.alphabet.end());
    const std::size_t n = n_states, k = m.alphabet.size();

    Rng rng(seed);
    m.start = random_row(n, rng);
    for (std::size_t i = 0; i < n; ++i) m.trans.push_back(random_row(n + 1, rng));
    for (std::size_t i = 0; i < n; ++i) m.emit.push_back(random_row(k, rng));

    std::vector<std::vector<int>> seqs;
    seqs.reserve(domains.size());
    for (const auto& d : domains) seqs.push_back(symbols_of(m, d));

    HmmFitResult result;
    std::vector<std::vector<double>> alpha, beta;
    std::vector<double> scale;
    for (std::size_t iter = 0; iter <= iterations; ++iter) {
        std::vector<double> start_acc(n, 0.0);
        std::vector<std::vector<double>> trans_acc(n, std::vector<double>(n + 1, 0.0));
        std::vector<std::vector<double>> emit_acc(n, std::vector<double>(k, 0.0));
        double total_ll = 0.0;

        for (const auto& x : seqs) {
            const std::size_t len = x.size();
            const double ll = forward_scaled(m, x, alpha, scale);
            total_ll += ll;
            if (!std::isfinite(ll)) continue;

            // Backward pass with the forward scales; beta[T-1][i] holds the
            // END transition divided by the final normaliser.
            double end_norm = 0.0;
            for (std::size_t i = 0; i < n; ++i) end_norm += alpha[len - 1][i] * m.trans[i][n];
            beta.assign(len, std::vector<double>(n, 0.0));
            for (std::size_t i = 0; i < n; ++i) beta[len - 1][i] = m.trans[i][n] / end_norm;
            for (std::size_t t = len - 1; t-- > 0;) {
                for (std::size_t i = 0; i < n; ++i) {
                    double b = 0.0;
                    for (std::size_t j = 0; j < n; ++j)
                        b += m.trans[i][j] * m.emit[j][static_cast<std::size_t>(x[t + 1])] * beta[t + 1][j];
                    beta[t][i] = b / scale[t + 1];
                }
            }
            // With this scaling, alpha[t][i] * beta[t][i] is the state posterior.
            for (std::size_t t = 0; t < len; ++t) {
                for (std::size_t i = 0; i < n; ++i) {
                    const double gamma = alpha[t][i] * beta[t][i];
                    if (t == 0) start_acc[i] += gamma;
                    emit_acc[i][static_cast<std::size_t>(x[t])] += gamma;
                }
            }
            for (std::size_t t = 0; t + 1 < len; ++t) {
                for (std::size_t i = 0; i < n; ++i) {
                    for (std::size_t j = 0; j < n; ++j) {
                        trans_acc[i][j] += alpha[t][i] * m.trans[i][j] *
                                           m.emit[j][static_cast<std::size_t>(x[t + 1])] * beta[t + 1][j] /
                                           scale[t + 1];
                    }
                }
            }
            for (std::size_t i = 0; i < n; ++i) trans_acc[i][n] += alpha[len - 1][i] * beta[len - 1][i];
        }
        result.log_likelihood.push_back(total_ll);
        if (iter == iterations) break;

        // M-step. Rows with no expected counts keep their previous values.
        auto update = [](std::vector<double>& row, std::vector<double>& acc) {
            double s = 0.0;
            for (double v : acc) s += v;
            if (s <= 0.0) return;
            for (std::size_t i = 0; i < row.size(); ++i) row[i] = acc[i] / s;
        };
        update(m.start, start_acc);
        for (std::size_t i = 0; i < n; ++i) {
            update(m.trans[i], trans_acc[i]);
            update(m.emit[i], emit_acc[i]);
        }
    }
    result.model = std::move(m);
    return result;
}

std::vector<std::string> hmm_sample(const HmmModel& m, const HmmSampleConfig& cfg) {
    if (cfg.min_len == 0 || cfg.min_len > cfg.max_len) throw std::invalid_argument("hmm_sample: bad length range");
    Rng rng(cfg.seed);
    const std::size_t n = m.states();
    auto draw = [&rng](const std::vector<double>& probs) {
        const double u = rng.uniform();
        double acc = 0.0;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            acc += probs[i];
            if (u < acc) return i;
        }
        // Rounding left u above the cumulative sum: take the last non-zero entry.
        for (std::size_t i = probs.size(); i-- > 0;)
            if (probs[i] > 0.0) return i;
        return probs.size() - 1;
    };

    std::vector<std::string> out;
    out.reserve(cfg.count);
    for (std::size_t c = 0; c < cfg.count; ++c) {
        bool done = false;
        for (std::size_t attempt = 0; attempt < cfg.max_attempts_per_sample && !done; ++attempt) {
            std::string s;
            std::size_t state = draw(m.start);
            while (true) {
                s.push_back(m.alphabet[draw(m.emit[state])]);
                if (s.size() > cfg.max_len) break;
                const std::size_t next = draw(m.trans[state]);
                if (next == n) break;
                state = next;
            }
            if (s.size() >= cfg.min_len && s.size() <= cfg.max_len) {
                out.push_back(std::move(s));
                done = true;
            }
        }
        if (!done) throw NumericError("hmm_sample: no sample within the length range after the attempt budget");
    }
    return out;
}

}  // namespace glhnn
