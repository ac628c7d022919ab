#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace glhnn {

// Discrete character HMM with an explicit end transition.
//
// P(x_1..x_T) = sum over state paths s of
//   start[s_1] * emit[s_1][x_1] * prod_t trans[s_{t-1}][s_t] * emit[s_t][x_t] * trans[s_T][END]
// where each row of `trans` has n_states + 1 entries, the last one being END.
struct HmmModel {
    std::string alphabet;                  // emitted symbols, sorted
    std::vector<double> start;             // [n]
    std::vector<std::vector<double>> trans;  // [n][n+1]
    std::vector<std::vector<double>> emit;   // [n][|alphabet|]

    std::size_t states() const noexcept { return start.size(); }
    int symbol_index(char c) const noexcept;

    nlohmann::json to_json() const;
    static HmmModel from_json(const nlohmann::json& j);
};

struct HmmFitResult {
    HmmModel model;
    std::vector<double> log_likelihood;  // total log-likelihood before each update, then after the last
};

// Scaled forward algorithm; returns log P(sequence). -inf if impossible.
double hmm_log_likelihood(const HmmModel& m, std::string_view sequence);
double hmm_log_likelihood(const HmmModel& m, std::span<const std::string> sequences);

// Baum-Welch EM from a seeded random start (each row drawn uniformly and
// normalised). Throws InputError on an empty corpus or empty strings, and
// std::invalid_argument if n_states < 2.
HmmFitResult hmm_fit(std::span<const std::string> domains, std::size_t n_states = 8, std::size_t iterations = 50,
                     std::uint64_t seed = 0);

struct HmmSampleConfig {
    std::size_t count = 1;
    std::size_t min_len = 1;
    std::size_t max_len = 63;
    std::uint64_t seed = 0;
    std::size_t max_attempts_per_sample = 10000;
};

// Ancestral sampling, rejecting strings outside [min_len, max_len]. Throws
// NumericError if a sample cannot be produced within the attempt budget.
std::vector<std::string> hmm_sample(const HmmModel& m, const HmmSampleConfig& cfg);

}  // namespace glhnn
