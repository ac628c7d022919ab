#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "glhnn/corpus.hpp"
#include "glhnn/hmm.hpp"

namespace glhnn {

// DGA taxonomy axes. A class is written "XXY-Z-K": seed source (time
// dependence + determinism), generation scheme, learning property.
enum class TimeDependence { TD, TI };
enum class Determinism { D, N };
enum class Scheme { A, H, W, P };  // arithmetic, hash, wordlist, permutation
enum class Learning { N, L };

struct DgaClass {
    TimeDependence time_dependence = TimeDependence::TI;
    Determinism determinism = Determinism::D;
    Scheme scheme = Scheme::A;
    Learning learning = Learning::N;

    std::string code() const;
    friend bool operator==(const DgaClass&, const DgaClass&) = default;
};

std::string taxonomy_code(TimeDependence td, Determinism det, Scheme scheme, Learning learning);
// Inverse of code(); throws InputError on a malformed code.
DgaClass parse_taxonomy_code(std::string_view code);

// `benign_like` is not a DGA: it synthesises brand-style names (a noun with
// an optional prefix, suffix, number or second hyphenated noun) as a
// stand-in for a benign domain list.
enum class Family { arithmetic, hash, wordlist, permutation, hmm, benign_like };

std::string_view to_string(Family f) noexcept;
// Throws InputError for unknown or unsupported families (e.g. "deepdga").
Family parse_family(std::string_view name);
// Scheme and learning property a family realises.
DgaClass family_class(Family f, TimeDependence td = TimeDependence::TI, Determinism det = Determinism::D);

struct GeneratorConfig {
    Family family = Family::arithmetic;
    std::uint64_t seed = 0;
    std::size_t min_len = 8;
    std::size_t max_len = 16;
    std::size_t count = 1000;

    std::vector<std::string> wordlist;  // wordlist family; empty = bundled nouns
    std::size_t min_words = 2;
    std::size_t max_words = 3;
    std::string base;                   // permutation family
    std::optional<HmmModel> hmm;        // hmm family

    // Throws InputError unless 1 <= min_len <= max_len <= 63 and count >= 1.
    void validate() const;
};

// 200 common English nouns, lower case a-z.
std::span<const std::string_view> bundled_wordlist();

// Seed derivation for the taxonomy's seed-source axis.
std::uint64_t time_dependent_seed(std::uint64_t base_seed, std::uint64_t date_bucket) noexcept;
// FNV-1a 64 over the bytes of an entropy file.
std::uint64_t seed_from_entropy_file(const std::filesystem::path& path);

// Arithmetic: LCG x <- (1103515245 x + 12345) mod 2^31 from x_0 = seed mod 2^31.
// Per domain, a length draw (min_len + x mod (max_len-min_len+1)) is taken
// only when min_len < max_len, then one draw per character, 'a' + x mod 26.
std::vector<std::string> gen_arithmetic(const GeneratorConfig& cfg);

// Hash: domain i is the lower-case hex rendering of
//   FNV-1a64(seed as 8 LE bytes || i as 8 LE bytes || block j as 8 LE bytes)
// for blocks j = 0, 1, ... concatenated and truncated to a length drawn
// uniformly from [min_len, max_len] with Rng(seed).
std::vector<std::string> gen_hash(const GeneratorConfig& cfg);
std::string hash_domain(std::uint64_t seed, std::uint64_t counter, std::size_t length);

// Wordlist: concatenation of min_words..max_words words chosen uniformly
// with Rng(seed), clipped to 63 characters.
std::vector<std::string> gen_wordlist(const GeneratorConfig& cfg, std::span<const std::string> wordlist);

// Permutation: Fisher-Yates shuffles of `base` with Rng(seed), deduplicated.
// Returns at most cfg.count distinct anagrams.
std::vector<std::string> gen_permutation(const GeneratorConfig& cfg, std::string_view base);

// Labelled, deduplicated corpus of cfg.count domains (fewer only when the
// family cannot produce that many distinct strings).
LabeledCorpus generate_corpus(const GeneratorConfig& cfg, int label = kMalicious,
                              std::optional<DgaClass> cls = std::nullopt);

// Provenance sidecar written next to generated corpora.
nlohmann::json corpus_manifest(const GeneratorConfig& cfg, const LabeledCorpus& corpus, std::string_view class_code);

}  // namespace glhnn
