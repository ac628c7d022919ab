#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace glhnn {

inline constexpr int kBenign = 0;
inline constexpr int kMalicious = 1;

struct CorpusRecord {
    std::string domain;      // TLD already removed, lower case
    int label = kBenign;     // 0 benign, 1 algorithmically generated
    std::string class_code;  // taxonomy code such as "TID-A-N", or "benign"
    std::string source;      // provenance tag (generator family, file name)

    friend bool operator==(const CorpusRecord&, const CorpusRecord&) = default;
};

struct LabeledCorpus {
    std::vector<CorpusRecord> records;
    std::uint64_t root_seed = 0;

    std::size_t size() const noexcept { return records.size(); }
    bool empty() const noexcept { return records.empty(); }
    std::size_t count(int label) const noexcept;

    // Keeps the first occurrence of each domain; returns the number removed.
    std::size_t deduplicate();
    // Appends another corpus and deduplicates.
    void merge(const LabeledCorpus& other);
};

struct ReadOptions {
    bool skip_invalid = false;  // drop malformed lines instead of failing
};

struct ReadStats {
    std::size_t lines = 0;       // non-comment, non-blank lines seen
    std::size_t accepted = 0;
    std::size_t duplicates = 0;
    std::size_t skipped = 0;     // malformed lines dropped under skip_invalid
};

// Corpus TSV: "domain<TAB>label<TAB>class_code" per line, '#' comments.
// Domains are taken verbatim (no TLD stripping) but must be encodable.
LabeledCorpus read_corpus_tsv(std::istream& in, const ReadOptions& opts = {}, ReadStats* stats = nullptr);
LabeledCorpus read_corpus_tsv(const std::filesystem::path& path, const ReadOptions& opts = {},
                              ReadStats* stats = nullptr);
void write_corpus_tsv(std::ostream& out, const LabeledCorpus& corpus);
void write_corpus_tsv(const std::filesystem::path& path, const LabeledCorpus& corpus);

// Domain lists as published by rank providers and DGA archives: one domain
// per line, or "rank,domain" (Alexa top-1m export). Each domain is TLD
// stripped, lower-cased, checked against the vocabulary and deduplicated.
// A malformed line raises InputError naming the line number unless
// opts.skip_invalid is set.
LabeledCorpus load_domain_list(std::istream& in, int label, std::string_view class_code, std::string_view source,
                               const ReadOptions& opts = {}, ReadStats* stats = nullptr);
LabeledCorpus load_benign(const std::filesystem::path& path, const ReadOptions& opts = {}, ReadStats* stats = nullptr);
LabeledCorpus load_agd(const std::filesystem::path& path, std::string_view class_code, const ReadOptions& opts = {},
                       ReadStats* stats = nullptr);

}  // namespace glhnn
