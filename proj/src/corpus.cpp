#include "glhnn/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "glhnn/error.hpp"
#include "glhnn/preprocess.hpp"

namespace glhnn {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

bool is_comment_or_blank(std::string_view line) {
    const auto t = trim(line);
    return t.empty() || t.front() == '#';
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

void check_encodable(std::string_view domain) {
    if (domain.empty()) throw ValidationError("empty domain");
    for (std::size_t i = 0; i < domain.size(); ++i) {
        if (!Vocabulary::standard().lookup(domain[i])) {
            throw ValidationError("character '" + std::string(1, domain[i]) + "' at position " + std::to_string(i) +
                                  " is not in the vocabulary");
        }
    }
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    return in;
}

// Runs `parse` on each meaningful line, applying the skip/raise policy.
template <typename Parse>
void for_each_line(std::istream& in, const ReadOptions& opts, ReadStats& stats, Parse&& parse) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_comment_or_blank(line)) continue;
        ++stats.lines;
        try {
            parse(trim(line));
        } catch (const Error& e) {
            if (!opts.skip_invalid) throw InputError("line " + std::to_string(line_no) + ": " + e.what());
            ++stats.skipped;
        }
    }
}

}  // namespace

std::size_t LabeledCorpus::count(int label) const noexcept {
    return static_cast<std::size_t>(
        std::count_if(records.begin(), records.end(), [label](const CorpusRecord& r) { return r.label == label; }));
}

std::size_t LabeledCorpus::deduplicate() {
    std::unordered_set<std::string> seen;
    const auto before = records.size();
    std::erase_if(records, [&](const CorpusRecord& r) { return !seen.insert(r.domain).second; });
    return before - records.size();
}

void LabeledCorpus::merge(const LabeledCorpus& other) {
    records.insert(records.end(), other.records.begin(), other.records.end());
    deduplicate();
}

LabeledCorpus read_corpus_tsv(std::istream& in, const ReadOptions& opts, ReadStats* stats) {
    ReadStats local;
    ReadStats& st = stats ? *stats : local;
    LabeledCorpus corpus;
    std::unordered_set<std::string> seen;
    for_each_line(in, opts, st, [&](std::string_view line) {
        const auto fields = split(line, '\t');
        if (fields.size() != 3) throw InputError("expected 3 tab-separated fields, got " + std::to_string(fields.size()));
        const std::string domain(trim(fields[0]));
        check_encodable(domain);
        const auto label_text = trim(fields[1]);
        if (label_text != "0" && label_text != "1") throw InputError("label must be 0 or 1");
        if (!seen.insert(domain).second) {
            ++st.duplicates;
            return;
        }
        corpus.records.push_back({domain, label_text == "1" ? kMalicious : kBenign, std::string(trim(fields[2])), "tsv"});
        ++st.accepted;
    });
    return corpus;
}

LabeledCorpus read_corpus_tsv(const std::filesystem::path& path, const ReadOptions& opts, ReadStats* stats) {
    auto in = open_or_throw(path);
    return read_corpus_tsv(in, opts, stats);
}

void write_corpus_tsv(std::ostream& out, const LabeledCorpus& corpus) {
    for (const auto& r : corpus.records) out << r.domain << '\t' << r.label << '\t' << r.class_code << '\n';
}

void write_corpus_tsv(const std::filesystem::path& path, const LabeledCorpus& corpus) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    write_corpus_tsv(out, corpus);
    if (!out) throw IoError("failed writing " + path.string());
}

LabeledCorpus load_domain_list(std::istream& in, int label, std::string_view class_code, std::string_view source,
                               const ReadOptions& opts, ReadStats* stats) {
    ReadStats local;
    ReadStats& st = stats ? *stats : local;
    LabeledCorpus corpus;
    std::unordered_set<std::string> seen;
    for_each_line(in, opts, st, [&](std::string_view line) {
        std::string_view raw = line;
        if (const auto comma = line.find(','); comma != std::string_view::npos) {
            // "rank,domain"
            const auto fields = split(line, ',');
            const auto rank = trim(fields[0]);
            if (fields.size() != 2 || rank.empty() ||
                !std::all_of(rank.begin(), rank.end(), [](char c) { return c >= '0' && c <= '9'; })) {
                throw InputError("expected 'rank,domain'");
            }
            raw = trim(fields[1]);
        }
        const std::string domain = strip_tld(raw);
        check_encodable(domain);
        if (!seen.insert(domain).second) {
            ++st.duplicates;
            return;
        }
        corpus.records.push_back({domain, label, std::string(class_code), std::string(source)});
        ++st.accepted;
    });
    return corpus;
}

LabeledCorpus load_benign(const std::filesystem::path& path, const ReadOptions& opts, ReadStats* stats) {
    auto in = open_or_throw(path);
    return load_domain_list(in, kBenign, "benign", path.filename().string(), opts, stats);
}

LabeledCorpus load_agd(const std::filesystem::path& path, std::string_view class_code, const ReadOptions& opts,
                       ReadStats* stats) {
    auto in = open_or_throw(path);
    return load_domain_list(in, kMalicious, class_code, path.filename().string(), opts, stats);
}

}  // namespace glhnn
