#include "glhnn/dga_corpus.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <unordered_set>

#include "json.hpp"

#include "glhnn/error.hpp"
#include "glhnn/hash.hpp"
#include "glhnn/rng.hpp"

namespace glhnn {

namespace {

constexpr std::size_t kMaxLabel = 63;
constexpr std::uint64_t kLcgModulus = 1ull << 31;

std::uint64_t lcg_next(std::uint64_t x) noexcept { return (1103515245ull * x + 12345ull) % kLcgModulus; }

void put_le64(unsigned char* out, std::uint64_t v) noexcept {
    for (int i = 0; i < 8; ++i) out[i] = static_cast<unsigned char>(v >> (8 * i));
}

std::vector<std::string> resolve_wordlist(const GeneratorConfig& cfg) {
    if (!cfg.wordlist.empty()) return cfg.wordlist;
    const auto nouns = bundled_wordlist();
    return {nouns.begin(), nouns.end()};
}

// Affixes for the benign-like family, shaped after common brand-style names.
constexpr std::string_view kPrefixes[] = {"my", "the", "get", "go", "best", "top", "new", "web", "i", "e"};
constexpr std::string_view kSuffixes[] = {"hub", "ly", "app", "shop", "online", "news", "tv",
                                          "net", "zone", "lab", "hq", "pro", "center", "world"};

std::string benign_like_one(Rng& rng, std::span<const std::string> words) {
    const std::string& w = words[rng.uniform_int(words.size())];
    switch (rng.uniform_int(5)) {
        case 0:
            return w;
        case 1:
            return std::string(kPrefixes[rng.uniform_int(std::size(kPrefixes))]) + w;
        case 2:
            return w + std::string(kSuffixes[rng.uniform_int(std::size(kSuffixes))]);
        case 3:
            return w + std::to_string(rng.uniform_range(1, 999));
        default:
            return w + "-" + words[rng.uniform_int(words.size())];
    }
}

// Endless stream of raw (possibly repeated) domains for one config.
class DomainStream {
public:
    explicit DomainStream(const GeneratorConfig& cfg) : cfg_(cfg), rng_(cfg.seed) {
        cfg_.validate();
        switch (cfg_.family) {
            case Family::arithmetic:
                lcg_ = cfg_.seed % kLcgModulus;
                break;
            case Family::wordlist:
            case Family::benign_like:
                words_ = resolve_wordlist(cfg_);
                if (words_.empty()) throw InputError("wordlist is empty");
                for (const auto& w : words_) {
                    if (w.empty() || !std::all_of(w.begin(), w.end(), [](char c) { return c >= 'a' && c <= 'z'; })) {
                        throw InputError("wordlist entries must be non-empty lower-case a-z words, got '" + w + "'");
                    }
                }
                if (cfg_.min_words == 0 || cfg_.min_words > cfg_.max_words) throw InputError("bad word count range");
                break;
            case Family::permutation:
                if (cfg_.base.size() < 2) throw InputError("permutation base must have at least 2 characters");
                break;
            case Family::hmm:
                if (!cfg_.hmm) throw InputError("hmm family requires a trained HMM");
                break;
            case Family::hash:
                break;
        }
    }

    std::string next() {
        switch (cfg_.family) {
            case Family::arithmetic: {
                std::size_t len = cfg_.min_len;
                if (cfg_.max_len > cfg_.min_len) {
                    lcg_ = lcg_next(lcg_);
                    len += lcg_ % (cfg_.max_len - cfg_.min_len + 1);
                }
                std::string s(len, 'a');
                for (char& c : s) {
                    lcg_ = lcg_next(lcg_);
                    c = static_cast<char>('a' + lcg_ % 26);
                }
                return s;
            }
            case Family::hash: {
                const auto len = static_cast<std::size_t>(rng_.uniform_range(
                    static_cast<std::int64_t>(cfg_.min_len), static_cast<std::int64_t>(cfg_.max_len)));
                return hash_domain(cfg_.seed, counter_++, len);
            }
            case Family::wordlist: {
                const auto n = static_cast<std::size_t>(rng_.uniform_range(
                    static_cast<std::int64_t>(cfg_.min_words), static_cast<std::int64_t>(cfg_.max_words)));
                std::string s;
                for (std::size_t i = 0; i < n; ++i) s += words_[rng_.uniform_int(words_.size())];
                if (s.size() > kMaxLabel) s.resize(kMaxLabel);
                return s;
            }
            case Family::benign_like: {
                std::string s = benign_like_one(rng_, words_);
                if (s.size() > kMaxLabel) s.resize(kMaxLabel);
                return s;
            }
            case Family::permutation: {
                std::string s = cfg_.base;
                for (std::size_t i = s.size(); i > 1; --i) std::swap(s[i - 1], s[rng_.uniform_int(i)]);
                return s;
            }
            case Family::hmm: {
                HmmSampleConfig sc;
                sc.count = 1;
                sc.min_len = cfg_.min_len;
                sc.max_len = cfg_.max_len;
                sc.seed = Rng::derive(cfg_.seed, counter_++);
                return hmm_sample(*cfg_.hmm, sc).front();
            }
        }
        return {};
    }

private:
    GeneratorConfig cfg_;
    Rng rng_;
    std::uint64_t lcg_ = 0;
    std::uint64_t counter_ = 0;
    std::vector<std::string> words_;
};

std::vector<std::string> take(const GeneratorConfig& cfg) {
    DomainStream stream(cfg);
    std::vector<std::string> out;
    out.reserve(cfg.count);
    for (std::size_t i = 0; i < cfg.count; ++i) out.push_back(stream.next());
    return out;
}

}  // namespace

// ---------------------------------------------------------------- taxonomy

std::string taxonomy_code(TimeDependence td, Determinism det, Scheme scheme, Learning learning) {
    std::string code = td == TimeDependence::TD ? "TD" : "TI";
    code += det == Determinism::D ? 'D' : 'N';
    code += '-';
    constexpr char schemes[] = {'A', 'H', 'W', 'P'};
    code += schemes[static_cast<int>(scheme)];
    code += '-';
    code += learning == Learning::N ? 'N' : 'L';
    return code;
}

std::string DgaClass::code() const { return taxonomy_code(time_dependence, determinism, scheme, learning); }

DgaClass parse_taxonomy_code(std::string_view code) {
    const auto bad = [&] { return InputError("malformed DGA class code '" + std::string(code) + "'"); };
    if (code.size() != 7 || code[3] != '-' || code[5] != '-' || code[0] != 'T') throw bad();
    DgaClass c;
    if (code[1] == 'D') c.time_dependence = TimeDependence::TD;
    else if (code[1] == 'I') c.time_dependence = TimeDependence::TI;
    else throw bad();
    if (code[2] == 'D') c.determinism = Determinism::D;
    else if (code[2] == 'N') c.determinism = Determinism::N;
    else throw bad();
    switch (code[4]) {
        case 'A': c.scheme = Scheme::A; break;
        case 'H': c.scheme = Scheme::H; break;
        case 'W': c.scheme = Scheme::W; break;
        case 'P': c.scheme = Scheme::P; break;
        default: throw bad();
    }
    if (code[6] == 'N') c.learning = Learning::N;
    else if (code[6] == 'L') c.learning = Learning::L;
    else throw bad();
    return c;
}

std::string_view to_string(Family f) noexcept {
    switch (f) {
        case Family::arithmetic: return "arithmetic";
        case Family::hash: return "hash";
        case Family::wordlist: return "wordlist";
        case Family::permutation: return "permutation";
        case Family::hmm: return "hmm";
        case Family::benign_like: return "benign";
    }
    return "?";
}

Family parse_family(std::string_view name) {
    for (Family f : {Family::arithmetic, Family::hash, Family::wordlist, Family::permutation, Family::hmm,
                     Family::benign_like}) {
        if (name == to_string(f)) return f;
    }
    if (name == "deepdga") throw InputError("family 'deepdga' (GAN-based) is not supported");
    throw InputError("unknown generator family '" + std::string(name) + "'");
}

DgaClass family_class(Family f, TimeDependence td, Determinism det) {
    DgaClass c{td, det, Scheme::A, Learning::N};
    switch (f) {
        case Family::arithmetic: c.scheme = Scheme::A; break;
        case Family::hash: c.scheme = Scheme::H; break;
        case Family::wordlist: c.scheme = Scheme::W; break;
        case Family::permutation: c.scheme = Scheme::P; break;
        case Family::hmm:
            c.scheme = Scheme::A;
            c.learning = Learning::L;
            break;
        case Family::benign_like: c.scheme = Scheme::W; break;
    }
    return c;
}

// --------------------------------------------------------------- generators

void GeneratorConfig::validate() const {
    if (min_len < 1 || min_len > max_len || max_len > kMaxLabel) {
        throw InputError("length range must satisfy 1 <= min <= max <= 63, got [" + std::to_string(min_len) + ", " +
                         std::to_string(max_len) + "]");
    }
    if (count < 1) throw InputError("count must be at least 1");
}

std::uint64_t time_dependent_seed(std::uint64_t base_seed, std::uint64_t date_bucket) noexcept {
    return Rng::derive(base_seed, date_bucket);
}

std::uint64_t seed_from_entropy_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open entropy file " + path.string());
    const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.empty()) throw InputError("entropy file is empty: " + path.string());
    return fnv1a64(bytes);
}

std::string hash_domain(std::uint64_t seed, std::uint64_t counter, std::size_t length) {
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    unsigned char msg[24];
    put_le64(msg, seed);
    put_le64(msg + 8, counter);
    for (std::uint64_t block = 0; out.size() < length; ++block) {
        put_le64(msg + 16, block);
        const std::uint64_t h = fnv1a64(std::span<const unsigned char>(msg, sizeof msg));
        for (int shift = 60; shift >= 0 && out.size() < length; shift -= 4) out.push_back(hex[(h >> shift) & 0xf]);
    }
    return out;
}

std::vector<std::string> gen_arithmetic(const GeneratorConfig& cfg) {
    GeneratorConfig c = cfg;
    c.family = Family::arithmetic;
    return take(c);
}

std::vector<std::string> gen_hash(const GeneratorConfig& cfg) {
    GeneratorConfig c = cfg;
    c.family = Family::hash;
    return take(c);
}

std::vector<std::string> gen_wordlist(const GeneratorConfig& cfg, std::span<const std::string> wordlist) {
    if (wordlist.empty()) throw InputError("wordlist is empty");
    GeneratorConfig c = cfg;
    c.family = Family::wordlist;
    c.wordlist.assign(wordlist.begin(), wordlist.end());
    return take(c);
}

std::vector<std::string> gen_permutation(const GeneratorConfig& cfg, std::string_view base) {
    GeneratorConfig c = cfg;
    c.family = Family::permutation;
    c.base = std::string(base);
    DomainStream stream(c);
    std::unordered_set<std::string> seen;
    std::vector<std::string> out;
    const std::size_t attempts = 20 * c.count + 100;
    for (std::size_t i = 0; i < attempts && out.size() < c.count; ++i) {
        std::string s = stream.next();
        if (seen.insert(s).second) out.push_back(std::move(s));
    }
    return out;
}

LabeledCorpus generate_corpus(const GeneratorConfig& cfg, int label, std::optional<DgaClass> cls) {
    const std::string code =
        label == kBenign && !cls ? std::string("benign") : cls.value_or(family_class(cfg.family)).code();
    DomainStream stream(cfg);
    LabeledCorpus corpus;
    corpus.root_seed = cfg.seed;
    std::unordered_set<std::string> seen;
    const std::size_t attempts = 50 * cfg.count + 1000;
    for (std::size_t i = 0; i < attempts && corpus.size() < cfg.count; ++i) {
        std::string s = stream.next();
        if (!seen.insert(s).second) continue;
        corpus.records.push_back({std::move(s), label, code, std::string(to_string(cfg.family))});
    }
    return corpus;
}

nlohmann::json corpus_manifest(const GeneratorConfig& cfg, const LabeledCorpus& corpus, std::string_view class_code) {
    nlohmann::json j;
    j["family"] = to_string(cfg.family);
    j["seed"] = cfg.seed;
    j["length_range"] = {cfg.min_len, cfg.max_len};
    j["requested"] = cfg.count;
    j["emitted"] = corpus.size();
    j["class_code"] = class_code;
    j["labels"] = {{"benign", corpus.count(kBenign)}, {"agd", corpus.count(kMalicious)}};
    if (cfg.family == Family::wordlist || cfg.family == Family::benign_like) {
        j["words"] = {cfg.min_words, cfg.max_words};
        j["wordlist_size"] = cfg.wordlist.empty() ? bundled_wordlist().size() : cfg.wordlist.size();
    }
    if (cfg.family == Family::permutation) j["base"] = cfg.base;
    if (cfg.family == Family::hmm && cfg.hmm) j["hmm_states"] = cfg.hmm->states();
    return j;
}

}  // namespace glhnn
