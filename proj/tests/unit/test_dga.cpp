#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "doctest.h"
#include "glhnn/dga_corpus.hpp"
#include "glhnn/error.hpp"
#include "glhnn/hash.hpp"
#include "glhnn/preprocess.hpp"

using namespace glhnn;

namespace {

GeneratorConfig config(Family f, std::uint64_t seed, std::size_t count) {
    GeneratorConfig c;
    c.family = f;
    c.seed = seed;
    c.count = count;
    return c;
}

}  // namespace

TEST_SUITE("dga") {

TEST_CASE("taxonomy codes compose from the four axes") {
    CHECK(taxonomy_code(TimeDependence::TD, Determinism::D, Scheme::H, Learning::N) == "TDD-H-N");
    CHECK(taxonomy_code(TimeDependence::TI, Determinism::D, Scheme::A, Learning::L) == "TID-A-L");
    CHECK(taxonomy_code(TimeDependence::TD, Determinism::N, Scheme::A, Learning::N) == "TDN-A-N");
    CHECK(taxonomy_code(TimeDependence::TI, Determinism::N, Scheme::P, Learning::N) == "TIN-P-N");
    for (auto td : {TimeDependence::TD, TimeDependence::TI})
        for (auto det : {Determinism::D, Determinism::N})
            for (auto s : {Scheme::A, Scheme::H, Scheme::W, Scheme::P})
                for (auto l : {Learning::N, Learning::L}) {
                    const DgaClass c{td, det, s, l};
                    CHECK(parse_taxonomy_code(c.code()) == c);
                }
    CHECK_THROWS_AS(parse_taxonomy_code("TXD-A-N"), InputError);
    CHECK_THROWS_AS(parse_taxonomy_code("TID-Q-N"), InputError);
    CHECK_THROWS_AS(parse_taxonomy_code("TIDAN"), InputError);
}

TEST_CASE("family names and classes") {
    CHECK(parse_family("arithmetic") == Family::arithmetic);
    CHECK(parse_family("benign") == Family::benign_like);
    CHECK_THROWS_AS(parse_family("deepdga"), InputError);
    CHECK_THROWS_AS(parse_family("banjori"), InputError);
    CHECK(family_class(Family::wordlist).code() == "TID-W-N");
    CHECK(family_class(Family::hmm).code() == "TID-A-L");
    CHECK(family_class(Family::hash, TimeDependence::TD).code() == "TDD-H-N");
}

TEST_CASE("generator config bounds") {
    GeneratorConfig c;
    CHECK_NOTHROW(c.validate());
    c.min_len = 0;
    CHECK_THROWS_AS(c.validate(), InputError);
    c = GeneratorConfig{};
    c.max_len = 64;
    CHECK_THROWS_AS(c.validate(), InputError);
    c = GeneratorConfig{};
    c.min_len = 10;
    c.max_len = 9;
    CHECK_THROWS_AS(c.validate(), InputError);
    c = GeneratorConfig{};
    c.count = 0;
    CHECK_THROWS_AS(c.validate(), InputError);
}

TEST_CASE("arithmetic generator follows the LCG by hand") {
    GeneratorConfig c = config(Family::arithmetic, 1, 1);
    c.min_len = c.max_len = 3;
    const auto out = gen_arithmetic(c);
    REQUIRE(out.size() == 1);
    // x1 = (1103515245 * 1 + 12345) mod 2^31 = 1103527590; 1103527590 mod 26 = 22.
    CHECK(out[0][0] == 'w');
    std::uint64_t x = 1;
    std::string expect;
    for (int i = 0; i < 3; ++i) {
        x = (1103515245ull * x + 12345ull) % 2147483648ull;
        expect.push_back(static_cast<char>('a' + x % 26));
    }
    CHECK(out[0] == expect);
}

TEST_CASE("arithmetic generator contract") {
    GeneratorConfig c = config(Family::arithmetic, 7, 1000);
    c.min_len = 6;
    c.max_len = 14;
    const auto a = gen_arithmetic(c);
    CHECK(a == gen_arithmetic(c));
    CHECK(a.size() == 1000);
    std::set<std::size_t> lengths;
    for (const auto& s : a) {
        CHECK((s.size() >= 6 && s.size() <= 14));
        lengths.insert(s.size());
        CHECK(std::all_of(s.begin(), s.end(), [](char ch) { return ch >= 'a' && ch <= 'z'; }));
    }
    CHECK(lengths.size() == 9);
}

TEST_CASE("fnv-1a published vectors") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
    CHECK(fnv1a64("bar", fnv1a64("foo")) == fnv1a64("foobar"));
}

TEST_CASE("hash generator renders FNV-1a digests in hex") {
    // seed 42, counter 0: blocks 0 and 1 hash to 2f69b4b4b921feaf and 106eedabae32b48e.
    CHECK(hash_domain(42, 0, 20) == "2f69b4b4b921feaf106e");
    CHECK(hash_domain(42, 0, 5) == "2f69b");
    CHECK(hash_domain(42, 1, 16) != hash_domain(42, 0, 16));
    GeneratorConfig c = config(Family::hash, 5, 200);
    c.min_len = 10;
    c.max_len = 20;
    const auto a = gen_hash(c);
    CHECK(a == gen_hash(c));
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK((a[i].size() >= 10 && a[i].size() <= 20));
        CHECK(a[i] == hash_domain(5, i, a[i].size()));
    }
}

TEST_CASE("hash digits are close to uniform") {
    GeneratorConfig c = config(Family::hash, 11, 2500);
    c.min_len = c.max_len = 40;
    std::map<char, double> freq;
    double n = 0;
    for (const auto& s : gen_hash(c))
        for (char ch : s) {
            freq[ch] += 1;
            n += 1;
        }
    CHECK(n == 100000);
    CHECK(freq.size() == 16);
    const double p = 1.0 / 16.0, sigma = std::sqrt(n * p * (1 - p));
    for (const auto& [ch, count] : freq) {
        CAPTURE(ch);
        CHECK(std::abs(count - n * p) <= 3 * sigma);
    }
}

TEST_CASE("wordlist generator covers exactly the concatenations") {
    const std::vector<std::string> words{"cat", "dog"};
    GeneratorConfig c = config(Family::wordlist, 3, 10000);
    c.min_words = c.max_words = 2;
    const auto out = gen_wordlist(c, words);
    CHECK(out == gen_wordlist(c, words));
    std::map<std::string, double> counts;
    for (const auto& s : out) counts[s] += 1;
    CHECK(counts.size() == 4);
    const std::set<std::string> allowed{"catcat", "catdog", "dogcat", "dogdog"};
    const double sigma = std::sqrt(10000 * 0.25 * 0.75);
    for (const auto& [s, k] : counts) {
        CHECK(allowed.count(s) == 1);
        CHECK(std::abs(k - 2500.0) <= 3 * sigma);
    }
    CHECK_THROWS_AS(gen_wordlist(c, std::vector<std::string>{}), InputError);
    CHECK_THROWS_AS(gen_wordlist(c, std::vector<std::string>{"Cat"}), InputError);
}

TEST_CASE("wordlist output is clipped to 63 characters") {
    const std::vector<std::string> words{std::string(40, 'x'), std::string(30, 'y')};
    GeneratorConfig c = config(Family::wordlist, 4, 50);
    c.min_words = c.max_words = 3;
    for (const auto& s : gen_wordlist(c, words)) CHECK(s.size() == 63);
}

TEST_CASE("bundled wordlist has 200 lower-case nouns") {
    const auto words = bundled_wordlist();
    CHECK(words.size() == 200);
    std::set<std::string_view> unique(words.begin(), words.end());
    CHECK(unique.size() == 200);
    for (auto w : words) CHECK(std::all_of(w.begin(), w.end(), [](char ch) { return ch >= 'a' && ch <= 'z'; }));
}

TEST_CASE("permutation generator yields distinct anagrams") {
    GeneratorConfig c = config(Family::permutation, 1, 10);
    const auto two = gen_permutation(c, "ab");
    for (const auto& s : two) CHECK((s == "ab" || s == "ba"));
    CHECK(two.size() <= 2);

    c.count = 24;
    const auto four = gen_permutation(c, "abcd");
    CHECK(four.size() <= 24);
    CHECK(std::set<std::string>(four.begin(), four.end()).size() == four.size());
    for (auto s : four) {
        std::sort(s.begin(), s.end());
        CHECK(s == "abcd");
    }
    c.count = 100;
    const auto many = gen_permutation(c, "permutation");
    CHECK(many.size() == 100);
    CHECK(many == gen_permutation(c, "permutation"));
    CHECK_THROWS_AS(gen_permutation(c, "a"), InputError);
}

TEST_CASE("every family emits encodable, deduplicated corpora") {
    HmmModel hmm;
    hmm.alphabet = "ab";
    hmm.start = {0.5, 0.5};
    hmm.trans = {{0.6, 0.3, 0.1}, {0.3, 0.6, 0.1}};
    hmm.emit = {{0.9, 0.1}, {0.2, 0.8}};
    for (Family f : {Family::arithmetic, Family::hash, Family::wordlist, Family::permutation, Family::hmm,
                     Family::benign_like}) {
        CAPTURE(to_string(f));
        GeneratorConfig c = config(f, 17, 300);
        c.base = "exampledomain";
        if (f == Family::hmm) {
            c.hmm = hmm;
            c.min_len = 3;
        }
        const int label = f == Family::benign_like ? kBenign : kMalicious;
        const LabeledCorpus a = generate_corpus(c, label);
        const LabeledCorpus b = generate_corpus(c, label);
        CHECK(a.records == b.records);
        CHECK(a.size() == 300);
        std::set<std::string> seen;
        for (const auto& r : a.records) {
            CHECK_NOTHROW(encode(r.domain));
            CHECK(r.label == label);
            CHECK(r.source == to_string(f));
            CHECK(seen.insert(r.domain).second);
        }
        CHECK(a.records.front().class_code == (label == kBenign ? "benign" : family_class(f).code()));
    }
    GeneratorConfig missing = config(Family::hmm, 1, 5);
    CHECK_THROWS_AS(generate_corpus(missing), InputError);
}

TEST_CASE("explicit class overrides the family default") {
    GeneratorConfig c = config(Family::hash, 2, 5);
    const DgaClass cls{TimeDependence::TD, Determinism::D, Scheme::H, Learning::N};
    const LabeledCorpus corpus = generate_corpus(c, kMalicious, cls);
    for (const auto& r : corpus.records) CHECK(r.class_code == "TDD-H-N");
}

TEST_CASE("seed-source derivations") {
    CHECK(time_dependent_seed(5, 100) == time_dependent_seed(5, 100));
    CHECK(time_dependent_seed(5, 100) != time_dependent_seed(5, 101));
    const auto path = std::filesystem::temp_directory_path() / "glhnn_entropy.bin";
    {
        std::ofstream out(path, std::ios::binary);
        out << "foobar";
    }
    CHECK(seed_from_entropy_file(path) == 0x85944171f73967e8ULL);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(seed_from_entropy_file(path), IoError);
}

TEST_CASE("corpus manifest records config and counts") {
    GeneratorConfig c = config(Family::wordlist, 9, 20);
    const LabeledCorpus corpus = generate_corpus(c);
    const auto j = corpus_manifest(c, corpus, "TID-W-N");
    CHECK(j["family"] == "wordlist");
    CHECK(j["seed"] == 9);
    CHECK(j["emitted"] == 20);
    CHECK(j["labels"]["agd"] == 20);
    CHECK(j["wordlist_size"] == 200);
}

}  // TEST_SUITE
