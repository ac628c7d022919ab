#include "glhnn/preprocess.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>

#include "glhnn/error.hpp"

namespace glhnn {

const Vocabulary& Vocabulary::standard() {
    static const Vocabulary vocab("abcdefghijklmnopqrstuvwxyz0123456789-.");
    return vocab;
}

Vocabulary::Vocabulary(std::string_view symbols) : symbols_(symbols) {
    if (symbols_.empty() || symbols_.size() > 254) {
        throw ConfigError("vocabulary must hold 1..254 symbols besides padding");
    }
    std::fill(std::begin(table_), std::end(table_), std::int16_t{-1});
    for (std::size_t i = 0; i < symbols_.size(); ++i) {
        const auto c = static_cast<unsigned char>(symbols_[i]);
        if (c == 0) throw ConfigError("NUL is reserved for padding");
        if (table_[c] != -1) throw ConfigError(std::string("duplicate vocabulary symbol '") + symbols_[i] + "'");
        table_[c] = static_cast<std::int16_t>(i + 1);
    }
}

std::optional<std::uint8_t> Vocabulary::lookup(char c) const noexcept {
    const std::int16_t v = table_[static_cast<unsigned char>(c)];
    if (v < 0) return std::nullopt;
    return static_cast<std::uint8_t>(v);
}

char Vocabulary::symbol(std::uint8_t index) const {
    if (index == 0 || index > symbols_.size()) {
        throw ValidationError("index " + std::to_string(index) + " has no printable symbol");
    }
    return symbols_[index - 1];
}

std::string strip_tld(std::string_view domain) {
    if (domain.empty()) throw InputError("strip_tld: empty domain");
    std::string s;
    s.reserve(domain.size());
    for (char c : domain) {
        if (static_cast<unsigned char>(c) > 0x7f) throw InputError("strip_tld: non-ASCII domain");
        s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    if (s.size() > 1 && s.back() == '.') s.pop_back();
    const auto dot = s.rfind('.');
    if (dot != std::string::npos) s.erase(dot);
    return s;
}

EncodedDomain encode(std::string_view domain, const Vocabulary& vocab, std::size_t length) {
    EncodedDomain enc;
    enc.indices.assign(length, Vocabulary::pad_index());
    enc.original_length = std::min(domain.size(), length);
    for (std::size_t i = 0; i < domain.size(); ++i) {
        const auto idx = vocab.lookup(domain[i]);
        if (!idx) {
            char shown[8];
            std::snprintf(shown, sizeof shown, "0x%02x", static_cast<unsigned char>(domain[i]));
            const bool printable = std::isprint(static_cast<unsigned char>(domain[i]));
            throw ValidationError("character " +
                                  (printable ? "'" + std::string(1, domain[i]) + "'" : std::string(shown)) +
                                  " at position " + std::to_string(i) + " is not in the vocabulary");
        }
        if (i < length) enc.indices[i] = *idx;
    }
    return enc;
}

std::string decode(const EncodedDomain& enc, const Vocabulary& vocab) {
    std::string out;
    out.reserve(enc.original_length);
    for (std::size_t i = 0; i < enc.original_length; ++i) out.push_back(vocab.symbol(enc.indices[i]));
    return out;
}

Tensor one_hot(const EncodedDomain& enc, const Vocabulary& vocab) {
    Tensor t({enc.length(), vocab.size()});
    for (std::size_t i = 0; i < enc.length(); ++i) {
        if (enc.indices[i] >= vocab.size()) {
            throw ValidationError("index " + std::to_string(enc.indices[i]) + " exceeds vocabulary size");
        }
        t.at(i, enc.indices[i]) = 1.0;
    }
    return t;
}

EncodedDomain preprocess(std::string_view raw_domain, const Vocabulary& vocab, std::size_t length) {
    return encode(strip_tld(raw_domain), vocab, length);
}

}  // namespace glhnn
