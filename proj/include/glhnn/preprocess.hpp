#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "glhnn/tensor.hpp"

namespace glhnn {

// Fixed input length of the classifier.
inline constexpr std::size_t kSequenceLength = 256;

// Character vocabulary. Index 0 is always the padding symbol, which is not a
// printable character and never appears in a domain string.
class Vocabulary {
public:
    // Padding followed by a-z, 0-9, '-' and '.' (39 symbols).
    static const Vocabulary& standard();

    // `symbols` excludes the padding symbol; they take indices 1..n in order.
    explicit Vocabulary(std::string_view symbols);

    std::size_t size() const noexcept { return symbols_.size() + 1; }
    static constexpr std::uint8_t pad_index() noexcept { return 0; }

    std::optional<std::uint8_t> lookup(char c) const noexcept;
    // Symbol for a non-pad index.
    char symbol(std::uint8_t index) const;
    // Printable symbols (without padding) in index order.
    const std::string& symbols() const noexcept { return symbols_; }

private:
    std::string symbols_;
    std::int16_t table_[256];
};

struct EncodedDomain {
    std::vector<std::uint8_t> indices;  // exactly `length` entries
    std::size_t original_length = 0;    // non-padding prefix

    std::size_t length() const noexcept { return indices.size(); }
};

// Drops the rightmost label and its dot ("a.b.co.uk" -> "a.b.co") and folds to
// lower case. A single trailing root dot is ignored first. Single-label names
// are returned unchanged. Throws InputError on empty or non-ASCII input.
std::string strip_tld(std::string_view domain);

// Maps characters to vocabulary indices, keeping the leftmost `length`
// characters and right-padding with the pad index. Throws ValidationError
// naming the character and position for out-of-vocabulary input.
EncodedDomain encode(std::string_view domain, const Vocabulary& vocab = Vocabulary::standard(),
                     std::size_t length = kSequenceLength);

// Inverse of encode over the non-padding prefix.
std::string decode(const EncodedDomain& enc, const Vocabulary& vocab = Vocabulary::standard());

// [length x vocab.size()] one-hot matrix; row i selects column indices[i].
Tensor one_hot(const EncodedDomain& enc, const Vocabulary& vocab = Vocabulary::standard());

// strip_tld followed by encode.
EncodedDomain preprocess(std::string_view raw_domain, const Vocabulary& vocab = Vocabulary::standard(),
                         std::size_t length = kSequenceLength);

}  // namespace glhnn
