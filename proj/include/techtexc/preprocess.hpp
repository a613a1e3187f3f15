#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "techtexc/corpus.hpp"

namespace techtexc {

inline constexpr std::int32_t kPadIndex = 0;
inline constexpr std::int32_t kOovIndex = 1;
inline constexpr std::size_t kDefaultSequenceLength = 100;

/// Sentinel produced by Vocabulary::decode for out-of-vocabulary ids.
inline constexpr std::string_view kOovToken = "<unk>";

/// Deletes the removal set { , . ; : " ! # $ % * @ }, collapses whitespace
/// runs to single spaces and trims the ends. Total and idempotent; never
/// touches multi-byte UTF-8 sequences (every removed character is ASCII).
std::string clean_text(std::string_view raw);

/// Whitespace split plus lowercasing. Lowercasing applies where the mapping
/// is defined in ASCII and leaves other bytes alone, which keeps multi-byte
/// UTF-8 intact. Never yields empty tokens.
std::vector<std::string> tokenize(std::string_view text);

/// Short-text rule: keep only examples with at least two tokens. Applied to
/// training data; evaluation and prediction inputs always pass through.
inline bool keep_example(std::span<const std::string> tokens) {
    return tokens.size() >= 2;
}

/// Word/index map with reserved indices 0 (padding) and 1 (out of
/// vocabulary). Corpus words occupy 2..K+1, ordered by descending frequency
/// with ties broken by first appearance, so two builds over the same corpus
/// are identical. Immutable after construction.
class Vocabulary {
public:
    Vocabulary() = default;

    /// Builds from the training split's token lists (already cleaned,
    /// tokenized and filtered). Throws std::invalid_argument on an empty
    /// corpus.
    static Vocabulary build(const std::vector<std::vector<std::string>>& corpus_tokens);

    /// Distinct corpus words (K). The embedding table has K+2 rows.
    std::size_t distinct_words() const { return index_to_word_.size() - 2; }
    std::size_t table_size() const { return index_to_word_.size(); }

    /// Index of `word`, or the OOV index when absent.
    std::int32_t index_of(std::string_view word) const;

    bool contains(std::string_view word) const;

    /// Word at an index >= 2. Throws std::out_of_range otherwise.
    const std::string& word_at(std::int32_t index) const;

    /// Inverse of encoding for test/debug use: pads are skipped, the OOV id
    /// maps to kOovToken.
    std::vector<std::string> decode(std::span<const std::int32_t> ids) const;

    /// Text serialization: header line `#vocab v1 K=<int>`, then one
    /// `word<TAB>index` line per word in index order.
    void save(std::ostream& out) const;
    static Vocabulary load(std::istream& in);

    bool operator==(const Vocabulary& other) const {
        return index_to_word_ == other.index_to_word_;
    }

private:
    std::unordered_map<std::string, std::int32_t> word_to_index_;
    std::vector<std::string> index_to_word_; // [0], [1] are reserved placeholders
};

/// Numeric encoding at fixed length: unknown words map to the OOV index,
/// short sequences are pre-padded with zeros, long ones keep their LAST
/// `max_len` ids. An empty token list encodes to an all-pad row.
std::vector<std::int32_t> encode_and_pad(std::span<const std::string> tokens,
                                         const Vocabulary& vocab,
                                         std::size_t max_len = kDefaultSequenceLength);

struct TokenizedExample {
    std::vector<std::string> tokens;
    std::int32_t label;
};

struct EncodedExample {
    std::vector<std::int32_t> ids; // length = max_len
    std::int32_t label;
};

/// Cleans and tokenizes every corpus example; with `drop_short` set the
/// short-text rule removes under-two-token examples (training only).
std::vector<TokenizedExample> prepare_examples(const LabeledCorpus& corpus, bool drop_short);

/// Token lists of the prepared examples, for Vocabulary::build.
std::vector<std::vector<std::string>> token_lists(std::span<const TokenizedExample> examples);

std::vector<EncodedExample> encode_examples(std::span<const TokenizedExample> examples,
                                            const Vocabulary& vocab, std::size_t max_len);

} // namespace techtexc
