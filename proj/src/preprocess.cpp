#include "techtexc/preprocess.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace techtexc {

namespace {

bool is_removed(char c) {
    switch (c) {
        case ',': case '.': case ';': case ':': case '"': case '!':
        case '#': case '$': case '%': case '*': case '@':
            return true;
        default:
            return false;
    }
}

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

} // namespace

std::string clean_text(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    bool pending_space = false;
    for (char c : raw) {
        if (is_removed(c)) continue;
        if (is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(c);
    }
    return out;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&] {
        if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    };
    for (char c : text) {
        if (is_space(c)) {
            flush();
        } else {
            current.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : c);
        }
    }
    flush();
    return tokens;
}

Vocabulary Vocabulary::build(const std::vector<std::vector<std::string>>& corpus_tokens) {
    if (corpus_tokens.empty()) {
        throw std::invalid_argument("Vocabulary::build: empty corpus");
    }

    struct WordStat {
        std::size_t count = 0;
        std::size_t first_seen = 0;
    };
    std::unordered_map<std::string, WordStat> stats;
    std::size_t position = 0;
    for (const auto& tokens : corpus_tokens) {
        for (const auto& word : tokens) {
            auto [it, inserted] = stats.try_emplace(word);
            if (inserted) it->second.first_seen = position;
            it->second.count++;
            ++position;
        }
    }

    std::vector<const std::pair<const std::string, WordStat>*> order;
    order.reserve(stats.size());
    for (const auto& entry : stats) order.push_back(&entry);
    std::sort(order.begin(), order.end(), [](const auto* a, const auto* b) {
        if (a->second.count != b->second.count) return a->second.count > b->second.count;
        return a->second.first_seen < b->second.first_seen;
    });

    Vocabulary vocab;
    vocab.index_to_word_.resize(2); // pad, oov placeholders
    vocab.index_to_word_.reserve(order.size() + 2);
    for (const auto* entry : order) {
        vocab.word_to_index_.emplace(entry->first,
                                     static_cast<std::int32_t>(vocab.index_to_word_.size()));
        vocab.index_to_word_.push_back(entry->first);
    }
    return vocab;
}

std::int32_t Vocabulary::index_of(std::string_view word) const {
    auto it = word_to_index_.find(std::string(word));
    return it == word_to_index_.end() ? kOovIndex : it->second;
}

bool Vocabulary::contains(std::string_view word) const {
    return word_to_index_.count(std::string(word)) > 0;
}

const std::string& Vocabulary::word_at(std::int32_t index) const {
    if (index < 2 || static_cast<std::size_t>(index) >= index_to_word_.size()) {
        throw std::out_of_range("Vocabulary::word_at: index " + std::to_string(index));
    }
    return index_to_word_[static_cast<std::size_t>(index)];
}

std::vector<std::string> Vocabulary::decode(std::span<const std::int32_t> ids) const {
    std::vector<std::string> out;
    for (std::int32_t id : ids) {
        if (id == kPadIndex) continue;
        if (id == kOovIndex || static_cast<std::size_t>(id) >= index_to_word_.size()) {
            out.emplace_back(kOovToken);
        } else {
            out.push_back(index_to_word_[static_cast<std::size_t>(id)]);
        }
    }
    return out;
}

void Vocabulary::save(std::ostream& out) const {
    out << "#vocab v1 K=" << distinct_words() << "\n";
    for (std::size_t i = 2; i < index_to_word_.size(); ++i) {
        out << index_to_word_[i] << '\t' << i << '\n';
    }
}

Vocabulary Vocabulary::load(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) {
        throw std::runtime_error("vocabulary: missing header line");
    }
    if (!header.empty() && header.back() == '\r') header.pop_back();
    std::size_t k = 0;
    if (header.rfind("#vocab v1 K=", 0) != 0) {
        throw std::runtime_error("vocabulary: bad header '" + header + "'");
    }
    try {
        k = std::stoul(header.substr(12));
    } catch (const std::exception&) {
        throw std::runtime_error("vocabulary: bad K in header '" + header + "'");
    }

    Vocabulary vocab;
    vocab.index_to_word_.assign(k + 2, std::string());
    std::vector<bool> seen(k + 2, false);
    std::string line;
    std::size_t entries = 0;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::size_t tab = line.find('\t');
        if (tab == std::string::npos) {
            throw std::runtime_error("vocabulary line " + std::to_string(line_no) +
                                     ": expected word<TAB>index");
        }
        const std::string word = line.substr(0, tab);
        std::size_t index = 0;
        try {
            index = std::stoul(line.substr(tab + 1));
        } catch (const std::exception&) {
            throw std::runtime_error("vocabulary line " + std::to_string(line_no) +
                                     ": bad index");
        }
        if (index < 2 || index >= k + 2 || seen[index]) {
            throw std::runtime_error("vocabulary line " + std::to_string(line_no) +
                                     ": index out of range or duplicated");
        }
        if (vocab.word_to_index_.count(word) > 0) {
            throw std::runtime_error("vocabulary line " + std::to_string(line_no) +
                                     ": duplicate word '" + word + "'");
        }
        seen[index] = true;
        vocab.index_to_word_[index] = word;
        vocab.word_to_index_.emplace(word, static_cast<std::int32_t>(index));
        ++entries;
    }
    if (entries != k) {
        throw std::runtime_error("vocabulary: header promises K=" + std::to_string(k) +
                                 " but found " + std::to_string(entries) + " entries");
    }
    return vocab;
}

std::vector<std::int32_t> encode_and_pad(std::span<const std::string> tokens,
                                         const Vocabulary& vocab, std::size_t max_len) {
    std::vector<std::int32_t> ids(max_len, kPadIndex);
    const std::size_t n = tokens.size();
    const std::size_t take = std::min(n, max_len);
    const std::size_t src_begin = n - take; // pre-truncation keeps the tail
    const std::size_t dst_begin = max_len - take; // pre-padding fills the front
    for (std::size_t i = 0; i < take; ++i) {
        ids[dst_begin + i] = vocab.index_of(tokens[src_begin + i]);
    }
    return ids;
}

std::vector<TokenizedExample> prepare_examples(const LabeledCorpus& corpus, bool drop_short) {
    std::vector<TokenizedExample> out;
    out.reserve(corpus.examples.size());
    for (const auto& ex : corpus.examples) {
        TokenizedExample t{tokenize(clean_text(ex.text)), ex.label};
        if (drop_short && !keep_example(t.tokens)) continue;
        out.push_back(std::move(t));
    }
    return out;
}

std::vector<std::vector<std::string>> token_lists(std::span<const TokenizedExample> examples) {
    std::vector<std::vector<std::string>> out;
    out.reserve(examples.size());
    for (const auto& ex : examples) out.push_back(ex.tokens);
    return out;
}

std::vector<EncodedExample> encode_examples(std::span<const TokenizedExample> examples,
                                            const Vocabulary& vocab, std::size_t max_len) {
    std::vector<EncodedExample> out;
    out.reserve(examples.size());
    for (const auto& ex : examples) {
        out.push_back({encode_and_pad(ex.tokens, vocab, max_len), ex.label});
    }
    return out;
}

} // namespace techtexc
