#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "correct/corpus/dataset.hpp"

namespace correct::corpus {

using TokenId = std::size_t;

inline constexpr TokenId kPad = 0;
inline constexpr TokenId kUnk = 1;
inline constexpr TokenId kCls = 2;

/// Lowercased maximal runs of ASCII letters and digits; everything else separates.
std::vector<std::string> split_words(std::string_view text);

class Vocab {
  public:
    Vocab();
    /// Specials are prepended; `tokens` must not contain them.
    explicit Vocab(const std::vector<std::string>& tokens);

    TokenId id(const std::string& token) const;
    const std::string& token(TokenId id) const { return tokens_.at(id); }
    bool contains(const std::string& token) const { return index_.count(token) != 0; }
    std::size_t size() const { return tokens_.size(); }
    /// All tokens in id order, specials included.
    const std::vector<std::string>& tokens() const { return tokens_; }

    bool operator==(const Vocab& other) const { return tokens_ == other.tokens_; }

  private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, TokenId> index_;
};

/// Counts tokens over claim texts and the whole corpus; keeps those with count >= min_count,
/// ordered by (count desc, token asc).
Vocab build_vocab(const Dataset& dataset, std::size_t min_count = 1);
Vocab build_vocab_from_texts(const std::vector<std::string>& texts, std::size_t min_count = 1);

/// [CLS] followed by word ids, truncated to max_len (>= 2).
std::vector<TokenId> tokenize(std::string_view text, const Vocab& vocab, std::size_t max_len);

/// Space-joined tokens of the ids, skipping [CLS] and [PAD].
std::string detokenize(const std::vector<TokenId>& ids, const Vocab& vocab);

}  // namespace correct::corpus
