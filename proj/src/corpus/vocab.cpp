#include "correct/corpus/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <stdexcept>

namespace correct::corpus {

namespace {
const char* const kSpecials[] = {"[PAD]", "[UNK]", "[CLS]"};
}

std::vector<std::string> split_words(std::string_view text) {
    std::vector<std::string> words;
    std::string cur;
    for (char ch : text) {
        const auto u = static_cast<unsigned char>(ch);
        if (std::isalnum(u)) {
            cur.push_back(static_cast<char>(std::tolower(u)));
        } else if (!cur.empty()) {
            words.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) words.push_back(std::move(cur));
    return words;
}

Vocab::Vocab() : Vocab(std::vector<std::string>{}) {}

Vocab::Vocab(const std::vector<std::string>& tokens) {
    for (const char* s : kSpecials) tokens_.emplace_back(s);
    tokens_.insert(tokens_.end(), tokens.begin(), tokens.end());
    for (TokenId i = 0; i < tokens_.size(); ++i) {
        if (!index_.emplace(tokens_[i], i).second) {
            throw std::invalid_argument("vocab: duplicate token '" + tokens_[i] + "'");
        }
    }
}

TokenId Vocab::id(const std::string& token) const {
    auto it = index_.find(token);
    return it == index_.end() ? kUnk : it->second;
}

Vocab build_vocab_from_texts(const std::vector<std::string>& texts, std::size_t min_count) {
    std::map<std::string, std::size_t> counts;
    for (const auto& t : texts)
        for (auto& w : split_words(t)) ++counts[w];

    std::vector<std::pair<std::string, std::size_t>> kept;
    for (auto& [w, n] : counts)
        if (n >= min_count) kept.emplace_back(w, n);
    std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });

    std::vector<std::string> tokens;
    tokens.reserve(kept.size());
    for (auto& [w, _] : kept) tokens.push_back(w);
    return Vocab(tokens);
}

Vocab build_vocab(const Dataset& dataset, std::size_t min_count) {
    if (dataset.claims.empty() && (!dataset.corpus || dataset.corpus->evidence().empty())) {
        throw DataError("build_vocab: empty dataset");
    }
    std::vector<std::string> texts;
    for (const auto& c : dataset.claims) texts.push_back(c.text);
    if (dataset.corpus) {
        for (const auto& e : dataset.corpus->evidence()) texts.push_back(e.text);
        for (const auto& d : dataset.corpus->contexts()) texts.push_back(d.text);
        for (const auto& d : dataset.corpus->references()) texts.push_back(d.text);
    }
    return build_vocab_from_texts(texts, min_count);
}

std::vector<TokenId> tokenize(std::string_view text, const Vocab& vocab, std::size_t max_len) {
    if (max_len < 2) throw std::invalid_argument("tokenize: max_len must be >= 2");
    std::vector<TokenId> ids{kCls};
    for (const auto& w : split_words(text)) {
        if (ids.size() == max_len) break;
        ids.push_back(vocab.id(w));
    }
    return ids;
}

std::string detokenize(const std::vector<TokenId>& ids, const Vocab& vocab) {
    std::string out;
    for (TokenId id : ids) {
        if (id == kCls || id == kPad) continue;
        if (!out.empty()) out.push_back(' ');
        out += vocab.token(id);
    }
    return out;
}

}  // namespace correct::corpus
