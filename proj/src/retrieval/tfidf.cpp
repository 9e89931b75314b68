#include "correct/retrieval/tfidf.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "correct/corpus/vocab.hpp"

namespace correct::retrieval {

TfidfStats::TfidfStats(const std::vector<std::string>& texts) : num_docs_(texts.size()) {
    for (const auto& t : texts) {
        const auto words = corpus::split_words(t);
        for (const auto& w : std::set<std::string>(words.begin(), words.end())) ++df_[w];
    }
}

double TfidfStats::idf(const std::string& term) const {
    auto it = df_.find(term);
    const double df = it == df_.end() ? 0.0 : static_cast<double>(it->second);
    return std::log((static_cast<double>(num_docs_) + 1.0) / (df + 1.0)) + 1.0;
}

TfidfStats tfidf_stats(const std::vector<corpus::EvidenceSentence>& evidence) {
    std::vector<std::string> texts;
    texts.reserve(evidence.size());
    for (const auto& e : evidence) texts.push_back(e.text);
    return TfidfStats(texts);
}

SparseVector tfidf_vector(std::string_view text, const TfidfStats& stats) {
    SparseVector v;
    for (const auto& w : corpus::split_words(text)) v[w] += 1.0;
    for (auto& [term, weight] : v) weight *= stats.idf(term);
    return v;
}

double tfidf_similarity(const SparseVector& a, const SparseVector& b) {
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (const auto& [t, w] : a) {
        na += w * w;
        if (auto it = b.find(t); it != b.end()) dot += w * it->second;
    }
    for (const auto& [_, w] : b) nb += w * w;
    if (na == 0.0 || nb == 0.0) return 0.0;
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), 0.0, 1.0);
}

std::vector<std::string> select_nei_evidence(std::string_view claim,
                                             const std::vector<corpus::EvidenceSentence>& candidates,
                                             std::size_t k, const TfidfStats& stats) {
    if (candidates.empty()) throw std::invalid_argument("select_nei_evidence: no candidates");
    const auto q = tfidf_vector(claim, stats);
    std::vector<std::pair<double, const std::string*>> scored;
    scored.reserve(candidates.size());
    for (const auto& c : candidates) scored.emplace_back(tfidf_similarity(q, tfidf_vector(c.text, stats)), &c.id);
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : *a.second < *b.second;
    });
    std::vector<std::string> out;
    for (std::size_t i = 0; i < std::min(k, scored.size()); ++i) out.push_back(*scored[i].second);
    return out;
}

corpus::Dataset fill_nei_evidence(const corpus::Dataset& dataset, std::size_t k) {
    const auto& pool = dataset.corpus->evidence();
    const auto stats = tfidf_stats(pool);
    auto claims = dataset.claims;
    for (auto& c : claims) {
        if (c.label == corpus::Label::nei && c.evidence_ids.empty()) {
            c.evidence_ids = select_nei_evidence(c.text, pool, k, stats);
        }
    }
    return dataset.with_claims(std::move(claims), dataset.split);
}

}  // namespace correct::retrieval
