#include "correct/retrieval/bm25.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "correct/corpus/vocab.hpp"

namespace correct::retrieval {

InvertedIndex::InvertedIndex(std::vector<Entry> entries) {
    if (entries.empty()) throw std::invalid_argument("bm25_index: empty corpus");
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.id < b.id; });
    std::size_t total = 0;
    for (std::uint32_t doc = 0; doc < entries.size(); ++doc) {
        const auto words = corpus::split_words(entries[doc].text);
        ids_.push_back(entries[doc].id);
        lengths_.push_back(words.size());
        total += words.size();
        std::map<std::string, std::uint32_t> tf;
        for (const auto& w : words) ++tf[w];
        for (const auto& [term, n] : tf) postings_[term].push_back({doc, n});
    }
    avg_len_ = static_cast<double>(total) / static_cast<double>(ids_.size());
}

std::size_t InvertedIndex::df(const std::string& term) const {
    const auto* p = postings(term);
    return p ? p->size() : 0;
}

const std::vector<Posting>* InvertedIndex::postings(const std::string& term) const {
    auto it = postings_.find(term);
    return it == postings_.end() ? nullptr : &it->second;
}

InvertedIndex bm25_index(const std::vector<corpus::EvidenceSentence>& evidence) {
    std::vector<InvertedIndex::Entry> entries;
    entries.reserve(evidence.size());
    for (const auto& e : evidence) entries.push_back({e.id, e.text});
    return InvertedIndex(std::move(entries));
}

double bm25_idf(std::size_t num_docs, std::size_t df) {
    const auto n = static_cast<double>(num_docs);
    const auto f = static_cast<double>(df);
    return std::log(1.0 + (n - f + 0.5) / (f + 0.5));
}

std::vector<ScoredId> bm25_topk(const InvertedIndex& index, std::string_view query, std::size_t k,
                                Bm25Params params) {
    if (k == 0) throw std::invalid_argument("bm25_topk: k must be >= 1");
    const auto terms = corpus::split_words(query);
    if (terms.empty()) return {};

    std::vector<double> scores(index.num_docs(), 0.0);
    const double avg = index.average_length();
    for (const auto& term : terms) {
        const auto* plist = index.postings(term);
        if (!plist) continue;
        const double idf = bm25_idf(index.num_docs(), plist->size());
        for (const auto& p : *plist) {
            const double tf = p.tf;
            const double norm = 1.0 - params.b + params.b * static_cast<double>(index.length(p.doc)) / avg;
            scores[p.doc] += idf * tf * (params.k1 + 1.0) / (tf + params.k1 * norm);
        }
    }

    // Documents are numbered in id order, so the index is the id tie-break.
    std::vector<std::uint32_t> order(index.num_docs());
    std::iota(order.begin(), order.end(), 0u);
    const std::size_t take = std::min(k, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                      [&](std::uint32_t a, std::uint32_t b) {
                          return scores[a] != scores[b] ? scores[a] > scores[b] : a < b;
                      });
    std::vector<ScoredId> out;
    out.reserve(take);
    for (std::size_t i = 0; i < take; ++i) out.push_back({index.doc_id(order[i]), scores[order[i]]});
    return out;
}

std::map<std::string, std::vector<std::string>> retrieve_for_claims(const corpus::Dataset& dataset,
                                                                    std::size_t k, Bm25Params params) {
    const auto index = bm25_index(dataset.corpus->evidence());
    std::map<std::string, std::vector<std::string>> out;
    for (const auto& c : dataset.claims) {
        auto& ids = out[c.id];
        for (auto& hit : bm25_topk(index, c.text, k, params)) ids.push_back(std::move(hit.id));
    }
    return out;
}

corpus::Dataset with_retrieved_evidence(const corpus::Dataset& dataset, std::size_t k) {
    auto retrieved = retrieve_for_claims(dataset, k);
    auto claims = dataset.claims;
    for (auto& c : claims) c.evidence_ids = retrieved[c.id];
    return dataset.with_claims(std::move(claims), dataset.split);
}

}  // namespace correct::retrieval
