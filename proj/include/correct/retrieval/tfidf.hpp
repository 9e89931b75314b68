#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "correct/corpus/dataset.hpp"

namespace correct::retrieval {

/// Sparse term -> weight map; ordered so iteration (and thus summation) is deterministic.
using SparseVector = std::map<std::string, double>;

/// Document frequencies over a reference corpus. tf is the raw count and
/// idf = ln((N + 1) / (df + 1)) + 1.
class TfidfStats {
  public:
    explicit TfidfStats(const std::vector<std::string>& texts);

    double idf(const std::string& term) const;
    std::size_t num_docs() const { return num_docs_; }

  private:
    std::size_t num_docs_ = 0;
    std::map<std::string, std::size_t> df_;
};

TfidfStats tfidf_stats(const std::vector<corpus::EvidenceSentence>& evidence);

SparseVector tfidf_vector(std::string_view text, const TfidfStats& stats);

/// Cosine similarity; 0 when either vector is zero.
double tfidf_similarity(const SparseVector& a, const SparseVector& b);

/// Top-k candidates by tf-idf similarity to the claim, ties by ascending id.
std::vector<std::string> select_nei_evidence(std::string_view claim,
                                             const std::vector<corpus::EvidenceSentence>& candidates,
                                             std::size_t k, const TfidfStats& stats);

/// NEI claims without gold evidence receive the k most similar sentences of the corpus.
corpus::Dataset fill_nei_evidence(const corpus::Dataset& dataset, std::size_t k);

}  // namespace correct::retrieval
