#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "correct/corpus/dataset.hpp"

namespace correct::retrieval {

struct Posting {
    std::uint32_t doc;  // position in id-sorted order
    std::uint32_t tf;
};

struct ScoredId {
    std::string id;
    double score = 0.0;
};

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

/// Term -> postings over tokenized sentences. Documents are numbered in ascending id order,
/// so every postings list is sorted by sentence id.
class InvertedIndex {
  public:
    struct Entry {
        std::string id;
        std::string text;
    };

    explicit InvertedIndex(std::vector<Entry> entries);

    std::size_t num_docs() const { return ids_.size(); }
    std::size_t num_terms() const { return postings_.size(); }
    double average_length() const { return avg_len_; }
    std::size_t length(std::uint32_t doc) const { return lengths_[doc]; }
    const std::string& doc_id(std::uint32_t doc) const { return ids_[doc]; }
    std::size_t df(const std::string& term) const;
    const std::vector<Posting>* postings(const std::string& term) const;

  private:
    std::vector<std::string> ids_;
    std::vector<std::size_t> lengths_;
    double avg_len_ = 0.0;
    std::unordered_map<std::string, std::vector<Posting>> postings_;
};

InvertedIndex bm25_index(const std::vector<corpus::EvidenceSentence>& evidence);

/// Robertson-Sparck Jones idf with +1 inside the log, which keeps it positive.
double bm25_idf(std::size_t num_docs, std::size_t df);

/// Top-k sentences by BM25; ties by ascending id; zero-score sentences rank last.
/// Empty (token-free) queries return nothing.
std::vector<ScoredId> bm25_topk(const InvertedIndex& index, std::string_view query, std::size_t k,
                                Bm25Params params = {});

/// Claim id -> top-k evidence ids for every claim in the dataset.
std::map<std::string, std::vector<std::string>> retrieve_for_claims(const corpus::Dataset& dataset,
                                                                    std::size_t k,
                                                                    Bm25Params params = {});

/// Copy of the dataset whose claims use BM25 top-k evidence instead of gold evidence.
corpus::Dataset with_retrieved_evidence(const corpus::Dataset& dataset, std::size_t k);

}  // namespace correct::retrieval
