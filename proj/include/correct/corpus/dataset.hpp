#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace correct::corpus {

/// Malformed or inconsistent input data.
class DataError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

enum class Label : std::uint8_t { support = 0, refute = 1, nei = 2 };

inline constexpr std::size_t kNumLabels = 3;
/// Fixed label order; also the prediction tie-break order.
inline constexpr std::array<Label, kNumLabels> kAllLabels = {Label::support, Label::refute, Label::nei};

std::string_view label_name(Label label);
std::optional<Label> parse_label(std::string_view text);
inline std::size_t label_index(Label label) { return static_cast<std::size_t>(label); }

struct Claim {
    std::string id;
    std::string text;
    Label label = Label::support;
    std::vector<std::string> evidence_ids;
};

struct EvidenceSentence {
    std::string id;
    std::string text;
    std::string context_id;
    std::vector<std::string> reference_ids;
};

enum class DocumentKind : std::uint8_t { context, reference };

struct Document {
    std::string id;
    std::string text;
    DocumentKind kind = DocumentKind::context;
};

/// Evidence sentences and documents shared by every split of a dataset.
class Corpus {
  public:
    Corpus() = default;
    Corpus(std::vector<EvidenceSentence> evidence, std::vector<Document> contexts,
           std::vector<Document> references);

    const std::vector<EvidenceSentence>& evidence() const { return evidence_; }
    const std::vector<Document>& contexts() const { return contexts_; }
    const std::vector<Document>& references() const { return references_; }

    const EvidenceSentence* find_evidence(const std::string& id) const;
    const Document* find_context(const std::string& id) const;
    const Document* find_reference(const std::string& id) const;

    const EvidenceSentence& evidence(const std::string& id) const;
    const Document& context(const std::string& id) const;
    const Document& reference(const std::string& id) const;

    /// Throws DataError on duplicate ids or dangling context/reference ids.
    void validate() const;

  private:
    std::vector<EvidenceSentence> evidence_;
    std::vector<Document> contexts_;
    std::vector<Document> references_;
    std::unordered_map<std::string, std::size_t> evidence_index_;
    std::unordered_map<std::string, std::size_t> context_index_;
    std::unordered_map<std::string, std::size_t> reference_index_;
};

enum class Split : std::uint8_t { all, train, valid, test };
std::string_view split_name(Split split);

struct Dataset {
    std::vector<Claim> claims;
    std::shared_ptr<const Corpus> corpus;
    Split split = Split::all;

    /// Same corpus, different claims.
    Dataset with_claims(std::vector<Claim> subset, Split tag) const;
    std::size_t count(Label label) const;
    /// Labels with at least one claim, in fixed label order.
    std::vector<Label> labels_present() const;
    /// Throws DataError if a claim references an unknown evidence id.
    void validate() const;
};

inline constexpr std::size_t kDefaultMaxSentences = 20;

/// Keeps the first `max_sentences` sentences (split after ., ! or ? followed by whitespace).
std::string truncate_sentences(std::string_view text, std::size_t max_sentences);

std::vector<Claim> read_claims(const std::filesystem::path& path);
std::vector<EvidenceSentence> read_evidence(const std::filesystem::path& path);
std::vector<Document> read_documents(const std::filesystem::path& path, DocumentKind kind,
                                     std::size_t max_sentences = kDefaultMaxSentences);

/// Loads the four JSONL files and validates referential integrity. Errors name the file
/// and line number.
Dataset load_dataset(const std::filesystem::path& claim_path,
                     const std::filesystem::path& evidence_path,
                     const std::filesystem::path& context_path,
                     const std::filesystem::path& reference_path,
                     std::size_t max_sentences = kDefaultMaxSentences);

/// Loads a claims file against an already-loaded corpus (used for split files).
Dataset load_claims(const std::filesystem::path& claim_path, std::shared_ptr<const Corpus> corpus,
                    Split split = Split::all);

void write_claims(const std::filesystem::path& path, const std::vector<Claim>& claims);
void write_corpus(const std::filesystem::path& dir, const Corpus& corpus);

/// k claims per label in `labels` (default: labels present), seed-deterministic.
Dataset sample_few_shot(const Dataset& dataset, std::size_t k, std::uint64_t seed,
                        std::optional<std::vector<Label>> labels = std::nullopt);

/// Disjoint, exhaustive, label-stratified partition with part sizes from `ratios`
/// (largest-remainder rounding). Every label in `labels` must have at least one claim.
std::vector<Dataset> split_dataset(const Dataset& dataset, const std::vector<double>& ratios,
                                   std::uint64_t seed,
                                   const std::vector<Label>& labels = {kAllLabels.begin(),
                                                                       kAllLabels.end()});

struct ProtocolSplit {
    Dataset train;
    Dataset valid;
    Dataset test;
};

/// 80:20 train/test, then 10% of train reserved for validation.
ProtocolSplit protocol_split(const Dataset& dataset, std::uint64_t seed,
                             const std::vector<Label>& labels = {kAllLabels.begin(),
                                                                 kAllLabels.end()});

/// Drops claims labeled NEI (retrieved-evidence protocol on two-label test sets).
Dataset exclude_nei(const Dataset& dataset);

}  // namespace correct::corpus
