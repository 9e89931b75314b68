#pragma once

#include <cstdint>

#include "correct/corpus/dataset.hpp"

namespace correct::corpus {

/// Controls the synthetic world. Every claim names an entity by its full name; its evidence
/// names the entity by a per-claim alias (resolved only by a reference document) or by its
/// acronym (expanded only in the context document).
struct SyntheticConfig {
    std::size_t claims_per_class = 30;
    std::size_t first_names = 16;   // <= 26
    std::size_t last_names = 16;    // <= 26
    std::size_t attributes = 4;     // <= 8
    std::size_t values = 6;         // <= 12
    std::size_t alias_syllables = 30;  // aliases are three syllables drawn from this inventory
    /// Fraction of each class whose evidence uses an alias (reference-dependent).
    double reference_fraction = 0.5;
    /// Probability that a claim gets a second, label-neutral evidence sentence.
    double extra_evidence_prob = 0.25;
    std::size_t filler_sentences = 1;
};

Dataset generate_synthetic(const SyntheticConfig& config, std::uint64_t seed);

/// Claims whose evidence carries at least one reference document.
Dataset reference_dependent_subset(const Dataset& dataset);

}  // namespace correct::corpus
