#pragma once

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "correct/corpus/dataset.hpp"

namespace correct::graph {

/// Per-claim graph with an evidence layer (complete graph), a context layer (one link per
/// evidence) and a reference layer (links mirror each evidence's reference_ids).
/// Documents shared by several evidence sentences appear once.
struct ThreeLayerGraph {
    std::string claim_id;
    std::vector<std::string> evidence_ids;
    std::vector<std::string> context_ids;
    std::vector<std::string> reference_ids;
    /// evidence index -> index into context_ids
    std::vector<std::size_t> evidence_context;
    /// evidence index -> indices into reference_ids, in reference_ids order of the evidence
    std::vector<std::vector<std::size_t>> evidence_references;

    std::size_t num_evidence() const { return evidence_ids.size(); }
    /// Ordered pairs (e, e') with e != e'.
    std::vector<std::pair<std::size_t, std::size_t>> intra_links() const;
    /// Neighbors of evidence e on the evidence layer, ascending.
    std::vector<std::size_t> neighbors(std::size_t e) const;
};

/// Builds the graph over `evidence_ids` (gold evidence or retrieved ids), preserving order.
ThreeLayerGraph build_graph(const std::string& claim_id, const std::vector<std::string>& evidence_ids,
                            const corpus::Corpus& corpus);

/// Gold-evidence graph for a claim; rejects claims without evidence.
ThreeLayerGraph build_graph(const corpus::Claim& claim, const corpus::Corpus& corpus);

struct GraphStats {
    std::size_t evidence = 0;
    std::size_t contexts = 0;
    std::size_t references = 0;
    std::size_t intra_links = 0;
    std::size_t context_links = 0;
    std::size_t reference_links = 0;

    bool operator==(const GraphStats&) const = default;
};

GraphStats graph_stats(const ThreeLayerGraph& graph);

/// Adjacency dump for inspection.
nlohmann::json graph_to_json(const ThreeLayerGraph& graph);

}  // namespace correct::graph
