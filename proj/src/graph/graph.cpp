#include "correct/graph/graph.hpp"

#include <unordered_map>

namespace correct::graph {

std::vector<std::pair<std::size_t, std::size_t>> ThreeLayerGraph::intra_links() const {
    std::vector<std::pair<std::size_t, std::size_t>> links;
    for (std::size_t a = 0; a < evidence_ids.size(); ++a)
        for (std::size_t b = 0; b < evidence_ids.size(); ++b)
            if (a != b) links.emplace_back(a, b);
    return links;
}

std::vector<std::size_t> ThreeLayerGraph::neighbors(std::size_t e) const {
    std::vector<std::size_t> out;
    for (std::size_t b = 0; b < evidence_ids.size(); ++b)
        if (b != e) out.push_back(b);
    return out;
}

namespace {

std::size_t intern(std::vector<std::string>& ids, std::unordered_map<std::string, std::size_t>& seen,
                   const std::string& id) {
    auto [it, inserted] = seen.emplace(id, ids.size());
    if (inserted) ids.push_back(id);
    return it->second;
}

}  // namespace

ThreeLayerGraph build_graph(const std::string& claim_id, const std::vector<std::string>& evidence_ids,
                            const corpus::Corpus& corpus) {
    if (evidence_ids.empty()) {
        throw corpus::DataError("claim '" + claim_id + "' has no evidence to build a graph from");
    }
    ThreeLayerGraph g;
    g.claim_id = claim_id;
    std::unordered_map<std::string, std::size_t> ctx_seen;
    std::unordered_map<std::string, std::size_t> ref_seen;
    for (const auto& eid : evidence_ids) {
        const auto* ev = corpus.find_evidence(eid);
        if (!ev) throw corpus::DataError("claim '" + claim_id + "': unresolved evidence id '" + eid + "'");
        if (!corpus.find_context(ev->context_id)) {
            throw corpus::DataError("evidence '" + eid + "': unresolved context id '" + ev->context_id + "'");
        }
        g.evidence_ids.push_back(eid);
        g.evidence_context.push_back(intern(g.context_ids, ctx_seen, ev->context_id));
        auto& refs = g.evidence_references.emplace_back();
        for (const auto& rid : ev->reference_ids) {
            if (!corpus.find_reference(rid)) {
                throw corpus::DataError("evidence '" + eid + "': unresolved reference id '" + rid + "'");
            }
            refs.push_back(intern(g.reference_ids, ref_seen, rid));
        }
    }
    return g;
}

ThreeLayerGraph build_graph(const corpus::Claim& claim, const corpus::Corpus& corpus) {
    return build_graph(claim.id, claim.evidence_ids, corpus);
}

GraphStats graph_stats(const ThreeLayerGraph& graph) {
    GraphStats s;
    s.evidence = graph.evidence_ids.size();
    s.contexts = graph.context_ids.size();
    s.references = graph.reference_ids.size();
    s.intra_links = s.evidence * (s.evidence - 1);
    s.context_links = graph.evidence_context.size();
    for (const auto& refs : graph.evidence_references) s.reference_links += refs.size();
    return s;
}

nlohmann::json graph_to_json(const ThreeLayerGraph& graph) {
    nlohmann::json j;
    j["claim_id"] = graph.claim_id;
    j["evidence"] = graph.evidence_ids;
    j["contexts"] = graph.context_ids;
    j["references"] = graph.reference_ids;
    auto& links = j["links"] = nlohmann::json::array();
    for (auto [a, b] : graph.intra_links()) {
        links.push_back({{"type", "intra"}, {"from", graph.evidence_ids[a]}, {"to", graph.evidence_ids[b]}});
    }
    for (std::size_t e = 0; e < graph.num_evidence(); ++e) {
        links.push_back({{"type", "context"},
                         {"from", graph.evidence_ids[e]},
                         {"to", graph.context_ids[graph.evidence_context[e]]}});
        for (std::size_t r : graph.evidence_references[e]) {
            links.push_back(
                {{"type", "reference"}, {"from", graph.evidence_ids[e]}, {"to", graph.reference_ids[r]}});
        }
    }
    return j;
}

}  // namespace correct::graph
