#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>

#include "correct/corpus/synthetic.hpp"
#include "correct/graph/graph.hpp"

using namespace correct;
using namespace correct::graph;
using corpus::Corpus;
using corpus::Document;
using corpus::DocumentKind;

namespace {

Corpus toy_corpus() {
    return Corpus({{"e1", "first", "c1", {"r1", "r2"}},
                   {"e2", "second", "c1", {}},
                   {"e3", "third", "c2", {"r2"}}},
                  {{"c1", "doc one", DocumentKind::context}, {"c2", "doc two", DocumentKind::context}},
                  {{"r1", "ref one", DocumentKind::reference}, {"r2", "ref two", DocumentKind::reference}});
}

// Recount from the raw corpus without the graph's deduplicated tables.
GraphStats recount(const std::vector<std::string>& evidence_ids, const Corpus& c) {
    GraphStats s;
    std::set<std::string> ctx, refs;
    s.evidence = evidence_ids.size();
    for (const auto& a : evidence_ids) {
        for (const auto& b : evidence_ids) s.intra_links += (&a != &b) ? 1 : 0;
        const auto& ev = c.evidence(a);
        ctx.insert(ev.context_id);
        s.context_links += 1;
        for (const auto& r : ev.reference_ids) {
            refs.insert(r);
            s.reference_links += 1;
        }
    }
    s.contexts = ctx.size();
    s.references = refs.size();
    return s;
}

}  // namespace

TEST_CASE("three evidence sentences form a complete evidence layer") {
    auto c = toy_corpus();
    auto g = build_graph("x", {"e1", "e2", "e3"}, c);
    CHECK(g.intra_links().size() == 6);
    CHECK(g.neighbors(1) == std::vector<std::size_t>{0, 2});
    CHECK(g.evidence_ids == std::vector<std::string>{"e1", "e2", "e3"});
    // Shared context c1 is instantiated once.
    CHECK(g.context_ids == std::vector<std::string>{"c1", "c2"});
    CHECK(g.evidence_context == std::vector<std::size_t>{0, 0, 1});
    CHECK(g.reference_ids == std::vector<std::string>{"r1", "r2"});
    CHECK(g.evidence_references[0] == std::vector<std::size_t>{0, 1});
    CHECK(g.evidence_references[1].empty());
    CHECK(g.evidence_references[2] == std::vector<std::size_t>{1});
}

TEST_CASE("single evidence has no intra links and one context link") {
    auto c = toy_corpus();
    auto g = build_graph("x", {"e2"}, c);
    auto s = graph_stats(g);
    CHECK(s.intra_links == 0);
    CHECK(s.context_links == 1);
    CHECK(s.references == 0);
    CHECK(s.reference_links == 0);
}

TEST_CASE("unresolved ids and empty evidence are rejected") {
    auto c = toy_corpus();
    CHECK_THROWS_AS(build_graph("x", {"nope"}, c), corpus::DataError);
    CHECK_THROWS_AS(build_graph("x", {}, c), corpus::DataError);
}

TEST_CASE("graph statistics agree with a brute-force recount") {
    auto c = toy_corpus();
    for (const auto& ids : std::vector<std::vector<std::string>>{
             {"e1"}, {"e2", "e1"}, {"e3", "e2", "e1"}, {"e2", "e3"}}) {
        CHECK(graph_stats(build_graph("x", ids, c)) == recount(ids, c));
    }
    auto ds = corpus::generate_synthetic({}, 3);
    for (const auto& claim : ds.claims) {
        auto s = graph_stats(build_graph(claim, *ds.corpus));
        CHECK(s == recount(claim.evidence_ids, *ds.corpus));
        CHECK(s.intra_links == s.evidence * (s.evidence - 1));
    }
}

TEST_CASE("build_graph is deterministic and the JSON dump lists every link") {
    auto c = toy_corpus();
    auto a = build_graph("x", {"e1", "e3"}, c);
    auto b = build_graph("x", {"e1", "e3"}, c);
    CHECK(graph_to_json(a) == graph_to_json(b));
    auto j = graph_to_json(a);
    const auto s = graph_stats(a);
    CHECK(j["links"].size() == s.intra_links + s.context_links + s.reference_links);
}
