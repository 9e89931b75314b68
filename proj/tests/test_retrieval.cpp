#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "correct/corpus/synthetic.hpp"
#include "correct/corpus/vocab.hpp"
#include "correct/retrieval/bm25.hpp"
#include "correct/retrieval/tfidf.hpp"
#include "oracles.hpp"

using namespace correct;
using namespace correct::retrieval;
using corpus::EvidenceSentence;

namespace {

std::vector<EvidenceSentence> sentences(std::vector<std::pair<std::string, std::string>> rows) {
    std::vector<EvidenceSentence> out;
    for (auto& [id, text] : rows) out.push_back({id, text, "ctx", {}});
    return out;
}

std::vector<std::string> ids_of(const std::vector<ScoredId>& hits) {
    std::vector<std::string> out;
    for (const auto& h : hits) out.push_back(h.id);
    return out;
}

}  // namespace

TEST_CASE("index statistics") {
    auto idx = bm25_index(sentences({{"s2", "beta"}, {"s1", "alpha"}, {"s3", "gamma"}}));
    CHECK(idx.num_terms() == 3);
    for (const char* t : {"alpha", "beta", "gamma"}) CHECK(idx.df(t) == 1);
    CHECK(idx.doc_id(0) == "s1");  // numbered by ascending id
    CHECK(idx.average_length() == 1.0);
    CHECK_THROWS(bm25_index({}));
}

TEST_CASE("postings are sorted by sentence id and rebuilding is stable") {
    auto docs = sentences({{"d", "x y"}, {"a", "x"}, {"c", "y x x"}, {"b", "z"}});
    auto idx = bm25_index(docs);
    const auto* px = idx.postings("x");
    REQUIRE(px);
    CHECK(px->size() == idx.df("x"));
    for (std::size_t i = 1; i < px->size(); ++i) CHECK(idx.doc_id((*px)[i - 1].doc) < idx.doc_id((*px)[i].doc));
    auto again = bm25_index(docs);
    CHECK(again.average_length() == idx.average_length());
    CHECK(bm25_topk(again, "x y z", 4)[0].score == bm25_topk(idx, "x y z", 4)[0].score);
}

TEST_CASE("term unique to a sentence ranks it first") {
    auto idx = bm25_index(sentences({{"a", "the cat sat"}, {"b", "the dog ran"}, {"c", "a bird flew"}}));
    CHECK(bm25_topk(idx, "dog", 1)[0].id == "b");
    CHECK(bm25_topk(idx, "", 3).empty());
    CHECK(bm25_topk(idx, "dog", 10).size() == 3);
    CHECK_THROWS(bm25_topk(idx, "dog", 0));
}

TEST_CASE("duplicate sentences receive equal scores") {
    auto idx = bm25_index(sentences({{"a", "red fox jumps"}, {"b", "red fox jumps"}, {"c", "blue fish"}}));
    for (const char* q : {"red", "fox fish", "jumps jumps blue"}) {
        double sa = -1, sb = -2;
        for (auto& h : bm25_topk(idx, q, 3)) {
            if (h.id == "a") sa = h.score;
            if (h.id == "b") sb = h.score;
        }
        CHECK(sa == sb);
    }
}

TEST_CASE("BM25 matches a loop-based oracle") {
    auto docs = sentences({{"s1", "alpha beta beta gamma"},
                           {"s2", "beta delta"},
                           {"s3", "gamma gamma gamma epsilon alpha"},
                           {"s4", "zeta"}});
    auto idx = bm25_index(docs);
    std::vector<std::string> texts;
    for (const auto& d : docs) texts.push_back(d.text);
    for (const char* q : {"alpha", "beta gamma", "gamma gamma zeta", "delta unknown", "alpha beta gamma delta epsilon zeta"}) {
        for (const auto& hit : bm25_topk(idx, q, 4)) {
            const auto pos = static_cast<std::size_t>(hit.id[1] - '1');
            CHECK(std::abs(hit.score - oracle::bm25(texts, q, pos)) < 1e-9);
        }
    }
}

TEST_CASE("top-k is a prefix of top-(k+1) and scores are non-increasing") {
    auto ds = corpus::generate_synthetic({}, 2);
    auto idx = bm25_index(ds.corpus->evidence());
    for (std::size_t i = 0; i < 10; ++i) {
        const auto& q = ds.claims[i].text;
        for (std::size_t k = 1; k < 6; ++k) {
            auto a = bm25_topk(idx, q, k);
            auto b = bm25_topk(idx, q, k + 1);
            CHECK(std::equal(a.begin(), a.end(), b.begin(), [](auto& x, auto& y) { return x.id == y.id; }));
            for (std::size_t j = 1; j < b.size(); ++j) CHECK(b[j - 1].score >= b[j].score);
        }
    }
}

TEST_CASE("scores are invariant under corpus permutation") {
    auto docs = sentences({{"a", "one two"}, {"b", "two three"}, {"c", "three four four"}, {"d", "one four"}});
    auto ref = bm25_topk(bm25_index(docs), "one four", 4);
    std::mt19937 rng(1);
    for (int trial = 0; trial < 5; ++trial) {
        std::shuffle(docs.begin(), docs.end(), rng);
        auto got = bm25_topk(bm25_index(docs), "one four", 4);
        CHECK(ids_of(got) == ids_of(ref));
        for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i].score == ref[i].score);
    }
}

TEST_CASE("retrieval emits exactly k ids per claim") {
    auto ds = corpus::generate_synthetic({}, 4);
    auto out = retrieve_for_claims(ds, 3);
    CHECK(out.size() == ds.claims.size());
    for (const auto& [_, ids] : out) CHECK(ids.size() == 3);
    auto swapped = with_retrieved_evidence(ds, 3);
    for (const auto& c : swapped.claims) CHECK(c.evidence_ids.size() == 3);
}

TEST_CASE("tf-idf similarity edge cases") {
    TfidfStats stats({"a b", "b c", "c c d"});
    auto v = tfidf_vector("a b", stats);
    CHECK(tfidf_similarity(v, v) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(tfidf_similarity(v, tfidf_vector("c d", stats)) == 0.0);
    CHECK(tfidf_similarity(v, tfidf_vector("", stats)) == 0.0);
    CHECK(tfidf_vector("", stats).empty());
}

TEST_CASE("tf-idf cosine matches hand computation on a 3-document corpus") {
    TfidfStats stats({"a b", "b c", "c c d"});
    // N = 3; df(a)=1, df(b)=2, df(c)=2, df(d)=1.
    const double i_ad = std::log(4.0 / 2.0) + 1.0;
    const double i_bc = std::log(4.0 / 3.0) + 1.0;
    CHECK(std::abs(stats.idf("a") - i_ad) < 1e-12);
    CHECK(std::abs(stats.idf("c") - i_bc) < 1e-12);
    // "b c" vs "c c d": dot = 2 * idf(c)^2.
    const double expected = 2 * i_bc * i_bc / (std::sqrt(2 * i_bc * i_bc) * std::sqrt(4 * i_bc * i_bc + i_ad * i_ad));
    const double got = tfidf_similarity(tfidf_vector("b c", stats), tfidf_vector("c c d", stats));
    CHECK(std::abs(got - expected) < 1e-9);
    CHECK(std::abs(got - oracle::tfidf_cosine({"a b", "b c", "c c d"}, "b c", "c c d")) < 1e-12);
    // Symmetric.
    CHECK(got == tfidf_similarity(tfidf_vector("c c d", stats), tfidf_vector("b c", stats)));
}

TEST_CASE("NEI evidence selection") {
    auto one = sentences({{"only", "nothing shared"}});
    TfidfStats stats({"nothing shared"});
    CHECK(select_nei_evidence("claim text", one, 1, stats) == std::vector<std::string>{"only"});

    auto cands = sentences({{"e1", "alpha"}, {"e2", "beta gamma"}, {"e3", "delta"}});
    TfidfStats s2({"alpha", "beta gamma", "delta"});
    CHECK(select_nei_evidence("gamma ray", cands, 3, s2).front() == "e2");
    CHECK_THROWS(select_nei_evidence("x", {}, 1, s2));
}

TEST_CASE("NEI selection agrees with an exhaustive sort") {
    auto cands = sentences({{"e5", "red apple pie"},
                            {"e1", "green apple"},
                            {"e3", "apple apple tart"},
                            {"e2", "blue sky"},
                            {"e4", "red sky at night"}});
    std::vector<std::string> texts;
    for (const auto& c : cands) texts.push_back(c.text);
    TfidfStats stats(texts);
    const std::string claim = "red apple sky";
    auto got = select_nei_evidence(claim, cands, 3, stats);

    std::vector<std::pair<double, std::string>> all;
    for (const auto& c : cands)
        all.emplace_back(tfidf_similarity(tfidf_vector(claim, stats), tfidf_vector(c.text, stats)), c.id);
    // Exhaustive: compare every pair, count how many beat each candidate.
    std::vector<std::string> expected;
    for (std::size_t rank = 0; rank < 3; ++rank) {
        for (const auto& [s, id] : all) {
            std::size_t better = 0;
            for (const auto& [s2, id2] : all) better += (s2 > s || (s2 == s && id2 < id)) ? 1 : 0;
            if (better == rank) expected.push_back(id);
        }
    }
    CHECK(got == expected);
}

TEST_CASE("fill_nei_evidence only touches NEI claims without evidence") {
    auto ds = corpus::generate_synthetic({}, 9);
    auto claims = ds.claims;
    for (auto& c : claims)
        if (c.label == corpus::Label::nei) c.evidence_ids.clear();
    auto filled = fill_nei_evidence(ds.with_claims(claims, ds.split), 3);
    for (std::size_t i = 0; i < claims.size(); ++i) {
        if (claims[i].label == corpus::Label::nei) CHECK(filled.claims[i].evidence_ids.size() == 3);
        else CHECK(filled.claims[i].evidence_ids == ds.claims[i].evidence_ids);
    }
}
