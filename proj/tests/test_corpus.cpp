#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "correct/corpus/dataset.hpp"
#include "correct/corpus/synthetic.hpp"
#include "correct/corpus/vocab.hpp"

using namespace correct::corpus;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    fs::path write(const std::string& file, const std::string& content) const {
        std::ofstream(path / file) << content;
        return path / file;
    }
};

Dataset tiny_dataset(std::vector<std::pair<std::string, Label>> claims) {
    std::vector<Claim> cs;
    for (auto& [text, label] : claims) cs.push_back({"c" + std::to_string(cs.size()), text, label, {}});
    return Dataset{cs, std::make_shared<const Corpus>(), Split::all};
}

Dataset balanced(std::size_t n) {
    std::vector<std::pair<std::string, Label>> cs;
    for (std::size_t i = 0; i < n; ++i) cs.emplace_back("claim " + std::to_string(i), kAllLabels[i % 3]);
    return tiny_dataset(cs);
}

std::set<std::string> ids(const Dataset& d) {
    std::set<std::string> out;
    for (const auto& c : d.claims) out.insert(c.id);
    return out;
}

}  // namespace

TEST_CASE("load_dataset links all four files") {
    TempDir dir("correct_corpus_load");
    auto claims = dir.write("claims.jsonl",
                            R"({"id":"x1","text":"A is B.","label":"SUPPORT","evidence_ids":["e1"]})" "\n"
                            R"({"id":"x2","text":"A is C.","label":"NEI","evidence_ids":[]})" "\n");
    auto evidence = dir.write("evidence.jsonl",
                              R"({"id":"e1","text":"A is B.","context_id":"c1","reference_ids":["r1"]})" "\n");
    auto contexts = dir.write("contexts.jsonl", R"({"id":"c1","text":"One. Two. Three."})" "\n");
    auto refs = dir.write("references.jsonl", R"({"id":"r1","text":"A is also B."})" "\n");
    auto ds = load_dataset(claims, evidence, contexts, refs, 2);
    CHECK(ds.claims.size() == 2);
    CHECK(ds.claims[0].label == Label::support);
    CHECK(ds.corpus->evidence("e1").reference_ids == std::vector<std::string>{"r1"});
    CHECK(ds.corpus->context("c1").text == "One. Two.");
    CHECK(ds.corpus->reference("r1").kind == DocumentKind::reference);
}

TEST_CASE("dangling context id is rejected with the id and line number") {
    TempDir dir("correct_corpus_dangling");
    auto claims = dir.write("claims.jsonl", "");
    auto evidence = dir.write("evidence.jsonl",
                              R"({"id":"e0","text":"ok","context_id":"c1","reference_ids":[]})" "\n"
                              R"({"id":"e1","text":"t","context_id":"missing","reference_ids":[]})" "\n");
    auto contexts = dir.write("contexts.jsonl", R"({"id":"c1","text":"x"})" "\n");
    auto refs = dir.write("references.jsonl", "");
    try {
        load_dataset(claims, evidence, contexts, refs);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("missing") != std::string::npos);
        CHECK(msg.find("evidence.jsonl:2") != std::string::npos);
    }
}

TEST_CASE("duplicate ids and unknown labels are rejected with line numbers") {
    TempDir dir("correct_corpus_dup");
    auto evidence = dir.write("evidence.jsonl", R"({"id":"e1","text":"t","context_id":"c1"})" "\n");
    auto contexts = dir.write("contexts.jsonl", R"({"id":"c1","text":"x"})" "\n");
    auto refs = dir.write("references.jsonl", "");
    auto dup = dir.write("dup.jsonl", R"({"id":"a","text":"t","label":"SUPPORT","evidence_ids":["e1"]})" "\n"
                                      R"({"id":"a","text":"t","label":"REFUTE","evidence_ids":["e1"]})" "\n");
    CHECK_THROWS_WITH_AS(load_dataset(dup, evidence, contexts, refs), doctest::Contains("dup.jsonl:2"), DataError);
    auto bad = dir.write("bad.jsonl", R"({"id":"a","text":"t","label":"MAYBE","evidence_ids":[]})" "\n");
    CHECK_THROWS_WITH_AS(load_dataset(bad, evidence, contexts, refs), doctest::Contains("MAYBE"), DataError);
    auto dangling = dir.write("dangling.jsonl", "\n" R"({"id":"a","text":"t","label":"NEI","evidence_ids":["zz"]})" "\n");
    CHECK_THROWS_WITH_AS(load_dataset(dangling, evidence, contexts, refs), doctest::Contains("dangling.jsonl:2"),
                         DataError);
}

TEST_CASE("empty reference file is valid when no evidence cites references") {
    TempDir dir("correct_corpus_norefs");
    auto claims = dir.write("claims.jsonl", R"({"id":"a","text":"t","label":"REFUTE","evidence_ids":["e1"]})" "\n");
    auto evidence = dir.write("evidence.jsonl", R"({"id":"e1","text":"t","context_id":"c1","reference_ids":[]})" "\n");
    auto contexts = dir.write("contexts.jsonl", R"({"id":"c1","text":"x"})" "\n");
    auto refs = dir.write("references.jsonl", "");
    auto ds = load_dataset(claims, evidence, contexts, refs);
    CHECK(ds.corpus->references().empty());
    CHECK_NOTHROW(ds.validate());
}

TEST_CASE("ingest accepts FEVEROUS-S-sized files") {
    // 23,912 train claims, 19,546 context documents, 21,579 reference documents.
    TempDir dir("correct_corpus_scale");
    constexpr std::size_t kClaims = 23912, kContexts = 19546, kRefs = 21579;
    {
        std::ofstream c(dir.path / "contexts.jsonl");
        for (std::size_t i = 0; i < kContexts; ++i) c << R"({"id":"c)" << i << R"(","text":"page )" << i << "\"}\n";
        std::ofstream r(dir.path / "references.jsonl");
        for (std::size_t i = 0; i < kRefs; ++i) r << R"({"id":"r)" << i << R"(","text":"linked )" << i << "\"}\n";
        std::ofstream e(dir.path / "evidence.jsonl");
        std::ofstream x(dir.path / "claims.jsonl");
        for (std::size_t i = 0; i < kClaims; ++i) {
            e << R"({"id":"e)" << i << R"(","text":"s","context_id":"c)" << i % kContexts
              << R"(","reference_ids":["r)" << i % kRefs << "\"]}\n";
            x << R"({"id":"x)" << i << R"(","text":"claim","label":")" << (i % 2 ? "REFUTE" : "SUPPORT")
              << R"(","evidence_ids":["e)" << i << "\"]}\n";
        }
    }
    auto ds = load_dataset(dir.path / "claims.jsonl", dir.path / "evidence.jsonl", dir.path / "contexts.jsonl",
                           dir.path / "references.jsonl");
    CHECK(ds.claims.size() == kClaims);
    CHECK(ds.corpus->contexts().size() == kContexts);
    CHECK(ds.corpus->references().size() == kRefs);
}

TEST_CASE("sentence truncation keeps the first sentences") {
    CHECK(truncate_sentences("a. b! c? d.", 2) == "a. b!");
    CHECK(truncate_sentences("no boundary 3.5 here", 1) == "no boundary 3.5 here");
    std::string long_text;
    for (int i = 0; i < 30; ++i) long_text += "s" + std::to_string(i) + ". ";
    CHECK(split_words(truncate_sentences(long_text, kDefaultMaxSentences)).size() == 20);
}

TEST_CASE("vocab ordering and min_count") {
    auto v = build_vocab(tiny_dataset({{"a a b", Label::support}}), 2);
    CHECK(v.contains("a"));
    CHECK_FALSE(v.contains("b"));
    CHECK(v.id("a") == 3);
    CHECK(v.id("zzz") == kUnk);

    auto ds = tiny_dataset({{"Five distinct, tokens: here now", Label::nei}});
    auto v1 = build_vocab(ds, 1);
    CHECK(v1.size() == 5 + 3);
    CHECK(v1 == build_vocab(ds, 1));
    // Equal counts order alphabetically; higher counts come first.
    auto v2 = build_vocab(tiny_dataset({{"zeta beta beta alpha", Label::support}}), 1);
    CHECK(v2.tokens() == std::vector<std::string>{"[PAD]", "[UNK]", "[CLS]", "beta", "alpha", "zeta"});
}

TEST_CASE("tokenize prepends CLS and truncates") {
    auto v = build_vocab(tiny_dataset({{"hello world", Label::support}}), 1);
    CHECK(tokenize("", v, 8) == std::vector<TokenId>{kCls});
    CHECK(tokenize("hello hello", v, 8) == std::vector<TokenId>{kCls, v.id("hello"), v.id("hello")});
    CHECK(tokenize("Hello, unseen", v, 8) == std::vector<TokenId>{kCls, v.id("hello"), kUnk});
    std::string hundred;
    for (int i = 0; i < 100; ++i) hundred += "world ";
    CHECK(tokenize(hundred, v, 16).size() == 16);
    CHECK_THROWS_AS(tokenize("x", v, 1), std::invalid_argument);
}

TEST_CASE("tokenize and detokenize round-trip in-vocabulary lowercase text") {
    auto ds = generate_synthetic({}, 5);
    auto v = build_vocab(ds, 1);
    for (const auto& c : ds.claims) {
        std::string joined;
        for (const auto& w : split_words(c.text)) joined += (joined.empty() ? "" : " ") + w;
        CHECK(detokenize(tokenize(joined, v, 64), v) == joined);
    }
}

TEST_CASE("few-shot sampling") {
    auto ds = balanced(30);
    auto few = sample_few_shot(ds, 5, 42);
    CHECK(few.claims.size() == 15);
    for (Label l : kAllLabels) CHECK(few.count(l) == 5);
    CHECK(ids(few) == ids(sample_few_shot(ds, 5, 42)));
    CHECK(ids(few) != ids(sample_few_shot(ds, 5, 43)));

    auto three = balanced(3);
    CHECK(ids(sample_few_shot(three, 1, 0)) == ids(three));
    CHECK_THROWS_AS(sample_few_shot(balanced(9), 4, 0), DataError);
}

TEST_CASE("protocol split yields 72/8/20 and is seed-deterministic") {
    auto ds = balanced(100);
    auto s = protocol_split(ds, 7);
    CHECK(s.train.claims.size() == 72);
    CHECK(s.valid.claims.size() == 8);
    CHECK(s.test.claims.size() == 20);
    std::set<std::string> all;
    for (const auto* part : {&s.train, &s.valid, &s.test})
        for (const auto& c : part->claims) CHECK(all.insert(c.id).second);
    CHECK(all == ids(ds));
    auto again = protocol_split(ds, 7);
    CHECK(ids(again.test) == ids(s.test));
    CHECK(ids(again.valid) == ids(s.valid));
    // Stratified: every label appears in the test part in near-equal numbers.
    for (Label l : kAllLabels) CHECK(s.test.count(l) >= 6);
}

TEST_CASE("split rejects empty classes and bad ratios") {
    auto two = tiny_dataset({{"a", Label::support}, {"b", Label::support}});
    CHECK_THROWS_AS(split_dataset(two, {0.5, 0.5}, 1), DataError);
    CHECK_NOTHROW(split_dataset(two, {0.5, 0.5}, 1, {Label::support}));
    CHECK_THROWS_AS(split_dataset(balanced(9), {0.5, 0.6}, 1), std::invalid_argument);
}

TEST_CASE("synthetic corpus is balanced, linked and seed-deterministic") {
    SyntheticConfig cfg;
    cfg.claims_per_class = 30;
    auto ds = generate_synthetic(cfg, 11);
    CHECK(ds.claims.size() == 90);
    for (Label l : kAllLabels) CHECK(ds.count(l) == 30);
    CHECK_NOTHROW(ds.validate());
    CHECK_NOTHROW(ds.corpus->validate());

    auto again = generate_synthetic(cfg, 11);
    REQUIRE(again.claims.size() == ds.claims.size());
    for (std::size_t i = 0; i < ds.claims.size(); ++i) {
        CHECK(again.claims[i].text == ds.claims[i].text);
        CHECK(again.claims[i].label == ds.claims[i].label);
    }
    for (std::size_t i = 0; i < ds.corpus->references().size(); ++i)
        CHECK(again.corpus->references()[i].text == ds.corpus->references()[i].text);
    CHECK(reference_dependent_subset(ds).claims.size() == 45);
}

TEST_CASE("synthetic generator rejects an alias vocabulary that is too small") {
    SyntheticConfig cfg;
    cfg.alias_syllables = 3;  // 27 aliases for 45 reference-dependent claims
    CHECK_THROWS_WITH_AS(generate_synthetic(cfg, 1), doctest::Contains("too small"), DataError);
}

namespace {

// Exact-match oracle: resolves the evidence mention through "X stands for A B" (context) or
// "X is another name for A B" (references) and compares names and values by string equality.
struct Fact {
    std::string attr, subject, value;
};

Fact parse_fact(const std::string& text) {
    auto w = split_words(text);  // the <attr> of <subject...> is <value>
    Fact f;
    f.attr = w.at(1);
    for (std::size_t i = 3; i + 2 < w.size(); ++i) f.subject += (f.subject.empty() ? "" : " ") + w[i];
    f.value = w.back();
    return f;
}

std::string resolve(const std::string& mention, const std::string& text, const std::string& phrase) {
    auto w = split_words(text);
    auto p = split_words(phrase);
    for (std::size_t i = 0; i + p.size() + 2 < w.size(); ++i) {
        if (w[i] != mention) continue;
        bool ok = true;
        for (std::size_t k = 0; k < p.size(); ++k) ok = ok && w[i + 1 + k] == p[k];
        if (ok) return w[i + 1 + p.size()] + " " + w[i + 2 + p.size()];
    }
    return "";
}

enum class OracleOut { support, refute, nei, unresolved };

OracleOut oracle(const Claim& claim, const Corpus& corpus, bool use_references) {
    const Fact cf = parse_fact(claim.text);
    const auto& ev = corpus.evidence(claim.evidence_ids.front());
    const Fact ef = parse_fact(ev.text);
    std::string name = resolve(ef.subject, corpus.context(ev.context_id).text, "stands for");
    if (use_references)
        for (const auto& r : ev.reference_ids)
            if (name.empty()) name = resolve(ef.subject, corpus.reference(r).text, "is another name for");
    if (name.empty()) return OracleOut::unresolved;
    if (name != cf.subject) return OracleOut::nei;
    return ef.value == cf.value ? OracleOut::support : OracleOut::refute;
}

}  // namespace

TEST_CASE("without references, string matching cannot separate SUPPORT from NEI on alias claims") {
    SyntheticConfig cfg;
    cfg.claims_per_class = 40;
    auto ds = generate_synthetic(cfg, 3);
    auto refdep = reference_dependent_subset(ds);
    REQUIRE(refdep.claims.size() == 60);

    // With references the oracle recovers every label.
    for (const auto& c : ds.claims) {
        const auto out = oracle(c, *ds.corpus, true);
        const auto expected = c.label == Label::support  ? OracleOut::support
                              : c.label == Label::refute ? OracleOut::refute
                                                         : OracleOut::nei;
        CHECK(out == expected);
    }

    // Without them nothing resolves, and the observable signature (attribute match, value
    // match, mention is an unseen token) of SUPPORT claims also occurs for NEI claims.
    std::map<Label, std::set<std::pair<bool, bool>>> signatures;
    for (const auto& c : refdep.claims) {
        CHECK(oracle(c, *ds.corpus, false) == OracleOut::unresolved);
        const Fact cf = parse_fact(c.text);
        const Fact ef = parse_fact(ds.corpus->evidence(c.evidence_ids.front()).text);
        signatures[c.label].insert({cf.attr == ef.attr, cf.value == ef.value});
    }
    for (const auto& sig : signatures[Label::support]) CHECK(signatures[Label::nei].count(sig) == 1);
    for (const auto& sig : signatures[Label::refute]) CHECK(signatures[Label::nei].count(sig) == 1);
}
