#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "correct/autodiff/gradcheck.hpp"
#include "correct/prompting/prompting.hpp"

using namespace correct;
using namespace correct::prompting;
using corpus::DocumentKind;

namespace {

double loss_of(std::vector<double> scores, std::size_t gold) {
    Tape tape;
    return contrastive_loss(tape, tape.constant(Tensor::row(std::move(scores))), gold).value().item();
}

encoder::EncoderConfig small_encoder(std::size_t vocab_size, std::size_t steps = 2) {
    encoder::EncoderConfig c;
    c.vocab_size = vocab_size;
    c.d = 8;
    c.n_heads = 2;
    c.steps = steps;
    c.max_len = 8;
    return c;
}

}  // namespace

TEST_CASE("contrastive loss values") {
    CHECK(std::abs(loss_of({0.3, 0.3, 0.3}, 1) - std::log(3.0)) < 1e-9);
    CHECK(std::abs(loss_of({std::log(2.0), 0, 0}, 0) - std::log(2.0)) < 1e-9);
    CHECK(loss_of({60, 0, 0}, 0) < 1e-20);
    // Large scores do not overflow.
    CHECK(std::abs(loss_of({1000, 1000, 1000}, 2) - std::log(3.0)) < 1e-9);
}

TEST_CASE("loss is invariant to shifting every score and class probabilities sum to one") {
    const std::vector<double> s{0.7, -1.2, 2.5};
    for (std::size_t y = 0; y < 3; ++y) {
        CHECK(std::abs(loss_of(s, y) - loss_of({s[0] + 5, s[1] + 5, s[2] + 5}, y)) < 1e-12);
    }
    double total = 0;
    for (std::size_t y = 0; y < 3; ++y) total += std::exp(-loss_of(s, y));
    CHECK(std::abs(total - 1.0) < 1e-9);
}

TEST_CASE("prediction and tie-breaking") {
    CHECK(predict(Tensor::row({3, 1, 1})) == Label::support);
    CHECK(predict(Tensor::row({1, 1, 1})) == Label::support);
    CHECK(predict(Tensor::row({0, 2, 2})) == Label::refute);
    CHECK(predict(Tensor::row({0, 1, 2})) == Label::nei);
    CHECK(predict(Tensor::row({10, 11, 12})) == predict(Tensor::row({0, 1, 2})));
}

TEST_CASE("zeroed conditioner leaves base prompts bit-exact") {
    util::Rng rng(3);
    ad::ParameterStore store;
    PromptConfig cfg{4, 100.0, true};
    init_prompt_params(store, 6, cfg, rng);
    store.get("prompt.alpha.w").value.fill(0.0);
    store.get("prompt.beta.w").value.fill(0.0);
    Tape tape;
    auto vars = bind_prompts(tape, store, cfg);
    auto out = condition_prompts(tape, tape.constant(ad::uniform_tensor(1, 6, 3.0, rng)), vars, cfg);
    for (Label y : corpus::kAllLabels) {
        CHECK(out.prompts[corpus::label_index(y)]->value() == store.get(base_prompt_name(y)).value);
    }
}

TEST_CASE("alpha and beta stay strictly inside (-1, 1)") {
    // Pre-activations here stay well below the ~19 where double tanh rounds to +-1.
    util::Rng rng(5);
    for (double tau : {1.0, 100.0}) {
        ad::ParameterStore store;
        PromptConfig cfg{2, tau, true};
        init_prompt_params(store, 5, cfg, rng);
        store.get("prompt.alpha.w").value = ad::uniform_tensor(5, 5, 4.0, rng);
        store.get("prompt.beta.b").value = ad::uniform_tensor(1, 5, 4.0, rng);
        Tape tape;
        auto vars = bind_prompts(tape, store, cfg);
        auto out = condition_prompts(tape, tape.constant(ad::uniform_tensor(1, 5, 2.0, rng)), vars, cfg);
        for (auto v : {*out.alpha, *out.beta})
            for (double x : v.value().data()) CHECK((x > -1.0 && x < 1.0));
    }
}

TEST_CASE("conditioning matches a hand computation") {
    ad::ParameterStore store;
    util::Rng rng(1);
    PromptConfig cfg{1, 1.0, true};
    init_prompt_params(store, 2, cfg, rng);
    for (Label y : corpus::kAllLabels) store.get(base_prompt_name(y)).value = Tensor::row({1, 1});
    store.get("prompt.alpha.w").value.fill(0.0);
    store.get("prompt.beta.w").value.fill(0.0);
    store.get("prompt.alpha.b").value = Tensor::row({1, 0});
    store.get("prompt.beta.b").value = Tensor::row({0, 1});
    Tape tape;
    auto out = condition_prompts(tape, tape.constant(Tensor::row({0.4, -0.9})), bind_prompts(tape, store, cfg), cfg);
    const double expect = 1.0 + std::tanh(1.0);
    const auto& pi = out.prompts[0]->value();
    CHECK(std::abs(pi(0, 0) - expect) < 1e-12);
    CHECK(std::abs(pi(0, 1) - expect) < 1e-12);
}

TEST_CASE("disabled conditioner passes base prompts through") {
    ad::ParameterStore store;
    util::Rng rng(2);
    PromptConfig cfg{3, 100.0, false};
    init_prompt_params(store, 4, cfg, rng);
    Tape tape;
    auto vars = bind_prompts(tape, store, cfg);
    auto out = condition_prompts(tape, tape.constant(Tensor(1, 4, 1.0)), vars, cfg);
    CHECK(!out.alpha);
    CHECK(out.prompts[2]->id() == vars.base[2]->id());
}

TEST_CASE("claim encoding") {
    const auto vocab = corpus::build_vocab_from_texts({"a b c d e f g h"});
    auto ecfg = small_encoder(vocab.size());
    ad::ParameterStore store;
    util::Rng rng(9);
    encoder::init_encoder_params(store, ecfg, rng);
    const auto ids = corpus::tokenize("a b c", vocab, 8);

    SUBCASE("identical prompts give identical encodings") {
        Tape tape;
        auto vars = encoder::bind_encoder(tape, store, ecfg);
        Var p = tape.constant(ad::uniform_tensor(2, 8, 1.0, rng));
        const Tensor a = encode_claim(tape, vars, ecfg, ids, p).value();
        CHECK(a.cols() == 8);
        CHECK(a == encode_claim(tape, vars, ecfg, ids, p).value());
    }
    SUBCASE("no prompts reduces to plain claim encoding") {
        Tape tape;
        auto vars = encoder::bind_encoder(tape, store, ecfg);
        const Tensor a = encode_claim(tape, vars, ecfg, ids, std::nullopt).value();
        Var h = encoder::embed_tokens(tape, vars, ids);
        for (const auto& step : vars.steps) h = encoder::transformer_step(tape, h, step, ecfg.n_heads);
        CHECK(a == tape.slice_rows(h, 0, 1).value());
    }
    SUBCASE("long claims are truncated, prompts are not") {
        Tape tape;
        auto vars = encoder::bind_encoder(tape, store, ecfg);
        const auto long_ids = corpus::tokenize("a b c d e f g h", vocab, 8);
        Var p = tape.constant(ad::uniform_tensor(6, 8, 1.0, rng));
        const Tensor a = encode_claim(tape, vars, ecfg, long_ids, p).value();
        const std::vector<corpus::TokenId> head(long_ids.begin(), long_ids.begin() + 2);
        CHECK(a == encode_claim(tape, vars, ecfg, head, p).value());
        Var too_many = tape.constant(ad::uniform_tensor(8, 8, 1.0, rng));
        CHECK_THROWS(encode_claim(tape, vars, ecfg, long_ids, too_many));
    }
}

namespace {

struct InitFixture {
    corpus::Vocab vocab = corpus::build_vocab_from_texts({"u v w x"});
    Tensor table;

    InitFixture() {
        table = Tensor(vocab.size(), 2);
        for (std::size_t r = 0; r < table.rows(); ++r) {
            table(r, 0) = static_cast<double>(r);
            table(r, 1) = 10.0 * static_cast<double>(r);
        }
    }
    std::size_t row(const char* w) const { return vocab.id(w); }
};

corpus::Dataset dataset_of(std::vector<corpus::EvidenceSentence> ev, std::vector<corpus::Document> ctx,
                           std::vector<corpus::Document> refs, std::vector<corpus::Claim> claims) {
    auto c = std::make_shared<const corpus::Corpus>(std::move(ev), std::move(ctx), std::move(refs));
    return corpus::Dataset{std::move(claims), c, corpus::Split::train};
}

}  // namespace

TEST_CASE("base prompt init from a single evidence") {
    InitFixture f;
    auto ds = dataset_of({{"e1", "u u u", "c1", {}}}, {{"c1", "", DocumentKind::context}}, {},
                         {{"x1", "claim", Label::support, {"e1"}}});
    auto init = init_base_prompt(ds, Label::support, f.vocab, f.table, 2);
    REQUIRE(init);
    for (std::size_t m = 0; m < 2; ++m) {
        CHECK((*init)(m, 0) == f.table(f.row("u"), 0));
        CHECK((*init)(m, 1) == f.table(f.row("u"), 1));
    }
    CHECK(!init_base_prompt(ds, Label::refute, f.vocab, f.table, 2));
}

TEST_CASE("base prompt init matches a hand computation on two claims") {
    InitFixture f;
    // Claim 1: evidence "u v", context "w", reference "x x".
    // Claim 2: evidence "v", context "u w".
    auto ds = dataset_of({{"e1", "u v", "c1", {"r1"}}, {"e2", "v", "c2", {}}},
                         {{"c1", "w", DocumentKind::context}, {"c2", "u w", DocumentKind::context}},
                         {{"r1", "x x", DocumentKind::reference}},
                         {{"x1", "a", Label::nei, {"e1"}}, {"x2", "b", Label::nei, {"e2"}}});
    auto init = init_base_prompt(ds, Label::nei, f.vocab, f.table, 2);
    REQUIRE(init);
    // Column 0 of the table is the row index; column 1 is ten times that.
    double mean = 0;
    for (std::size_t r = 0; r < f.table.rows(); ++r) mean += static_cast<double>(r);
    mean /= static_cast<double>(f.table.rows());
    const double u = f.row("u"), v = f.row("v"), w = f.row("w"), x = f.row("x");
    // Claim 1: position 0 = (u + w + x)/3, position 1 = (v + mean + x)/3.
    // Claim 2 (no reference set): position 0 = (v + u)/2, position 1 = (mean + w)/2.
    const double p0 = ((u + w + x) / 3 + (v + u) / 2) / 2;
    const double p1 = ((v + mean + x) / 3 + (mean + w) / 2) / 2;
    CHECK(std::abs((*init)(0, 0) - p0) < 1e-9);
    CHECK(std::abs((*init)(1, 0) - p1) < 1e-9);
    CHECK(std::abs((*init)(1, 1) - 10 * p1) < 1e-9);

    // Swapping which claim owns which graph leaves the average unchanged.
    auto swapped = dataset_of({{"e1", "u v", "c1", {"r1"}}, {"e2", "v", "c2", {}}},
                              {{"c1", "w", DocumentKind::context}, {"c2", "u w", DocumentKind::context}},
                              {{"r1", "x x", DocumentKind::reference}},
                              {{"x1", "a", Label::nei, {"e2"}}, {"x2", "b", Label::nei, {"e1"}}});
    auto again = init_base_prompt(swapped, Label::nei, f.vocab, f.table, 2);
    for (std::size_t i = 0; i < init->size(); ++i) CHECK(std::abs((*again)[i] - (*init)[i]) < 1e-12);
}

TEST_CASE("loss gradients through encoder and prompts match finite differences") {
    const auto vocab = corpus::build_vocab_from_texts({"a b c d"});
    auto ecfg = small_encoder(vocab.size());
    PromptConfig pcfg{2, 1.0, true};
    ad::ParameterStore store;
    util::Rng rng(13);
    encoder::init_encoder_params(store, ecfg, rng);
    init_prompt_params(store, ecfg.d, pcfg, rng);
    store.get("prompt.alpha.b").value = ad::uniform_tensor(1, 8, 0.5, rng);
    const auto claim = corpus::tokenize("a c", vocab, 8);
    const Tensor pooled = ad::uniform_tensor(1, 8, 1.0, rng);
    auto result = ad::grad_check_parameters(store, [&](Tape& tape) {
        auto ev = encoder::bind_encoder(tape, store, ecfg);
        auto pv = bind_prompts(tape, store, pcfg);
        Var h_e = tape.leaf(pooled);
        auto cond = condition_prompts(tape, h_e, pv, pcfg);
        std::vector<Var> hx;
        for (auto& p : cond.prompts) hx.push_back(encode_claim(tape, ev, ecfg, claim, p));
        return contrastive_loss(tape, label_scores(tape, h_e, hx), 1);
    });
    INFO(result.worst << " " << result.max_rel_error);
    CHECK(result.passed(1e-4));
}
