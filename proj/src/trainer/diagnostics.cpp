#include "correct/trainer/diagnostics.hpp"

#include "correct/util/random.hpp"

namespace correct::trainer {

namespace {

const char* const kToyWords[] = {"red", "blue", "cat", "dog", "runs", "sleeps"};

std::string random_text(util::Rng& rng) {
    const std::size_t n = 2 + util::bounded(rng, 3);
    std::string out;
    for (std::size_t i = 0; i < n; ++i) out += std::string(i ? " " : "") + kToyWords[util::bounded(rng, 6)];
    return out;
}

}  // namespace

corpus::Dataset toy_graph_dataset(std::uint64_t seed, std::size_t graphs) {
    util::Rng rng(seed);
    std::vector<corpus::EvidenceSentence> ev;
    std::vector<corpus::Document> ctx, refs;
    std::vector<corpus::Claim> claims;
    for (std::size_t g = 0; g < graphs; ++g) {
        const std::size_t n_ev = 1 + g % 3;
        const std::size_t n_ref = (g / 3) % 3;
        const std::string tag = std::to_string(g);
        // Two evidence sentences share a context so deduplication is exercised too.
        ctx.push_back({"ctx" + tag + "a", random_text(rng), corpus::DocumentKind::context});
        ctx.push_back({"ctx" + tag + "b", random_text(rng), corpus::DocumentKind::context});
        std::vector<std::vector<std::string>> ev_refs(n_ev);
        for (std::size_t r = 0; r < n_ref; ++r) {
            const std::string id = "ref" + tag + "_" + std::to_string(r);
            refs.push_back({id, random_text(rng), corpus::DocumentKind::reference});
            ev_refs[util::bounded(rng, n_ev)].push_back(id);
        }
        corpus::Claim claim{"x" + tag, random_text(rng), corpus::kAllLabels[util::bounded(rng, 3)], {}};
        for (std::size_t e = 0; e < n_ev; ++e) {
            const std::string id = "e" + tag + "_" + std::to_string(e);
            ev.push_back({id, random_text(rng), "ctx" + tag + (e == 2 ? "b" : "a"), ev_refs[e]});
            claim.evidence_ids.push_back(id);
        }
        claims.push_back(std::move(claim));
    }
    auto corpus = std::make_shared<const corpus::Corpus>(std::move(ev), std::move(ctx), std::move(refs));
    return corpus::Dataset{std::move(claims), corpus, corpus::Split::all};
}

ModelConfig toy_model_config(std::uint64_t seed) {
    ModelConfig c;
    c.steps = 2;
    c.d = 8;
    c.n_heads = 2;
    c.num_prompts = 2;
    c.tau = 1.0;
    c.max_len = 8;
    c.seed = seed;
    return c;
}

std::vector<ToyGradCheck> toy_gradient_checks(std::uint64_t seed, std::size_t graphs, double eps) {
    const auto data = toy_graph_dataset(seed, graphs);
    const auto vocab = corpus::build_vocab(data);
    std::vector<ToyGradCheck> out;
    for (std::size_t g = 0; g < graphs; ++g) {
        const auto& claim = data.claims[g];
        Model model(toy_model_config(seed + g), vocab);
        const auto prepared = model.prepare(claim, *data.corpus);
        ToyGradCheck check;
        check.evidence = prepared.graph.num_evidence();
        check.references = prepared.graph.reference_ids.size();
        check.gold = claim.label;
        check.result = ad::grad_check_parameters(
            model.params(),
            [&](ad::Tape& tape) { return model.loss(tape, model.forward(tape, prepared), claim.label); }, eps);
        out.push_back(std::move(check));
    }
    return out;
}

}  // namespace correct::trainer
