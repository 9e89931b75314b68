#include "correct/encoder/encoder.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace correct::encoder {

using ad::Tensor;

void EncoderConfig::validate() const {
    if (vocab_size < 3) throw std::invalid_argument("encoder: vocab_size must cover the special tokens");
    if (d == 0 || n_heads == 0) throw std::invalid_argument("encoder: d and n_heads must be positive");
    if (d % n_heads != 0) {
        throw std::invalid_argument("encoder: d=" + std::to_string(d) + " is not divisible by n_heads=" +
                                    std::to_string(n_heads));
    }
    if (steps == 0) throw std::invalid_argument("encoder: steps must be >= 1");
    if (max_len < 2) throw std::invalid_argument("encoder: max_len must be >= 2");
}

void init_encoder_params(ad::ParameterStore& store, const EncoderConfig& config, util::Rng& rng) {
    config.validate();
    const std::size_t d = config.d;
    const std::size_t ff = config.ff_width();
    const double bound = 1.0 / std::sqrt(static_cast<double>(d));
    const double ff_bound = 1.0 / std::sqrt(static_cast<double>(ff));
    store.add("embed.token", ad::uniform_tensor(config.vocab_size, d, bound, rng));
    store.add("embed.position", ad::uniform_tensor(config.max_len, d, bound, rng));
    for (std::size_t l = 0; l < config.steps; ++l) {
        const std::string p = "step" + std::to_string(l) + ".";
        store.add(p + "wq", ad::uniform_tensor(d, d, bound, rng));
        store.add(p + "wk", ad::uniform_tensor(d, d, bound, rng));
        store.add(p + "wv", ad::uniform_tensor(d, d, bound, rng));
        store.add(p + "ff.w1", ad::uniform_tensor(d, ff, bound, rng));
        store.add(p + "ff.b1", Tensor(1, ff));
        store.add(p + "ff.w2", ad::uniform_tensor(ff, d, ff_bound, rng));
        store.add(p + "ff.b2", Tensor(1, d));
        store.add(p + "ln1.gain", Tensor(1, d, 1.0));
        store.add(p + "ln1.bias", Tensor(1, d));
        store.add(p + "ln2.gain", Tensor(1, d, 1.0));
        store.add(p + "ln2.bias", Tensor(1, d));
    }
    for (const char* kind : {"evidence", "reference", "context"}) {
        const std::string p = std::string("gnn.") + kind + ".";
        store.add(p + "w", ad::uniform_tensor(d, d, bound, rng));
        store.add(p + "b", ad::uniform_tensor(2, d, bound, rng));
    }
}

EncoderVars bind_encoder(Tape& tape, ad::ParameterStore& store, const EncoderConfig& config) {
    EncoderVars v;
    v.token_embed = tape.param(store.get("embed.token"));
    v.pos_embed = tape.param(store.get("embed.position"));
    for (std::size_t l = 0; l < config.steps; ++l) {
        const std::string p = "step" + std::to_string(l) + ".";
        auto bind = [&](const std::string& name) { return tape.param(store.get(p + name)); };
        v.steps.push_back({bind("wq"), bind("wk"), bind("wv"), bind("ff.w1"), bind("ff.b1"), bind("ff.w2"),
                           bind("ff.b2"), bind("ln1.gain"), bind("ln1.bias"), bind("ln2.gain"), bind("ln2.bias")});
    }
    auto gnn = [&](const std::string& kind) {
        return GnnWeights{tape.param(store.get("gnn." + kind + ".w")), tape.param(store.get("gnn." + kind + ".b"))};
    };
    v.evidence = gnn("evidence");
    v.reference = gnn("reference");
    v.context = gnn("context");
    return v;
}

Var embed_tokens(Tape& tape, const EncoderVars& vars, std::span<const TokenId> ids) {
    if (ids.empty()) throw std::invalid_argument("embed_tokens: empty sequence");
    if (ids.size() > vars.pos_embed.rows()) {
        throw std::invalid_argument("embed_tokens: sequence of " + std::to_string(ids.size()) +
                                    " tokens exceeds max_len " + std::to_string(vars.pos_embed.rows()));
    }
    std::vector<std::size_t> positions(ids.size());
    std::iota(positions.begin(), positions.end(), std::size_t{0});
    return tape.add(tape.embedding_lookup(vars.token_embed, ids), tape.embedding_lookup(vars.pos_embed, positions));
}

Var multi_head_attention(Tape& tape, Var queries, Var keys_values, const StepWeights& w, std::size_t n_heads,
                         std::vector<Var>* attention) {
    const std::size_t d = w.wq.rows();
    const std::size_t dh = d / n_heads;
    const double scale = std::sqrt(static_cast<double>(dh));
    Var out;
    for (std::size_t h = 0; h < n_heads; ++h) {
        Var q = tape.matmul(queries, tape.slice_rows(w.wq, h * dh, dh), false, true);
        Var k = tape.matmul(keys_values, tape.slice_rows(w.wk, h * dh, dh), false, true);
        Var v = tape.matmul(keys_values, tape.slice_rows(w.wv, h * dh, dh), false, true);
        Var a = tape.softmax_rows(tape.scalar_divide(tape.matmul(q, k, false, true), scale));
        if (attention) attention->push_back(a);
        Var head = tape.matmul(a, v);
        if (n_heads == 1) return head;
        // Place the head's columns at [h*dh, (h+1)*dh) of the output.
        Tensor place(dh, d);
        for (std::size_t i = 0; i < dh; ++i) place(i, h * dh + i) = 1.0;
        Var placed = tape.matmul(head, tape.constant(std::move(place)));
        out = h == 0 ? placed : tape.add(out, placed);
    }
    return out;
}

Var transformer_step(Tape& tape, Var queries, Var keys_values, const StepWeights& w, std::size_t n_heads,
                     std::vector<Var>* attention) {
    Var att = multi_head_attention(tape, queries, keys_values, w, n_heads, attention);
    Var h1 = tape.layer_norm(tape.add(queries, att), w.ln1_gain, w.ln1_bias);
    // tanh keeps the whole block smooth, so finite differences never straddle a kink here.
    Var hidden = tape.tanh(tape.add(tape.matmul(h1, w.ff_w1), w.ff_b1));
    Var ff = tape.add(tape.matmul(hidden, w.ff_w2), w.ff_b2);
    return tape.layer_norm(tape.add(h1, ff), w.ln2_gain, w.ln2_bias);
}

Var transformer_step(Tape& tape, Var tokens, const StepWeights& w, std::size_t n_heads, std::vector<Var>* attention) {
    return transformer_step(tape, tokens, tokens, w, n_heads, attention);
}

GnnResult gnn_aggregate(Tape& tape, Var center, std::span<const Var> neighbors, const GnnWeights& w) {
    Var proj_c = tape.matmul(center, w.w);
    if (neighbors.empty()) return {proj_c, std::nullopt};
    Var proj_n = tape.matmul(neighbors.size() == 1 ? neighbors[0] : tape.concat_rows(neighbors), w.w);
    Var self_score = tape.matmul(tape.slice_rows(w.b, 0, 1), proj_c, false, true);  // 1 x 1
    Var nb_score = tape.matmul(tape.slice_rows(w.b, 1, 1), proj_n, false, true);    // 1 x k
    Var a = tape.softmax_rows(tape.leaky_relu(tape.add(nb_score, self_score)));
    Var agg = tape.matmul(a, proj_n);
    const Var both[] = {proj_c, agg};
    return {tape.mean_rows(tape.concat_rows(both)), a};
}

std::vector<GnnResult> intra_layer_aggregate(Tape& tape, std::span<const Var> evidence_cls, const GnnWeights& w) {
    std::vector<GnnResult> out;
    out.reserve(evidence_cls.size());
    std::vector<Var> others;
    for (std::size_t e = 0; e < evidence_cls.size(); ++e) {
        others.clear();
        for (std::size_t o = 0; o < evidence_cls.size(); ++o)
            if (o != e) others.push_back(evidence_cls[o]);
        out.push_back(gnn_aggregate(tape, evidence_cls[e], others, w));
    }
    return out;
}

CrossLayerResult cross_layer_aggregate(Tape& tape, Var evidence_cls, std::optional<Var> context_cls,
                                       std::span<const Var> reference_cls, const GnnWeights& context_w,
                                       const GnnWeights& reference_w) {
    CrossLayerResult r;
    if (context_cls) r.context = gnn_aggregate(tape, evidence_cls, std::span<const Var>(&*context_cls, 1), context_w);
    if (!reference_cls.empty()) r.reference = gnn_aggregate(tape, evidence_cls, reference_cls, reference_w);
    return r;
}

Var augment_virtual_tokens(Tape& tape, Var tokens, std::optional<Var> context, std::optional<Var> reference,
                           std::optional<Var> evidence) {
    std::vector<Var> rows;
    for (const auto& v : {context, reference, evidence})
        if (v) rows.push_back(*v);
    if (rows.empty()) return tokens;
    rows.push_back(tokens);
    return tape.concat_rows(rows);
}

GraphTokens tokenize_graph(const graph::ThreeLayerGraph& graph, const corpus::Corpus& corpus,
                           const corpus::Vocab& vocab, std::size_t max_len) {
    GraphTokens t;
    for (const auto& id : graph.evidence_ids) t.evidence.push_back(corpus::tokenize(corpus.evidence(id).text, vocab, max_len));
    for (const auto& id : graph.context_ids) t.contexts.push_back(corpus::tokenize(corpus.context(id).text, vocab, max_len));
    for (const auto& id : graph.reference_ids)
        t.references.push_back(corpus::tokenize(corpus.reference(id).text, vocab, max_len));
    return t;
}

Var pool_evidence(Tape& tape, std::span<const Var> evidence) {
    if (evidence.empty()) throw std::invalid_argument("pool_evidence: no evidence");
    if (evidence.size() == 1) return evidence[0];
    return tape.mean_rows(tape.concat_rows(evidence));
}

GraphEncoding encode_evidence_graph(Tape& tape, const EncoderVars& vars, const EncoderConfig& config,
                                    const graph::ThreeLayerGraph& graph, const GraphTokens& tokens) {
    const std::size_t n = graph.num_evidence();
    if (n == 0) throw std::invalid_argument("encode_evidence_graph: graph has no evidence");
    if (tokens.evidence.size() != n || tokens.contexts.size() != graph.context_ids.size() ||
        tokens.references.size() != graph.reference_ids.size()) {
        throw std::invalid_argument("encode_evidence_graph: token tables do not match graph '" + graph.claim_id + "'");
    }
    const std::size_t heads = config.n_heads;
    const std::size_t L = config.steps;
    // Contexts and references are only consumed from step 1 on; skip them entirely when unused.
    const bool with_ctx = config.use_context_layer && L > 1;
    const bool with_ref = config.use_reference_layer && L > 1 && !graph.reference_ids.empty();

    GraphEncoding out;
    auto plain_step = [&](Var x, std::size_t l) { return transformer_step(tape, x, vars.steps[l], heads, &out.self_attention); };
    auto initial = [&](const std::vector<std::vector<TokenId>>& seqs) {
        std::vector<Var> states;
        for (const auto& ids : seqs) states.push_back(plain_step(embed_tokens(tape, vars, ids), 0));
        return states;
    };
    auto cls = [&](Var h) { return tape.slice_rows(h, 0, 1); };

    std::vector<Var> h_e = initial(tokens.evidence);
    std::vector<Var> h_c = with_ctx ? initial(tokens.contexts) : std::vector<Var>{};
    std::vector<Var> h_r = with_ref ? initial(tokens.references) : std::vector<Var>{};

    for (std::size_t l = 1; l < L; ++l) {
        std::vector<Var> e_cls, c_cls, r_cls;
        for (auto h : h_e) e_cls.push_back(cls(h));
        for (auto h : h_c) c_cls.push_back(cls(h));
        for (auto h : h_r) r_cls.push_back(cls(h));

        StepTrace trace;
        trace.step = l;
        trace.intra.resize(n);
        trace.context.resize(n);
        trace.reference.resize(n);
        std::vector<GnnResult> intra;
        if (config.use_evidence_layer) intra = intra_layer_aggregate(tape, e_cls, vars.evidence);

        std::vector<Var> next(n);
        for (std::size_t e = 0; e < n; ++e) {
            std::optional<Var> ctx;
            if (with_ctx) ctx = c_cls[graph.evidence_context[e]];
            std::vector<Var> refs;
            if (with_ref)
                for (std::size_t r : graph.evidence_references[e]) refs.push_back(r_cls[r]);
            auto cross = cross_layer_aggregate(tape, e_cls[e], ctx, refs, vars.context, vars.reference);

            std::optional<Var> v_c, v_r, v_e;
            if (cross.context) {
                v_c = cross.context->embedding;
                trace.context[e] = cross.context->attention;
            }
            if (cross.reference) {
                v_r = cross.reference->embedding;
                trace.reference[e] = cross.reference->attention;
            }
            if (!intra.empty()) {
                v_e = intra[e].embedding;
                trace.intra[e] = intra[e].attention;
            }
            Var augmented = augment_virtual_tokens(tape, h_e[e], v_c, v_r, v_e);
            next[e] = transformer_step(tape, h_e[e], augmented, vars.steps[l], heads, &out.self_attention);
        }
        h_e = std::move(next);
        out.traces.push_back(std::move(trace));

        if (l + 1 < L) {
            for (auto& h : h_c) h = plain_step(h, l);
            for (auto& h : h_r) h = plain_step(h, l);
        }
    }

    for (auto h : h_e) out.evidence_cls.push_back(cls(h));
    out.pooled = pool_evidence(tape, out.evidence_cls);
    return out;
}

}  // namespace correct::encoder
