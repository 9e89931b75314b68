#include "correct/prompting/prompting.hpp"

#include <cmath>
#include <stdexcept>

#include "correct/graph/graph.hpp"

namespace correct::prompting {

std::string base_prompt_name(Label label) { return "prompt.base." + std::string(corpus::label_name(label)); }

void init_prompt_params(ad::ParameterStore& store, std::size_t d, const PromptConfig& config, util::Rng& rng) {
    if (config.tau <= 0) throw std::invalid_argument("prompting: tau must be positive");
    const double bound = 1.0 / std::sqrt(static_cast<double>(d));
    if (config.num_prompts > 0) {
        for (Label y : corpus::kAllLabels) store.add(base_prompt_name(y), ad::uniform_tensor(config.num_prompts, d, bound, rng));
    }
    store.add("prompt.alpha.w", ad::uniform_tensor(d, d, bound, rng));
    store.add("prompt.alpha.b", Tensor(1, d));
    store.add("prompt.beta.w", ad::uniform_tensor(d, d, bound, rng));
    store.add("prompt.beta.b", Tensor(1, d));
}

PromptVars bind_prompts(Tape& tape, ad::ParameterStore& store, const PromptConfig& config) {
    PromptVars v;
    if (config.num_prompts > 0) {
        for (Label y : corpus::kAllLabels) v.base[corpus::label_index(y)] = tape.param(store.get(base_prompt_name(y)));
    }
    v.alpha_w = tape.param(store.get("prompt.alpha.w"));
    v.alpha_b = tape.param(store.get("prompt.alpha.b"));
    v.beta_w = tape.param(store.get("prompt.beta.w"));
    v.beta_b = tape.param(store.get("prompt.beta.b"));
    return v;
}

ConditionedPrompts condition_prompts(Tape& tape, Var pooled, const PromptVars& vars, const PromptConfig& config) {
    ConditionedPrompts out;
    if (!config.use_conditioner) {
        out.prompts = vars.base;
        return out;
    }
    auto squash = [&](Var w, Var b) {
        return tape.tanh(tape.scalar_divide(tape.add(tape.matmul(pooled, w), b), config.tau));
    };
    Var alpha = squash(vars.alpha_w, vars.alpha_b);
    Var beta = squash(vars.beta_w, vars.beta_b);
    out.alpha = alpha;
    out.beta = beta;
    Var scale = tape.add(alpha, tape.constant(Tensor::scalar(1.0)));
    for (std::size_t y = 0; y < out.prompts.size(); ++y) {
        if (vars.base[y]) out.prompts[y] = tape.add(tape.multiply(*vars.base[y], scale), beta);
    }
    return out;
}

Var encode_claim(Tape& tape, const encoder::EncoderVars& vars, const encoder::EncoderConfig& config,
                 std::span<const corpus::TokenId> claim_ids, std::optional<Var> prompts) {
    if (claim_ids.empty()) throw std::invalid_argument("encode_claim: empty claim sequence");
    const std::size_t m = prompts ? prompts->rows() : 0;
    if (config.max_len < m + 1) {
        throw std::invalid_argument("encode_claim: max_len " + std::to_string(config.max_len) +
                                    " leaves no room for CLS after " + std::to_string(m) + " prompts");
    }
    const std::size_t keep = std::min(claim_ids.size(), config.max_len - m);
    Var seq = encoder::embed_tokens(tape, vars, claim_ids.first(keep));
    if (prompts) {
        std::vector<Var> parts{tape.slice_rows(seq, 0, 1), *prompts};
        if (keep > 1) parts.push_back(tape.slice_rows(seq, 1, keep - 1));
        seq = tape.concat_rows(parts);
    }
    for (const auto& step : vars.steps) seq = encoder::transformer_step(tape, seq, step, config.n_heads);
    return tape.slice_rows(seq, 0, 1);
}

Var label_scores(Tape& tape, Var pooled, std::span<const Var> claim_encodings) {
    Var stacked = claim_encodings.size() == 1 ? claim_encodings[0] : tape.concat_rows(claim_encodings);
    return tape.matmul(pooled, stacked, false, true);
}

Var contrastive_loss(Tape& tape, Var scores, std::size_t gold) {
    const Tensor& s = scores.value();
    if (s.rows() != 1 || gold >= s.cols()) throw std::invalid_argument("contrastive_loss: bad scores or gold index");
    double top = s(0, 0);
    for (std::size_t j = 1; j < s.cols(); ++j) top = std::max(top, s(0, j));
    if (!std::isfinite(top)) throw std::domain_error("contrastive_loss: non-finite scores");
    Var shifted = tape.add(scores, tape.constant(Tensor::scalar(-top)));
    Var lse = tape.log(tape.dot(tape.exp(shifted), tape.constant(Tensor(1, s.cols(), 1.0))));
    Tensor onehot(1, s.cols());
    onehot(0, gold) = 1.0;
    Var gold_score = tape.dot(shifted, tape.constant(std::move(onehot)));
    return tape.add(lse, tape.multiply(gold_score, tape.constant(Tensor::scalar(-1.0))));
}

Label predict(const Tensor& scores) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < scores.cols(); ++j)
        if (scores(0, j) > scores(0, best)) best = j;
    return corpus::kAllLabels.at(best);
}

namespace {

// Position-wise mean of the first `m` word embeddings over `texts`. Positions no text covers
// take `fallback`; returns nullopt when no text has any word.
std::optional<Tensor> set_average(const std::vector<const std::string*>& texts, const corpus::Vocab& vocab,
                                  const Tensor& table, const Tensor& fallback, std::size_t m) {
    const std::size_t d = table.cols();
    Tensor sum(m, d);
    std::vector<std::size_t> count(m, 0);
    bool any = false;
    for (const auto* text : texts) {
        const auto words = corpus::split_words(*text);
        for (std::size_t p = 0; p < std::min(m, words.size()); ++p) {
            const auto id = vocab.id(words[p]);
            for (std::size_t k = 0; k < d; ++k) sum(p, k) += table(id, k);
            ++count[p];
            any = true;
        }
    }
    if (!any) return std::nullopt;
    for (std::size_t p = 0; p < m; ++p) {
        for (std::size_t k = 0; k < d; ++k) {
            sum(p, k) = count[p] ? sum(p, k) / static_cast<double>(count[p]) : fallback(0, k);
        }
    }
    return sum;
}

}  // namespace

std::optional<Tensor> init_base_prompt(const corpus::Dataset& train, Label label, const corpus::Vocab& vocab,
                                       const Tensor& embeddings, std::size_t num_prompts) {
    const std::size_t d = embeddings.cols();
    Tensor table_mean(1, d);
    for (std::size_t r = 0; r < embeddings.rows(); ++r)
        for (std::size_t k = 0; k < d; ++k) table_mean(0, k) += embeddings(r, k);
    for (std::size_t k = 0; k < d; ++k) table_mean(0, k) /= static_cast<double>(embeddings.rows());

    Tensor total(num_prompts, d);
    std::size_t claims = 0;
    for (const auto& claim : train.claims) {
        if (claim.label != label || claim.evidence_ids.empty()) continue;
        const auto g = graph::build_graph(claim, *train.corpus);
        std::vector<const std::string*> ev, ctx, ref;
        for (const auto& id : g.evidence_ids) ev.push_back(&train.corpus->evidence(id).text);
        for (const auto& id : g.context_ids) ctx.push_back(&train.corpus->context(id).text);
        for (const auto& id : g.reference_ids) ref.push_back(&train.corpus->reference(id).text);

        Tensor claim_sum(num_prompts, d);
        std::size_t sets = 0;
        for (const auto* texts : {&ev, &ctx, &ref}) {
            if (auto avg = set_average(*texts, vocab, embeddings, table_mean, num_prompts)) {
                for (std::size_t i = 0; i < avg->size(); ++i) claim_sum[i] += (*avg)[i];
                ++sets;
            }
        }
        if (sets == 0) continue;
        for (std::size_t i = 0; i < total.size(); ++i) total[i] += claim_sum[i] / static_cast<double>(sets);
        ++claims;
    }
    if (claims == 0) return std::nullopt;
    for (std::size_t i = 0; i < total.size(); ++i) total[i] /= static_cast<double>(claims);
    return total;
}

}  // namespace correct::prompting
