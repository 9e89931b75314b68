#include "correct/trainer/model.hpp"

#include <cmath>

#include "correct/autodiff/checkpoint.hpp"

namespace correct::trainer {

using ad::Tape;
using ad::Tensor;
using ad::Var;

namespace {

void init_mlp_params(ad::ParameterStore& store, std::size_t d, std::size_t n_labels, util::Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(d));
    store.add("mlp.wa", ad::uniform_tensor(d, d, bound, rng));
    store.add("mlp.wb", ad::uniform_tensor(d, d, bound, rng));
    store.add("mlp.b1", Tensor(1, d));
    store.add("mlp.w2", ad::uniform_tensor(d, n_labels, bound, rng));
    store.add("mlp.b2", Tensor(1, n_labels));
}

}  // namespace

Model::Model(ModelConfig config, corpus::Vocab vocab)
    : config_(std::move(config)), vocab_(std::move(vocab)) {
    config_.validate();
    encoder_config_ = config_.encoder_config(vocab_.size());
    labels_ = config_.labels();
    util::Rng rng(config_.seed);
    encoder::init_encoder_params(params_, encoder_config_, rng);
    prompting::init_prompt_params(params_, config_.d, config_.prompt_config(), rng);
    if (config_.head == Head::mlp) init_mlp_params(params_, config_.d, labels_.size(), rng);
}

Model::Model(ModelConfig config, corpus::Vocab vocab, ad::ParameterStore params)
    : config_(std::move(config)), vocab_(std::move(vocab)), params_(std::move(params)) {
    config_.validate();
    encoder_config_ = config_.encoder_config(vocab_.size());
    labels_ = config_.labels();
}

void Model::init_prompts(const corpus::Dataset& train) {
    const auto pc = config_.prompt_config();
    if (pc.num_prompts == 0 || config_.prompt_init != "graph") return;
    const Tensor& table = params_.get("embed.token").value;
    for (auto y : corpus::kAllLabels) {
        if (auto init = prompting::init_base_prompt(train, y, vocab_, table, pc.num_prompts)) {
            params_.get(prompting::base_prompt_name(y)).value = std::move(*init);
        } else {
            warnings_.push_back("no training claims for " + std::string(corpus::label_name(y)) +
                                "; base prompts keep their random initialization");
        }
    }
}

PreparedClaim Model::prepare(const corpus::Claim& claim, const corpus::Corpus& corpus) const {
    PreparedClaim p;
    p.id = claim.id;
    p.label = claim.label;
    p.graph = graph::build_graph(claim, corpus);
    p.tokens = encoder::tokenize_graph(p.graph, corpus, vocab_, config_.max_len);
    p.claim_ids = corpus::tokenize(claim.text, vocab_, config_.max_len);
    return p;
}

std::vector<PreparedClaim> Model::prepare(const corpus::Dataset& dataset) const {
    std::vector<PreparedClaim> out;
    out.reserve(dataset.claims.size());
    for (const auto& c : dataset.claims) out.push_back(prepare(c, *dataset.corpus));
    return out;
}

Forward Model::forward(Tape& tape, const PreparedClaim& claim) {
    auto ev = encoder::bind_encoder(tape, params_, encoder_config_);
    Forward f;
    f.graph = encoder::encode_evidence_graph(tape, ev, encoder_config_, claim.graph, claim.tokens);
    const Var pooled = f.graph.pooled;
    std::vector<Var> hx;

    switch (config_.head) {
        case Head::prompt: {
            const auto pc = config_.prompt_config();
            auto pv = prompting::bind_prompts(tape, params_, pc);
            auto cond = prompting::condition_prompts(tape, pooled, pv, pc);
            for (auto y : labels_) {
                hx.push_back(prompting::encode_claim(tape, ev, encoder_config_, claim.claim_ids,
                                                     cond.prompts[corpus::label_index(y)]));
            }
            break;
        }
        case Head::evidence_as_prompt: {
            std::vector<Var> copies(config_.num_prompts, pooled);
            Var prompts = tape.concat_rows(copies);
            Var h = prompting::encode_claim(tape, ev, encoder_config_, claim.claim_ids, prompts);
            hx.assign(labels_.size(), h);
            break;
        }
        case Head::mlp: {
            Var h = prompting::encode_claim(tape, ev, encoder_config_, claim.claim_ids, std::nullopt);
            auto p = [&](const char* name) { return tape.param(params_.get(name)); };
            Var hidden = tape.leaky_relu(tape.add(
                tape.add(tape.matmul(pooled, p("mlp.wa")), tape.matmul(h, p("mlp.wb"))), p("mlp.b1")));
            f.scores = tape.add(tape.matmul(hidden, p("mlp.w2")), p("mlp.b2"));
            return f;
        }
    }
    f.scores = prompting::label_scores(tape, pooled, hx);
    return f;
}

Var Model::loss(Tape& tape, const Forward& forward, corpus::Label gold) const {
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (labels_[i] == gold) return prompting::contrastive_loss(tape, forward.scores, i);
    }
    throw std::invalid_argument("loss: label " + std::string(corpus::label_name(gold)) + " is not scored by this model");
}

Tensor Model::scores(const PreparedClaim& claim) {
    Tape tape;
    return forward(tape, claim).scores.value();
}

corpus::Label Model::predict_from_scores(const Tensor& scores) const {
    std::size_t best = 0;
    for (std::size_t j = 1; j < scores.cols(); ++j)
        if (scores(0, j) > scores(0, best)) best = j;
    return labels_.at(best);
}

corpus::Label Model::predict(const PreparedClaim& claim) { return predict_from_scores(scores(claim)); }

void Model::save(const std::filesystem::path& path, nlohmann::json extra_meta) const {
    nlohmann::json meta = std::move(extra_meta);
    meta["config"] = config_.to_map();
    meta["config_hash"] = config_.hash();
    // Special tokens are implied by the Vocab constructor.
    const auto& tokens = vocab_.tokens();
    meta["vocab"] = std::vector<std::string>(tokens.begin() + corpus::kCls + 1, tokens.end());
    ad::save_checkpoint(path, params_, meta);
}

Model Model::load(const std::filesystem::path& path) {
    auto ckpt = ad::load_checkpoint(path);
    ModelConfig config;
    for (const auto& [k, v] : ckpt.meta.at("config").items()) config.set(k, v.get<std::string>());
    corpus::Vocab vocab(ckpt.meta.at("vocab").get<std::vector<std::string>>());
    return Model(std::move(config), std::move(vocab), std::move(ckpt.params));
}

}  // namespace correct::trainer
