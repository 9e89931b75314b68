#include "correct/trainer/train.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "correct/retrieval/bm25.hpp"
#include "correct/retrieval/tfidf.hpp"

namespace correct::trainer {

using ad::Tape;
using ad::Tensor;
using ad::Var;

corpus::Dataset apply_data_protocol(const ModelConfig& config, const corpus::Dataset& dataset) {
    corpus::Dataset out = config.exclude_nei ? corpus::exclude_nei(dataset) : dataset;
    if (config.evidence_mode == "retrieved") return retrieval::with_retrieved_evidence(out, config.retrieve_k);
    return retrieval::fill_nei_evidence(out, config.retrieve_k);
}

// ---------------------------------------------------------------------------
// Optimizer

Optimizer::Optimizer(const ModelConfig& config) : kind_(config.optimizer), lr_(config.lr), clip_(config.clip_norm) {}

double Optimizer::step(ad::ParameterStore& params) {
    double sq = 0.0;
    for (const auto& [_, p] : params)
        for (double g : p.grad.data()) sq += g * g;
    const double norm = std::sqrt(sq);
    const double scale = clip_ > 0 && norm > clip_ ? clip_ / norm : 1.0;
    ++t_;
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
    for (auto& [name, p] : params) {
        if (p.grad.empty()) continue;
        if (kind_ == "sgd") {
            for (std::size_t i = 0; i < p.value.size(); ++i) p.value[i] -= lr_ * scale * p.grad[i];
            continue;
        }
        auto& m = m_.try_emplace(name, p.value.rows(), p.value.cols()).first->second;
        auto& v = v_.try_emplace(name, p.value.rows(), p.value.cols()).first->second;
        for (std::size_t i = 0; i < p.value.size(); ++i) {
            const double g = p.grad[i] * scale;
            m[i] = b1 * m[i] + (1 - b1) * g;
            v[i] = b2 * v[i] + (1 - b2) * g * g;
            p.value[i] -= lr_ * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
        }
    }
    return norm;
}

// ---------------------------------------------------------------------------
// Training and evaluation

nlohmann::json EpochLog::to_json() const {
    nlohmann::json j{{"epoch", epoch}, {"train_loss", train_loss}};
    j["valid_macro_f1"] = valid_macro_f1 ? nlohmann::json(*valid_macro_f1) : nlohmann::json(nullptr);
    if (train_micro_f1) j["train_micro_f1"] = *train_micro_f1;
    return j;
}

TrainResult train(const ModelConfig& config, const corpus::Dataset& train_set, const corpus::Dataset* valid_set,
                  const TrainOptions& options) {
    config.validate();
    const auto train_data = apply_data_protocol(config, train_set);
    if (train_data.claims.empty()) throw TrainingError("train: empty training split");

    TrainResult result{Model(config, corpus::build_vocab(train_data, config.min_token_count)), {}, false};
    Model& model = result.model;
    model.init_prompts(train_data);
    const auto train_claims = model.prepare(train_data);
    std::vector<PreparedClaim> valid_claims;
    if (valid_set) valid_claims = model.prepare(apply_data_protocol(config, *valid_set));

    std::ofstream log;
    if (options.log_path) {
        log.open(*options.log_path);
        if (!log) throw TrainingError("train: cannot write " + options.log_path->string());
    }

    Optimizer optimizer(config);
    // Separate stream from parameter init so changing the data order leaves init untouched.
    util::Rng order_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<std::size_t> order(train_claims.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const std::size_t n = order.size();

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        util::shuffle(order, order_rng);
        double total = 0.0;
        std::size_t step = 0;
        for (std::size_t start = 0; start < n; start += config.batch_size, ++step) {
            const std::size_t count = std::min(config.batch_size, n - start);
            model.params().zero_grad();
            for (std::size_t i = start; i < start + count; ++i) {
                const auto& claim = train_claims[order[i]];
                Tape tape;
                auto fwd = model.forward(tape, claim);
                bool finite = true;
                for (double s : fwd.scores.value().data()) finite = finite && std::isfinite(s);
                Var loss;
                if (finite) loss = model.loss(tape, fwd, claim.label);
                const double value = finite ? loss.value().item() : std::numeric_limits<double>::quiet_NaN();
                if (!std::isfinite(value)) {
                    throw TrainingError("train: non-finite loss at epoch " + std::to_string(epoch) + ", step " +
                                        std::to_string(step) + " (claim " + claim.id + ")");
                }
                total += value;
                tape.backward(tape.scalar_divide(loss, static_cast<double>(count)));
            }
            optimizer.step(model.params());
        }

        EpochLog entry;
        entry.epoch = epoch;
        entry.train_loss = total / static_cast<double>(n);
        if (!valid_claims.empty()) entry.valid_macro_f1 = evaluate(model, valid_claims).macro_f1;
        if (config.target_train_f1 > 0) entry.train_micro_f1 = evaluate(model, train_claims).micro_f1;
        result.log.push_back(entry);
        if (log) log << entry.to_json().dump() << "\n" << std::flush;
        if (options.on_epoch) options.on_epoch(entry);
        if (entry.train_micro_f1 && *entry.train_micro_f1 >= config.target_train_f1) {
            result.reached_target = true;
            break;
        }
    }

    if (options.checkpoint_path) {
        model.save(*options.checkpoint_path, {{"epochs_run", result.log.size()}, {"warnings", model.warnings()}});
    }
    return result;
}

EvalReport evaluate(Model& model, const std::vector<PreparedClaim>& claims) {
    std::vector<corpus::Label> gold, predicted;
    for (const auto& c : claims) {
        gold.push_back(c.label);
        predicted.push_back(model.predict(c));
    }
    auto report = compute_metrics(gold, predicted, model.labels());
    report.seed = model.config().seed;
    report.config_hash = model.config().hash();
    return report;
}

EvalReport evaluate(Model& model, const corpus::Dataset& dataset) {
    return evaluate(model, model.prepare(apply_data_protocol(model.config(), dataset)));
}

// ---------------------------------------------------------------------------
// Ablations

const std::vector<std::string>& ablation_variants() {
    static const std::vector<std::string> v{"no-evidence-layer",  "no-context-layer",  "no-reference-layer",
                                            "M-sweep",            "random-prompt-init", "no-prompt-encoder",
                                            "mlp-classifier",     "evidence-as-prompt"};
    return v;
}

ModelConfig apply_variant(ModelConfig config, const std::string& variant) {
    if (variant == "full" || variant == "M-sweep") return config;
    if (variant == "no-evidence-layer") config.use_evidence_layer = false;
    else if (variant == "no-context-layer") config.use_context_layer = false;
    else if (variant == "no-reference-layer") config.use_reference_layer = false;
    else if (variant == "random-prompt-init") config.prompt_init = "random";
    else if (variant == "no-prompt-encoder") config.use_prompt_encoder = false;
    else if (variant == "mlp-classifier") config.head = Head::mlp;
    else if (variant == "evidence-as-prompt") config.head = Head::evidence_as_prompt;
    else throw ConfigError("ablate: unknown variant '" + variant + "'");
    return config;
}

nlohmann::json ExperimentResult::to_json() const {
    nlohmann::json j{{"variant", variant},
                     {"setting", setting},
                     {"macro_f1", {{"mean", macro_f1.mean}, {"std", macro_f1.std}}},
                     {"micro_f1", {{"mean", micro_f1.mean}, {"std", micro_f1.std}}}};
    auto& runs = j["runs"] = nlohmann::json::array();
    for (const auto& r : reports) runs.push_back(r.to_json());
    return j;
}

ExperimentResult run_seeds(const ModelConfig& config, const corpus::Dataset& train_set,
                           const corpus::Dataset* valid_set, const corpus::Dataset& test_set, std::size_t seeds) {
    if (seeds == 0) throw std::invalid_argument("run_seeds: need at least one seed");
    ExperimentResult r;
    std::vector<double> macro, micro;
    for (std::size_t s = 0; s < seeds; ++s) {
        ModelConfig c = config;
        c.seed = config.seed + s;
        auto trained = train(c, train_set, valid_set);
        r.reports.push_back(evaluate(trained.model, test_set));
        macro.push_back(r.reports.back().macro_f1);
        micro.push_back(r.reports.back().micro_f1);
    }
    r.macro_f1 = mean_std(macro);
    r.micro_f1 = mean_std(micro);
    return r;
}

std::vector<ExperimentResult> ablate(const ModelConfig& config, const std::string& variant,
                                     const corpus::Dataset& train_set, const corpus::Dataset* valid_set,
                                     const corpus::Dataset& test_set, std::size_t seeds,
                                     const std::vector<std::size_t>& m_values) {
    std::vector<ExperimentResult> out;
    if (variant == "M-sweep") {
        for (std::size_t m : m_values) {
            ModelConfig c = config;
            c.num_prompts = m;
            c.validate();
            out.push_back(run_seeds(c, train_set, valid_set, test_set, seeds));
            out.back().variant = variant;
            out.back().setting = "num_prompts=" + std::to_string(m);
        }
        return out;
    }
    const ModelConfig c = apply_variant(config, variant);
    out.push_back(run_seeds(c, train_set, valid_set, test_set, seeds));
    out.back().variant = variant;
    return out;
}

// ---------------------------------------------------------------------------
// Case study

nlohmann::json case_report(Model& model, const corpus::Claim& claim, const corpus::Corpus& corpus) {
    const auto prepared = model.prepare(claim, corpus);
    const auto& g = prepared.graph;
    Tape tape;
    auto fwd = model.forward(tape, prepared);
    const Tensor& scores = fwd.scores.value();

    nlohmann::json j;
    j["claim_id"] = claim.id;
    j["gold"] = corpus::label_name(claim.label);
    j["predicted"] = corpus::label_name(model.predict_from_scores(scores));
    auto& sj = j["scores"] = nlohmann::json::object();
    for (std::size_t i = 0; i < model.labels().size(); ++i) sj[std::string(corpus::label_name(model.labels()[i]))] = scores(0, i);

    auto weights = [](const std::optional<Var>& att, const std::vector<std::string>& ids) {
        auto arr = nlohmann::json::array();
        if (!att) return arr;
        for (std::size_t k = 0; k < ids.size(); ++k) arr.push_back({{"id", ids[k]}, {"weight", att->value()(0, k)}});
        return arr;
    };
    auto& steps = j["steps"] = nlohmann::json::array();
    for (const auto& trace : fwd.graph.traces) {
        nlohmann::json step{{"step", trace.step}, {"evidence", nlohmann::json::array()}};
        for (std::size_t e = 0; e < g.num_evidence(); ++e) {
            std::vector<std::string> others, ctx, refs;
            for (std::size_t o : g.neighbors(e)) others.push_back(g.evidence_ids[o]);
            ctx.push_back(g.context_ids[g.evidence_context[e]]);
            for (std::size_t r : g.evidence_references[e]) refs.push_back(g.reference_ids[r]);
            step["evidence"].push_back({{"id", g.evidence_ids[e]},
                                        {"intra", weights(trace.intra[e], others)},
                                        {"context", weights(trace.context[e], ctx)},
                                        {"reference", weights(trace.reference[e], refs)}});
        }
        steps.push_back(std::move(step));
    }
    return j;
}

}  // namespace correct::trainer
