#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "correct/corpus/vocab.hpp"
#include "correct/encoder/encoder.hpp"
#include "correct/prompting/prompting.hpp"
#include "correct/trainer/config.hpp"

namespace correct::trainer {

/// A claim resolved against the corpus and tokenized once, ready for repeated forward passes.
struct PreparedClaim {
    std::string id;
    corpus::Label label = corpus::Label::support;
    graph::ThreeLayerGraph graph;
    encoder::GraphTokens tokens;
    std::vector<corpus::TokenId> claim_ids;
};

struct Forward {
    ad::Var scores;  // 1 x |labels|
    encoder::GraphEncoding graph;
};

class Model {
  public:
    /// Fresh parameters drawn from config.seed. Base prompts start random; see init_prompts.
    Model(ModelConfig config, corpus::Vocab vocab);
    /// Existing parameters (e.g. from a checkpoint).
    Model(ModelConfig config, corpus::Vocab vocab, ad::ParameterStore params);

    const ModelConfig& config() const { return config_; }
    const corpus::Vocab& vocab() const { return vocab_; }
    ad::ParameterStore& params() { return params_; }
    const ad::ParameterStore& params() const { return params_; }
    const encoder::EncoderConfig& encoder_config() const { return encoder_config_; }
    const std::vector<corpus::Label>& labels() const { return labels_; }

    /// Replaces random base prompts with graph word-embedding averages over `train` when
    /// prompt_init == "graph". Labels without usable claims keep the random init and add a warning.
    void init_prompts(const corpus::Dataset& train);
    const std::vector<std::string>& warnings() const { return warnings_; }

    PreparedClaim prepare(const corpus::Claim& claim, const corpus::Corpus& corpus) const;
    std::vector<PreparedClaim> prepare(const corpus::Dataset& dataset) const;

    Forward forward(ad::Tape& tape, const PreparedClaim& claim);
    /// Cross-entropy of the gold label against the label scores.
    ad::Var loss(ad::Tape& tape, const Forward& forward, corpus::Label gold) const;

    ad::Tensor scores(const PreparedClaim& claim);
    corpus::Label predict(const PreparedClaim& claim);
    corpus::Label predict_from_scores(const ad::Tensor& scores) const;

    void save(const std::filesystem::path& path, nlohmann::json extra_meta = nlohmann::json::object()) const;
    static Model load(const std::filesystem::path& path);

  private:
    ModelConfig config_;
    corpus::Vocab vocab_;
    encoder::EncoderConfig encoder_config_;
    std::vector<corpus::Label> labels_;
    ad::ParameterStore params_;
    std::vector<std::string> warnings_;
};

}  // namespace correct::trainer
