#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>

#include "correct/corpus/dataset.hpp"
#include "correct/encoder/encoder.hpp"

namespace correct::prompting {

using ad::Tape;
using ad::Tensor;
using ad::Var;
using corpus::Label;

struct PromptConfig {
    std::size_t num_prompts = 8;  // M
    double tau = 100.0;
    bool use_conditioner = true;
};

/// "prompt.base.<LABEL>" (M x d) for each label, plus prompt.alpha.{w,b} and prompt.beta.{w,b}.
/// Conditioner biases start at zero. Nothing is created for the base prompts when M == 0.
void init_prompt_params(ad::ParameterStore& store, std::size_t d, const PromptConfig& config, util::Rng& rng);

std::string base_prompt_name(Label label);

struct PromptVars {
    std::array<std::optional<Var>, 3> base;  // indexed by label_index
    Var alpha_w, alpha_b, beta_w, beta_b;
};

PromptVars bind_prompts(Tape& tape, ad::ParameterStore& store, const PromptConfig& config);

struct ConditionedPrompts {
    std::array<std::optional<Var>, 3> prompts;  // absent when M == 0
    std::optional<Var> alpha, beta;             // absent when the conditioner is off
};

/// alpha = tanh((h_E W_a + b_a) / tau), beta = tanh((h_E W_b + b_b) / tau),
/// pi = base * (alpha + 1) + beta, shared across labels.
ConditionedPrompts condition_prompts(Tape& tape, Var pooled, const PromptVars& vars, const PromptConfig& config);

/// Encodes [CLS; prompts; claim words]. Claim words get positions 1.. and are truncated so the
/// sequence fits max_len; prompts carry no positions and are never truncated. Returns the final CLS.
Var encode_claim(Tape& tape, const encoder::EncoderVars& vars, const encoder::EncoderConfig& config,
                 std::span<const corpus::TokenId> claim_ids, std::optional<Var> prompts);

/// 1 x |labels| row of h_{x,y} . h_E.
Var label_scores(Tape& tape, Var pooled, std::span<const Var> claim_encodings);

/// -log softmax(scores)[gold], computed from max-shifted scores.
Var contrastive_loss(Tape& tape, Var scores, std::size_t gold);

/// Argmax with ties going to the earlier label (SUPPORT < REFUTE < NEI).
Label predict(const Tensor& scores);

/// Base prompt initialization from graph word embeddings of every claim with `label`.
/// Returns nullopt when no claim of that label contributes.
std::optional<Tensor> init_base_prompt(const corpus::Dataset& train, Label label, const corpus::Vocab& vocab,
                                       const Tensor& embeddings, std::size_t num_prompts);

}  // namespace correct::prompting
