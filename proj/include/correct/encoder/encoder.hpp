#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "correct/autodiff/tape.hpp"
#include "correct/corpus/vocab.hpp"
#include "correct/graph/graph.hpp"
#include "correct/util/random.hpp"

namespace correct::encoder {

using ad::Tape;
using ad::Var;
using corpus::TokenId;

struct EncoderConfig {
    std::size_t vocab_size = 0;
    std::size_t d = 64;
    std::size_t n_heads = 4;
    std::size_t steps = 3;  // L
    std::size_t d_ff = 0;   // 0 means 2 * d
    std::size_t max_len = 32;
    bool use_evidence_layer = true;
    bool use_context_layer = true;
    bool use_reference_layer = true;

    std::size_t ff_width() const { return d_ff == 0 ? 2 * d : d_ff; }
    /// Throws std::invalid_argument on inconsistent sizes.
    void validate() const;
};

/// Creates every encoder parameter in `store`:
///   embed.token, embed.position,
///   step<l>.{wq,wk,wv,ff.w1,ff.b1,ff.w2,ff.b2,ln1.gain,ln1.bias,ln2.gain,ln2.bias},
///   gnn.{evidence,reference,context}.{w,b}
void init_encoder_params(ad::ParameterStore& store, const EncoderConfig& config, util::Rng& rng);

struct StepWeights {
    Var wq, wk, wv;  // d x d, rows split into heads
    Var ff_w1, ff_b1, ff_w2, ff_b2;
    Var ln1_gain, ln1_bias, ln2_gain, ln2_bias;
};

/// Type-specific graph attention weights: w is d x d, b holds [b_self; b_neighbor] as 2 x d.
struct GnnWeights {
    Var w, b;
};

/// Encoder parameters bound as leaves of one tape.
struct EncoderVars {
    Var token_embed, pos_embed;
    std::vector<StepWeights> steps;
    GnnWeights evidence, reference, context;
};

EncoderVars bind_encoder(Tape& tape, ad::ParameterStore& store, const EncoderConfig& config);

/// Token embeddings plus learned positions 0..T-1. Sequences longer than max_len are rejected.
Var embed_tokens(Tape& tape, const EncoderVars& vars, std::span<const TokenId> ids);

/// Multi-head scaled dot-product attention. Queries come from `queries`, keys and values
/// from `keys_values`. Output has queries.rows() rows. Each head's softmax matrix is appended
/// to `attention` when given.
Var multi_head_attention(Tape& tape, Var queries, Var keys_values, const StepWeights& w, std::size_t n_heads,
                         std::vector<Var>* attention = nullptr);

/// Attention followed by the tanh feed-forward block, each with residual and post layer norm.
/// Symmetric when keys_values == queries; asymmetric when keys_values is the augmented matrix.
Var transformer_step(Tape& tape, Var queries, Var keys_values, const StepWeights& w, std::size_t n_heads,
                     std::vector<Var>* attention = nullptr);

Var transformer_step(Tape& tape, Var tokens, const StepWeights& w, std::size_t n_heads,
                     std::vector<Var>* attention = nullptr);

struct GnnResult {
    Var embedding;                 // 1 x d
    std::optional<Var> attention;  // 1 x k over neighbors; absent for an empty neighbor set
};

/// Projects center and neighbors by w, scores neighbors with leaky_relu(b_self.c + b_nb.n),
/// and returns mean(projected center, attention-weighted neighbor sum). With no neighbors
/// the result is the projected center.
GnnResult gnn_aggregate(Tape& tape, Var center, std::span<const Var> neighbors, const GnnWeights& w);

/// One result per evidence CLS row, neighbors being all other evidence in index order.
std::vector<GnnResult> intra_layer_aggregate(Tape& tape, std::span<const Var> evidence_cls, const GnnWeights& w);

struct CrossLayerResult {
    std::optional<GnnResult> context;
    std::optional<GnnResult> reference;  // absent when the evidence has no references
};

CrossLayerResult cross_layer_aggregate(Tape& tape, Var evidence_cls, std::optional<Var> context_cls,
                                       std::span<const Var> reference_cls, const GnnWeights& context_w,
                                       const GnnWeights& reference_w);

/// [context; reference; evidence; tokens] with absent virtual tokens skipped.
Var augment_virtual_tokens(Tape& tape, Var tokens, std::optional<Var> context, std::optional<Var> reference,
                           std::optional<Var> evidence);

/// Token ids for each document table of a graph, in graph order.
struct GraphTokens {
    std::vector<std::vector<TokenId>> evidence;
    std::vector<std::vector<TokenId>> contexts;
    std::vector<std::vector<TokenId>> references;
};

GraphTokens tokenize_graph(const graph::ThreeLayerGraph& graph, const corpus::Corpus& corpus,
                           const corpus::Vocab& vocab, std::size_t max_len);

/// Graph attention weights of one reasoning step, indexed by evidence.
struct StepTrace {
    std::size_t step = 0;
    std::vector<std::optional<Var>> intra;      // over other evidence
    std::vector<std::optional<Var>> context;    // over the single context
    std::vector<std::optional<Var>> reference;  // over the evidence's references
};

struct GraphEncoding {
    std::vector<Var> evidence_cls;  // final h_e per evidence
    Var pooled;                     // h_E
    std::vector<StepTrace> traces;
    std::vector<Var> self_attention;  // every transformer softmax matrix, for inspection
};

GraphEncoding encode_evidence_graph(Tape& tape, const EncoderVars& vars, const EncoderConfig& config,
                                    const graph::ThreeLayerGraph& graph, const GraphTokens& tokens);

/// Mean of per-evidence embeddings.
Var pool_evidence(Tape& tape, std::span<const Var> evidence);

}  // namespace correct::encoder
