#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "correct/encoder/encoder.hpp"
#include "correct/prompting/prompting.hpp"

namespace correct::trainer {

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

enum class Head { prompt, mlp, evidence_as_prompt };

/// Flat model/training configuration. Every field has a key (see keys()) usable in config
/// files as `key = value` and on the command line as `--key value`.
struct ModelConfig {
    // Architecture.
    std::size_t steps = 3;
    std::size_t d = 64;
    std::size_t n_heads = 4;
    std::size_t d_ff = 0;  // 0 means 2 * d
    std::size_t max_len = 32;
    std::size_t num_prompts = 8;
    double tau = 100.0;
    Head head = Head::prompt;
    bool use_evidence_layer = true;
    bool use_context_layer = true;
    bool use_reference_layer = true;
    bool use_prompt_encoder = true;
    std::string prompt_init = "graph";  // graph | random

    // Optimization.
    std::string optimizer = "adam";  // adam | sgd
    double lr = 1e-3;
    std::size_t epochs = 200;
    std::size_t batch_size = 8;
    double clip_norm = 1.0;
    /// Stop once train micro-F1 reaches this value (0..100); 0 disables early stopping.
    double target_train_f1 = 0.0;
    std::uint64_t seed = 13;

    // Data.
    std::string evidence_mode = "gold";  // gold | retrieved
    std::size_t retrieve_k = 3;
    bool exclude_nei = false;
    std::size_t max_sentences = 20;
    /// Tokens seen fewer times than this in the training data map to [UNK].
    std::size_t min_token_count = 1;

    static ModelConfig desk();
    /// Full-size transformer settings (12 steps, width 768); far too slow for this engine.
    static ModelConfig full_scale();

    void validate() const;

    static const std::vector<std::string>& keys();
    std::string get(const std::string& key) const;
    /// Throws ConfigError for unknown keys or malformed values.
    void set(const std::string& key, const std::string& value);
    std::map<std::string, std::string> to_map() const;

    /// Stable hex digest of every key except seed, so repeated seeds share a hash.
    std::string hash() const;

    encoder::EncoderConfig encoder_config(std::size_t vocab_size) const;
    prompting::PromptConfig prompt_config() const;
    /// Label set the model scores: all three, or SUPPORT/REFUTE when NEI is excluded.
    std::vector<corpus::Label> labels() const;
};

std::string head_name(Head head);
Head parse_head(const std::string& text);

/// Reads `key = value` lines; '#' starts a comment. Errors carry the line number.
ModelConfig load_config(const std::filesystem::path& path, ModelConfig base = ModelConfig::desk());
void save_config(const std::filesystem::path& path, const ModelConfig& config);

}  // namespace correct::trainer
