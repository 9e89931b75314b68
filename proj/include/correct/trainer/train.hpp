#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "correct/trainer/metrics.hpp"
#include "correct/trainer/model.hpp"

namespace correct::trainer {

class TrainingError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Applies the data settings of `config`: retrieved evidence (BM25 top-k), tf-idf evidence for
/// NEI claims that have none, and NEI exclusion.
corpus::Dataset apply_data_protocol(const ModelConfig& config, const corpus::Dataset& dataset);

/// Adam or plain SGD with global-norm gradient clipping.
class Optimizer {
  public:
    explicit Optimizer(const ModelConfig& config);
    /// Clips, updates every parameter and returns the pre-clip gradient norm.
    double step(ad::ParameterStore& params);

  private:
    std::string kind_;
    double lr_, clip_;
    std::size_t t_ = 0;
    std::map<std::string, ad::Tensor> m_, v_;
};

struct EpochLog {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    std::optional<double> valid_macro_f1;
    std::optional<double> train_micro_f1;

    nlohmann::json to_json() const;
};

struct TrainOptions {
    std::optional<std::filesystem::path> log_path;         // JSONL, one line per epoch
    std::optional<std::filesystem::path> checkpoint_path;  // written after training
    std::function<void(const EpochLog&)> on_epoch;
};

struct TrainResult {
    Model model;
    std::vector<EpochLog> log;
    bool reached_target = false;
};

/// Seeded training; identical (config, data) give identical logs and parameters.
/// Throws TrainingError naming the epoch and step when a loss turns non-finite.
TrainResult train(const ModelConfig& config, const corpus::Dataset& train_set, const corpus::Dataset* valid_set,
                  const TrainOptions& options = {});

EvalReport evaluate(Model& model, const std::vector<PreparedClaim>& claims);
EvalReport evaluate(Model& model, const corpus::Dataset& dataset);

const std::vector<std::string>& ablation_variants();

/// Config for a named variant ("full" is the unchanged model). M-sweep is handled by ablate().
ModelConfig apply_variant(ModelConfig config, const std::string& variant);

struct ExperimentResult {
    std::string variant;
    std::string setting;
    std::vector<EvalReport> reports;  // one per seed
    MeanStd macro_f1;
    MeanStd micro_f1;

    nlohmann::json to_json() const;
};

/// Trains and evaluates `config` on seeds config.seed, config.seed + 1, ...
ExperimentResult run_seeds(const ModelConfig& config, const corpus::Dataset& train_set,
                           const corpus::Dataset* valid_set, const corpus::Dataset& test_set, std::size_t seeds);

/// Runs a variant; M-sweep runs one experiment per value in `m_values`.
std::vector<ExperimentResult> ablate(const ModelConfig& config, const std::string& variant,
                                     const corpus::Dataset& train_set, const corpus::Dataset* valid_set,
                                     const corpus::Dataset& test_set, std::size_t seeds,
                                     const std::vector<std::size_t>& m_values = {0, 2, 4, 8});

/// Predicted label, per-label scores and every step's graph attention weights for one claim.
nlohmann::json case_report(Model& model, const corpus::Claim& claim, const corpus::Corpus& corpus);

}  // namespace correct::trainer
