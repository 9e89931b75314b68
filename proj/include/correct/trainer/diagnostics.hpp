#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "correct/autodiff/gradcheck.hpp"
#include "correct/trainer/model.hpp"

namespace correct::trainer {

struct ToyGradCheck {
    std::size_t evidence = 0;
    std::size_t references = 0;
    corpus::Label gold = corpus::Label::support;
    ad::GradCheckResult result;
};

/// Random toy graphs with 1-3 evidence sentences and 0-2 references in total; graph i uses
/// 1 + i % 3 evidence and (i / 3) % 3 references so every combination appears within nine graphs.
corpus::Dataset toy_graph_dataset(std::uint64_t seed, std::size_t graphs);

/// Small model used for end-to-end gradient checks: L=2, d=8, 2 heads, M=2, tau=1.
ModelConfig toy_model_config(std::uint64_t seed);

/// Central-difference check of the full loss (nested encoder, conditioner, claim encoder)
/// with respect to every parameter, one fresh model per graph.
std::vector<ToyGradCheck> toy_gradient_checks(std::uint64_t seed, std::size_t graphs, double eps = 1e-5);

}  // namespace correct::trainer
