#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "correct/corpus/dataset.hpp"

namespace correct::trainer {

struct ClassMetrics {
    double precision = 0.0;  // all scores on a 0..100 scale
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;
};

struct EvalReport {
    std::vector<corpus::Label> labels;
    double macro_f1 = 0.0;
    double micro_f1 = 0.0;
    std::array<ClassMetrics, 3> per_class{};  // indexed by label_index
    /// confusion[gold][predicted], indexed by label_index
    std::array<std::array<std::size_t, 3>, 3> confusion{};
    std::size_t count = 0;
    std::uint64_t seed = 0;
    std::string config_hash;
    std::vector<std::string> notes;

    nlohmann::json to_json() const;
};

/// Macro/micro F1 over `labels`. A label with no gold instances gets F1 = 0 and a note.
EvalReport compute_metrics(std::span<const corpus::Label> gold, std::span<const corpus::Label> predicted,
                           std::span<const corpus::Label> labels);

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;  // population standard deviation
};

MeanStd mean_std(std::span<const double> values);

}  // namespace correct::trainer
