#include "correct/trainer/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace correct::trainer {

using corpus::label_index;
using corpus::label_name;

EvalReport compute_metrics(std::span<const corpus::Label> gold, std::span<const corpus::Label> predicted,
                           std::span<const corpus::Label> labels) {
    if (gold.size() != predicted.size()) throw std::invalid_argument("compute_metrics: size mismatch");
    if (gold.empty()) throw std::invalid_argument("compute_metrics: empty split");
    if (labels.empty()) throw std::invalid_argument("compute_metrics: empty label set");
    EvalReport r;
    r.labels.assign(labels.begin(), labels.end());
    r.count = gold.size();
    for (std::size_t i = 0; i < gold.size(); ++i) ++r.confusion[label_index(gold[i])][label_index(predicted[i])];

    std::size_t tp_sum = 0, fp_sum = 0, fn_sum = 0;
    double f1_sum = 0.0;
    for (auto y : labels) {
        const std::size_t k = label_index(y);
        std::size_t tp = r.confusion[k][k], fp = 0, fn = 0;
        for (std::size_t j = 0; j < 3; ++j) {
            if (j == k) continue;
            fp += r.confusion[j][k];
            fn += r.confusion[k][j];
        }
        auto& m = r.per_class[k];
        m.support = tp + fn;
        m.precision = tp + fp ? 100.0 * static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
        m.recall = tp + fn ? 100.0 * static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
        m.f1 = m.precision + m.recall > 0 ? 2 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
        if (m.support == 0) {
            m.f1 = 0.0;
            r.notes.push_back(std::string(label_name(y)) + " absent from split; F1 set to 0");
        }
        f1_sum += m.f1;
        tp_sum += tp;
        fp_sum += fp;
        fn_sum += fn;
    }
    r.macro_f1 = f1_sum / static_cast<double>(labels.size());
    const double p = tp_sum + fp_sum ? static_cast<double>(tp_sum) / static_cast<double>(tp_sum + fp_sum) : 0.0;
    const double rc = tp_sum + fn_sum ? static_cast<double>(tp_sum) / static_cast<double>(tp_sum + fn_sum) : 0.0;
    r.micro_f1 = p + rc > 0 ? 100.0 * 2 * p * rc / (p + rc) : 0.0;
    return r;
}

nlohmann::json EvalReport::to_json() const {
    nlohmann::json j;
    j["count"] = count;
    j["macro_f1"] = macro_f1;
    j["micro_f1"] = micro_f1;
    j["seed"] = seed;
    j["config_hash"] = config_hash;
    auto& pc = j["per_class"] = nlohmann::json::object();
    auto& lbls = j["labels"] = nlohmann::json::array();
    for (auto y : labels) {
        const auto& m = per_class[label_index(y)];
        lbls.push_back(label_name(y));
        pc[std::string(label_name(y))] = {
            {"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"support", m.support}};
    }
    auto& conf = j["confusion"] = nlohmann::json::object();
    for (auto g : corpus::kAllLabels) {
        auto& row = conf[std::string(label_name(g))] = nlohmann::json::object();
        for (auto p : corpus::kAllLabels) row[std::string(label_name(p))] = confusion[label_index(g)][label_index(p)];
    }
    j["notes"] = notes;
    return j;
}

MeanStd mean_std(std::span<const double> values) {
    if (values.empty()) return {};
    double mean = 0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0;
    for (double v : values) var += (v - mean) * (v - mean);
    return {mean, std::sqrt(var / static_cast<double>(values.size()))};
}

}  // namespace correct::trainer
