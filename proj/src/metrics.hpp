#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tensor.hpp"

namespace mage {

struct ConfusionCounts {
    long tp = 0;
    long fp = 0;
    long tn = 0;
    long fn = 0;

    long total() const { return tp + fp + tn + fn; }
};

// Predict positive iff p >= threshold.
ConfusionCounts confusion(const std::vector<double>& probabilities, const std::vector<int>& labels,
                          double threshold = 0.5);

// Zero-denominator metrics report value 0 with defined = false instead of
// NaN, so table aggregation stays clean.
struct Score {
    double value = 0.0;
    bool defined = true;
};

Score f1(const ConfusionCounts& c);           // TP / (TP + (FP + FN)/2)
Score sensitivity(const ConfusionCounts& c);  // TP / (TP + FN)
Score specificity(const ConfusionCounts& c);  // TN / (TN + FP)
Score accuracy(const ConfusionCounts& c);     // (TP + TN) / total

// Mann-Whitney AUC via average ranks; ties count one half. Exactly the
// pairwise win fraction over (positive, negative) pairs.
double auc(const std::vector<double>& probabilities, const std::vector<int>& labels);

// Mean squared error of probabilities against binary outcomes.
double brier(const std::vector<double>& probabilities, const std::vector<int>& labels);

struct MetricsRow {
    std::string model;
    std::string subset;
    int horizon = 0;
    long n_records = 0;
    long n_positive = 0;
    Score auc_score;
    Score f1_score;
    Score sensitivity_score;
    Score specificity_score;
    Score accuracy_score;
    Score brier_score;
};

MetricsRow compute_metrics_row(const std::string& model, const std::string& subset, int horizon,
                               const std::vector<double>& probabilities, const std::vector<int>& labels,
                               double threshold = 0.5);

// `model,subset,horizon,metric,value,defined,n_records,n_positive` rows, one
// per metric, mirroring the appendix table layout.
std::string serialize_metrics_report(const std::vector<MetricsRow>& rows);

struct LogisticBaselineConfig {
    int epochs = 400;
    double base_lr = 0.05;
    double min_lr = 1e-4;
    double weight_decay = 0.0;
    std::uint64_t seed = 1;
};

// Single affine map + sigmoid trained with the same weighted BCE / AdamW /
// cosine stack as the graph models, one trap at a time (no neighbor
// information).
struct LogisticBaseline {
    Tensor weights;  // d x 1
    Tensor bias;     // 1 x 1

    std::vector<double> predict(const std::vector<std::vector<double>>& features) const;
};

LogisticBaseline train_logistic_baseline(const std::vector<std::vector<double>>& features,
                                         const std::vector<int>& labels, const LogisticBaselineConfig& config);

// Per-metric-by-horizon line chart, one panel per metric, one series per
// (model, subset) pair present in the rows. Minimal self-contained SVG.
std::string render_metrics_svg(const std::vector<MetricsRow>& rows);

}  // namespace mage
