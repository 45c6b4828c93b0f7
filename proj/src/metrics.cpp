#include "metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "csv.hpp"
#include "train.hpp"

namespace mage {

ConfusionCounts confusion(const std::vector<double>& probabilities, const std::vector<int>& labels,
                          double threshold) {
    if (probabilities.empty()) throw_data("confusion: empty input");
    if (probabilities.size() != labels.size()) throw_shape("confusion: probability/label count mismatch");

    ConfusionCounts c;
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
        const double p = probabilities[i];
        if (!(p >= 0.0 && p <= 1.0)) throw_data("confusion: probability out of [0, 1]: " + std::to_string(p));
        if (labels[i] != 0 && labels[i] != 1)
            throw_data("confusion: non-binary label " + std::to_string(labels[i]));
        const bool predicted = p >= threshold;
        if (predicted && labels[i] == 1)
            ++c.tp;
        else if (predicted && labels[i] == 0)
            ++c.fp;
        else if (!predicted && labels[i] == 0)
            ++c.tn;
        else
            ++c.fn;
    }
    return c;
}

namespace {

Score ratio(double num, double den) {
    if (den == 0.0) return {0.0, false};
    return {num / den, true};
}

}  // namespace

Score f1(const ConfusionCounts& c) {
    return ratio(static_cast<double>(c.tp),
                 static_cast<double>(c.tp) + 0.5 * static_cast<double>(c.fp + c.fn));
}

Score sensitivity(const ConfusionCounts& c) {
    return ratio(static_cast<double>(c.tp), static_cast<double>(c.tp + c.fn));
}

Score specificity(const ConfusionCounts& c) {
    return ratio(static_cast<double>(c.tn), static_cast<double>(c.tn + c.fp));
}

Score accuracy(const ConfusionCounts& c) {
    return ratio(static_cast<double>(c.tp + c.tn), static_cast<double>(c.total()));
}

double auc(const std::vector<double>& probabilities, const std::vector<int>& labels) {
    if (probabilities.size() != labels.size()) throw_shape("auc: probability/label count mismatch");
    const std::size_t n = probabilities.size();
    std::size_t n_pos = 0;
    for (int y : labels) {
        if (y != 0 && y != 1) throw_data("auc: non-binary label " + std::to_string(y));
        n_pos += static_cast<std::size_t>(y);
    }
    const std::size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) throw_data("auc: both classes must be present");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return probabilities[a] < probabilities[b]; });

    // Average ranks over tie groups, then the Mann-Whitney U statistic.
    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && probabilities[order[j + 1]] == probabilities[order[i]]) ++j;
        const double avg_rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t t = i; t <= j; ++t) {
            if (labels[order[t]] == 1) rank_sum_pos += avg_rank;
        }
        i = j + 1;
    }
    const double u = rank_sum_pos - static_cast<double>(n_pos) * (static_cast<double>(n_pos) + 1.0) / 2.0;
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double brier(const std::vector<double>& probabilities, const std::vector<int>& labels) {
    if (probabilities.empty()) throw_data("brier: empty input");
    if (probabilities.size() != labels.size()) throw_shape("brier: probability/label count mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
        const double d = probabilities[i] - static_cast<double>(labels[i]);
        total += d * d;
    }
    return total / static_cast<double>(probabilities.size());
}

MetricsRow compute_metrics_row(const std::string& model, const std::string& subset, int horizon,
                               const std::vector<double>& probabilities, const std::vector<int>& labels,
                               double threshold) {
    MetricsRow row;
    row.model = model;
    row.subset = subset;
    row.horizon = horizon;
    row.n_records = static_cast<long>(labels.size());
    row.n_positive = static_cast<long>(std::count(labels.begin(), labels.end(), 1));

    const ConfusionCounts c = confusion(probabilities, labels, threshold);
    row.f1_score = f1(c);
    row.sensitivity_score = sensitivity(c);
    row.specificity_score = specificity(c);
    row.accuracy_score = accuracy(c);
    row.brier_score = {brier(probabilities, labels), true};
    if (row.n_positive > 0 && row.n_positive < row.n_records)
        row.auc_score = {auc(probabilities, labels), true};
    else
        row.auc_score = {0.0, false};
    return row;
}

std::string serialize_metrics_report(const std::vector<MetricsRow>& rows) {
    std::string out = "model,subset,horizon,metric,value,defined,n_records,n_positive\n";
    for (const auto& row : rows) {
        const std::pair<const char*, const Score*> metrics[] = {
            {"auc", &row.auc_score},           {"f1", &row.f1_score},
            {"sensitivity", &row.sensitivity_score}, {"specificity", &row.specificity_score},
            {"accuracy", &row.accuracy_score}, {"brier", &row.brier_score},
        };
        for (const auto& [name, score] : metrics) {
            out += row.model + "," + row.subset + "," + std::to_string(row.horizon) + "," + name + "," +
                   format_double(score->value) + "," + (score->defined ? "1" : "0") + "," +
                   std::to_string(row.n_records) + "," + std::to_string(row.n_positive) + "\n";
        }
    }
    return out;
}

std::vector<double> LogisticBaseline::predict(const std::vector<std::vector<double>>& features) const {
    std::vector<double> probs;
    probs.reserve(features.size());
    for (const auto& row : features) {
        if (row.size() != weights.rows()) throw_shape("logistic predict: feature width mismatch");
        double z = bias.item();
        for (std::size_t i = 0; i < row.size(); ++i) z += row[i] * weights.at(i, 0);
        probs.push_back(stable_sigmoid(z));
    }
    return probs;
}

LogisticBaseline train_logistic_baseline(const std::vector<std::vector<double>>& features,
                                         const std::vector<int>& labels,
                                         const LogisticBaselineConfig& config) {
    if (features.empty() || features.size() != labels.size())
        throw_data("logistic baseline: empty or mismatched training data");
    const std::size_t n = features.size(), d = features.front().size();

    const ClassWeights weights = class_weights(labels);

    Tensor x = Tensor::zeros(n, d);
    Tensor y = Tensor::zeros(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        if (features[i].size() != d) throw_shape("logistic baseline: ragged feature rows");
        for (std::size_t c = 0; c < d; ++c) x.at(i, c) = features[i][c];
        y.at(i, 0) = static_cast<double>(labels[i]);
    }

    Rng rng(config.seed);
    const double bound = std::sqrt(6.0 / static_cast<double>(d + 1));
    std::uniform_real_distribution<double> unif(-bound, bound);
    LogisticBaseline model;
    model.weights = Tensor::zeros(d, 1, true);
    model.weights.set_name("logistic.weight");
    for (double& v : model.weights.values()) v = unif(rng);
    model.bias = Tensor::zeros(1, 1, true);
    model.bias.set_name("logistic.bias");

    AdamW optimizer({{"logistic.weight", model.weights}, {"logistic.bias", model.bias}},
                    config.weight_decay);
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const double lr = cosine_lr(epoch, config.epochs, config.base_lr, config.min_lr);
        Tape tape;
        Tensor logits = tape.add_row_bias(tape.matmul(x, model.weights), model.bias);
        Tensor loss = tape.weighted_bce_with_logits(logits, y, weights.w0, weights.w1);
        tape.backward(loss);
        optimizer.step(lr);
        optimizer.zero_grad();
    }
    return model;
}

std::string render_metrics_svg(const std::vector<MetricsRow>& rows) {
    const char* metric_names[] = {"auc", "f1", "sensitivity", "specificity", "accuracy", "brier"};
    auto metric_of = [](const MetricsRow& row, const std::string& name) -> const Score& {
        if (name == "auc") return row.auc_score;
        if (name == "f1") return row.f1_score;
        if (name == "sensitivity") return row.sensitivity_score;
        if (name == "specificity") return row.specificity_score;
        if (name == "accuracy") return row.accuracy_score;
        return row.brier_score;
    };
    const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

    std::set<std::pair<std::string, std::string>> series_keys;
    int max_horizon = 0;
    for (const auto& row : rows) {
        series_keys.insert({row.model, row.subset});
        max_horizon = std::max(max_horizon, row.horizon);
    }

    const int panel_w = 260, panel_h = 180, cols = 3, pad = 40;
    const int width = cols * (panel_w + pad) + pad;
    const int height = 2 * (panel_h + pad) + pad + 30;
    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
                      "\" height=\"" + std::to_string(height) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    for (int m = 0; m < 6; ++m) {
        const int px = pad + (m % cols) * (panel_w + pad);
        const int py = pad + (m / cols) * (panel_h + pad);
        svg += "<rect x=\"" + std::to_string(px) + "\" y=\"" + std::to_string(py) + "\" width=\"" +
               std::to_string(panel_w) + "\" height=\"" + std::to_string(panel_h) +
               "\" fill=\"none\" stroke=\"#999\"/>\n";
        svg += "<text x=\"" + std::to_string(px + 4) + "\" y=\"" + std::to_string(py - 6) +
               "\" font-size=\"13\" font-family=\"sans-serif\">" + metric_names[m] + " by week</text>\n";

        int series_idx = 0;
        for (const auto& [model, subset] : series_keys) {
            std::map<int, double> points;
            for (const auto& row : rows) {
                if (row.model != model || row.subset != subset) continue;
                const Score& score = metric_of(row, metric_names[m]);
                if (score.defined) points[row.horizon] = score.value;
            }
            if (!points.empty()) {
                std::string path;
                for (const auto& [h, v] : points) {
                    const double fx = px + 10 + (panel_w - 20) * (max_horizon ? static_cast<double>(h) / max_horizon : 0.0);
                    const double fy = py + panel_h - 10 - (panel_h - 20) * std::clamp(v, 0.0, 1.0);
                    path += (path.empty() ? "M" : " L") + std::to_string(fx) + " " + std::to_string(fy);
                }
                svg += "<path d=\"" + path + "\" fill=\"none\" stroke=\"" + palette[series_idx % 6] +
                       "\" stroke-width=\"1.5\"/>\n";
            }
            ++series_idx;
        }
    }

    // Legend.
    int y = 2 * (panel_h + pad) + pad + 10;
    int series_idx = 0;
    std::string legend;
    for (const auto& [model, subset] : series_keys) {
        legend += "<tspan fill=\"" + std::string(palette[series_idx % 6]) + "\">&#9632; " + model + "/" +
                  subset + "  </tspan>";
        ++series_idx;
    }
    svg += "<text x=\"" + std::to_string(pad) + "\" y=\"" + std::to_string(y) +
           "\" font-size=\"12\" font-family=\"sans-serif\">" + legend + "</text>\n";
    svg += "</svg>\n";
    return svg;
}

}  // namespace mage
