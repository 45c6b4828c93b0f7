#include "calibration.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "csv.hpp"
#include "error.hpp"

namespace mage {

double IsotonicModel::evaluate(double score) const {
    if (breakpoints.empty()) throw_data("isotonic evaluate: unfitted model");
    if (score <= breakpoints.front()) return fitted_values.front();
    if (score >= breakpoints.back()) return fitted_values.back();
    const auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), score);
    const std::size_t hi = static_cast<std::size_t>(it - breakpoints.begin());
    const std::size_t lo = hi - 1;
    const double t = (score - breakpoints[lo]) / (breakpoints[hi] - breakpoints[lo]);
    return fitted_values[lo] + t * (fitted_values[hi] - fitted_values[lo]);
}

IsotonicModel fit_isotonic(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size()) throw_shape("fit_isotonic: score/label count mismatch");
    if (scores.size() < 2) throw_data("fit_isotonic: need at least 2 records");
    bool has0 = false, has1 = false;
    for (int y : labels) {
        if (y != 0 && y != 1) throw_data("fit_isotonic: non-binary label " + std::to_string(y));
        (y == 1 ? has1 : has0) = true;
    }
    if (!has0 || !has1) throw_data("fit_isotonic: calibration data holds a single class");

    // Pool exact score ties into weighted points, ordered by score.
    std::map<double, std::pair<double, double>> pooled;  // score -> (label_sum, count)
    for (std::size_t i = 0; i < scores.size(); ++i) {
        auto& [label_sum, count] = pooled[scores[i]];
        label_sum += static_cast<double>(labels[i]);
        count += 1.0;
    }

    struct Block {
        double label_sum;
        double count;
        double value;
        std::size_t points;  // pooled score points covered
    };
    std::vector<Block> stack;
    for (const auto& [score, agg] : pooled) {
        (void)score;
        stack.push_back({agg.first, agg.second, agg.first / agg.second, 1});
        // Pool adjacent violators: merge while monotonicity is broken.
        while (stack.size() >= 2 && stack[stack.size() - 2].value > stack.back().value) {
            Block top = stack.back();
            stack.pop_back();
            stack.back().label_sum += top.label_sum;
            stack.back().count += top.count;
            stack.back().value = stack.back().label_sum / stack.back().count;
            stack.back().points += top.points;
        }
    }

    IsotonicModel model;
    model.breakpoints.reserve(pooled.size());
    for (const auto& [score, agg] : pooled) {
        (void)agg;
        model.breakpoints.push_back(score);
    }
    model.fitted_values.reserve(pooled.size());
    for (const auto& block : stack)
        model.fitted_values.insert(model.fitted_values.end(), block.points, block.value);
    return model;
}

double calibrate(double raw, const CalibratedPredictor& predictor) {
    if (!(raw >= 0.0 && raw <= 1.0)) throw_data("calibrate: probability out of [0, 1]: " + std::to_string(raw));
    if (!(predictor.lambda >= 0.0 && predictor.lambda <= 1.0))
        throw_param("calibrate: lambda must be in [0, 1]");
    const double blended =
        predictor.lambda * raw + (1.0 - predictor.lambda) * predictor.isotonic.evaluate(raw);
    return std::clamp(blended, 0.0, 1.0);
}

double node_entropy(const std::vector<double>& probabilities) {
    if (probabilities.empty()) throw_data("node_entropy: no probabilities");
    auto plogp = [](double p) { return p > 0.0 ? p * std::log(p) : 0.0; };
    double total = 0.0;
    for (double p : probabilities) {
        if (!(p >= 0.0 && p <= 1.0))
            throw_data("node_entropy: probability out of [0, 1]: " + std::to_string(p));
        total += -(plogp(p) + plogp(1.0 - p));
    }
    return total / static_cast<double>(probabilities.size());
}

std::vector<EntropyGroupRow> entropy_by_group(
    const EntropyGroups& groups,
    const std::vector<std::pair<std::string, std::vector<double>>>& entropies_by_subset) {
    for (const auto& row : groups.node_indicators) {
        if (row.size() != groups.group_names.size())
            throw_shape("entropy_by_group: indicator width does not match group names");
    }

    std::vector<EntropyGroupRow> rows;
    for (std::size_t g = 0; g < groups.group_names.size(); ++g) {
        for (const auto& [subset, entropies] : entropies_by_subset) {
            if (entropies.size() != groups.node_indicators.size())
                throw_shape("entropy_by_group: entropy count does not match node count");
            double total = 0.0;
            std::size_t members = 0;
            for (std::size_t v = 0; v < entropies.size(); ++v) {
                if (groups.node_indicators[v][g] == 1.0) {
                    total += entropies[v];
                    ++members;
                }
            }
            if (members == 0) continue;  // empty groups are absent, never zero
            rows.push_back({groups.group_names[g], subset, total / static_cast<double>(members), members});
        }
    }
    return rows;
}

std::string serialize_entropy_report(const std::vector<EntropyGroupRow>& rows) {
    std::string out = "group,subset,mean_entropy,node_count\n";
    for (const auto& row : rows) {
        out += row.group + "," + row.subset + "," + format_double(row.mean_entropy) + "," +
               std::to_string(row.node_count) + "\n";
    }
    return out;
}

}  // namespace mage
