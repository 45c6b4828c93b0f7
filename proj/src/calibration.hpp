#pragma once

#include <string>
#include <vector>

namespace mage {

// Least-squares monotone fit of binary outcomes against scores (pool
// adjacent violators). Evaluation linearly interpolates between breakpoints
// and clamps outside their range.
struct IsotonicModel {
    std::vector<double> breakpoints;    // strictly increasing score values
    std::vector<double> fitted_values;  // nondecreasing, in [0, 1]

    double evaluate(double score) const;
};

// Ties in score are pooled before fitting. Requires >= 2 records with both
// classes present.
IsotonicModel fit_isotonic(const std::vector<double>& scores, const std::vector<int>& labels);

struct CalibratedPredictor {
    double lambda = 0.5;  // blend weight on the raw ensemble mean
    IsotonicModel isotonic;
};

// lambda * raw + (1 - lambda) * isotonic(raw), clamped to [0, 1].
double calibrate(double raw, const CalibratedPredictor& predictor);

// Mean binary entropy (natural log) of the given probabilities, one per
// forecast made at this node; 0 ln 0 reads as 0.
double node_entropy(const std::vector<double>& probabilities);

struct EntropyGroups {
    std::vector<std::string> group_names;
    // node_indicators[node][group] in {0, 1}; a node may sit in several
    // groups at once (multiple land-cover classes can exceed threshold).
    std::vector<std::vector<double>> node_indicators;
};

struct EntropyGroupRow {
    std::string group;
    std::string subset;  // which training subset produced the predictions
    double mean_entropy = 0.0;
    std::size_t node_count = 0;
};

// Per-group mean node entropy for each training-subset column. Groups with
// no member nodes produce no row at all.
std::vector<EntropyGroupRow> entropy_by_group(
    const EntropyGroups& groups,
    const std::vector<std::pair<std::string, std::vector<double>>>& entropies_by_subset);

// `group,subset,mean_entropy,node_count` rows.
std::string serialize_entropy_report(const std::vector<EntropyGroupRow>& rows);

}  // namespace mage
