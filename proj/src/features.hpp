#pragma once

#include <array>
#include <string>
#include <vector>

#include "dataset.hpp"

namespace mage {

enum class Bin3 { Low, Medium, High };

// Canopy: low < 20, medium in [20, 50], high > 50 (percent cover).
Bin3 bin_canopy(double pct);
// Imperviousness: low < 33, medium in [33, 67], high > 67.
Bin3 bin_imperviousness(double pct);

std::array<double, 3> one_hot(Bin3 bin);

// 1 iff the class covers strictly more than 15% of the trap's surroundings.
std::vector<double> landcover_indicators(const std::vector<double>& fractions);
// 1 iff the road class covers strictly more than 10%.
std::vector<double> road_indicators(const std::vector<double>& fractions);

// 10th/25th/50th/75th/90th percentile of the daily means, linear interpolation.
std::array<double, 5> temperature_quantiles(const std::vector<double>& daily_means_f);

struct DegreeDays {
    int heating_days;  // days with mean strictly above 65 F
    int cooling_days;  // days with mean strictly below 65 F
};

// Note the dataset convention runs opposite to HVAC usage: "heating" counts
// warm days. Days at exactly 65 F count as neither.
DegreeDays degree_day_counts(const std::vector<double>& daily_means_f);

// Zero-mean/unit-variance parameters for the continuous feature columns,
// fitted on training rows only.
struct Scaler {
    std::vector<std::string> columns;
    std::vector<double> means;
    std::vector<double> stds;  // population std; constant columns store 0

    double apply(std::size_t i, double v) const;
};

std::string serialize_scaler(const Scaler& scaler);  // format_version=1 text
Scaler parse_scaler(const std::string& text, const std::string& origin);

struct AssembledFeatures {
    FeatureTable table;
    Scaler scaler;
};

// Full pipeline of the data-processing scheme: one-hot bins, threshold
// indicators, temperature quantiles, degree days, precipitation total;
// continuous columns standardized with statistics from rows at
// week <= train_end_week.
AssembledFeatures assemble_features(const RawTable& raw, int train_end_week);

// Same transform, reusing previously fitted scaler parameters.
FeatureTable assemble_features_with_scaler(const RawTable& raw, const Scaler& scaler);

std::vector<std::string> feature_column_names(const RawTable& raw);

}  // namespace mage
