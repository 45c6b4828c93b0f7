#include "features.hpp"

#include <algorithm>
#include <cmath>

#include "csv.hpp"

namespace mage {

Bin3 bin_canopy(double pct) {
    if (!(pct >= 0.0 && pct <= 100.0)) throw_data("canopy_pct out of [0, 100]: " + std::to_string(pct));
    if (pct < 20.0) return Bin3::Low;
    if (pct <= 50.0) return Bin3::Medium;
    return Bin3::High;
}

Bin3 bin_imperviousness(double pct) {
    if (!(pct >= 0.0 && pct <= 100.0)) throw_data("impervious_pct out of [0, 100]: " + std::to_string(pct));
    if (pct < 33.0) return Bin3::Low;
    if (pct <= 67.0) return Bin3::Medium;
    return Bin3::High;
}

std::array<double, 3> one_hot(Bin3 bin) {
    std::array<double, 3> out{0.0, 0.0, 0.0};
    out[static_cast<std::size_t>(bin)] = 1.0;
    return out;
}

namespace {

std::vector<double> threshold_indicators(const std::vector<double>& fractions, double threshold,
                                         const char* what) {
    std::vector<double> out;
    out.reserve(fractions.size());
    for (double f : fractions) {
        if (!(f >= 0.0 && f <= 1.0)) throw_data(std::string(what) + " fraction out of [0, 1]: " + std::to_string(f));
        out.push_back(f > threshold ? 1.0 : 0.0);
    }
    return out;
}

}  // namespace

std::vector<double> landcover_indicators(const std::vector<double>& fractions) {
    return threshold_indicators(fractions, 0.15, "land-cover");
}

std::vector<double> road_indicators(const std::vector<double>& fractions) {
    return threshold_indicators(fractions, 0.10, "road");
}

std::array<double, 5> temperature_quantiles(const std::vector<double>& daily_means_f) {
    if (daily_means_f.empty()) throw_data("temperature_quantiles: empty temperature window");
    std::vector<double> sorted(daily_means_f);
    std::sort(sorted.begin(), sorted.end());
    auto at = [&](double q) {
        const double h = q * static_cast<double>(sorted.size() - 1);
        const std::size_t lo = static_cast<std::size_t>(h);
        if (lo + 1 >= sorted.size()) return sorted.back();
        return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
    };
    return {at(0.10), at(0.25), at(0.50), at(0.75), at(0.90)};
}

DegreeDays degree_day_counts(const std::vector<double>& daily_means_f) {
    if (daily_means_f.empty()) throw_data("degree_day_counts: empty temperature window");
    DegreeDays dd{0, 0};
    for (double t : daily_means_f) {
        if (t > 65.0) ++dd.heating_days;
        if (t < 65.0) ++dd.cooling_days;
    }
    return dd;
}

double Scaler::apply(std::size_t i, double v) const {
    const double s = stds[i];
    return s > 0.0 ? (v - means[i]) / s : v - means[i];
}

std::string serialize_scaler(const Scaler& scaler) {
    std::string out = "format_version=1\n";
    out += "column,mean,std\n";
    for (std::size_t i = 0; i < scaler.columns.size(); ++i) {
        out += scaler.columns[i] + "," + format_double(scaler.means[i]) + "," + format_double(scaler.stds[i]) +
               "\n";
    }
    return out;
}

Scaler parse_scaler(const std::string& text, const std::string& origin) {
    const auto nl = text.find('\n');
    if (nl == std::string::npos || text.substr(0, nl) != "format_version=1")
        throw_data(origin + ": expected scaler format_version=1 header");
    CsvTable table = parse_csv(text.substr(nl + 1), origin);
    if (table.header != std::vector<std::string>{"column", "mean", "std"})
        throw_data(origin + ": bad scaler header");
    Scaler scaler;
    for (const auto& row : table.rows) {
        scaler.columns.push_back(row[0]);
        scaler.means.push_back(parse_double(row[1], origin));
        scaler.stds.push_back(parse_double(row[2], origin));
    }
    return scaler;
}

std::vector<std::string> feature_column_names(const RawTable& raw) {
    std::vector<std::string> names = {"canopy_low",  "canopy_medium", "canopy_high",
                                      "imperv_low",  "imperv_medium", "imperv_high"};
    for (const auto& cls : raw.landcover_classes) names.push_back("lc_" + cls);
    for (const auto& cls : raw.road_classes) names.push_back("road_" + cls);
    for (const char* q : {"t_q10", "t_q25", "t_q50", "t_q75", "t_q90"}) names.push_back(q);
    names.push_back("heating_days");
    names.push_back("cooling_days");
    names.push_back("prcp_total");
    return names;
}

namespace {

constexpr std::size_t kContinuousTail = 8;  // 5 quantiles + 2 degree-day counts + prcp_total

std::vector<double> raw_feature_vector(const RawRow& row) {
    std::vector<double> v;
    const auto canopy = one_hot(bin_canopy(row.canopy_pct));
    const auto imperv = one_hot(bin_imperviousness(row.impervious_pct));
    v.insert(v.end(), canopy.begin(), canopy.end());
    v.insert(v.end(), imperv.begin(), imperv.end());
    for (double ind : landcover_indicators(row.landcover_fractions)) v.push_back(ind);
    for (double ind : road_indicators(row.road_fractions)) v.push_back(ind);
    for (double q : temperature_quantiles(row.daily_mean_temps_f)) v.push_back(q);
    const DegreeDays dd = degree_day_counts(row.daily_mean_temps_f);
    v.push_back(static_cast<double>(dd.heating_days));
    v.push_back(static_cast<double>(dd.cooling_days));
    double prcp = 0.0;
    for (double p : row.daily_precip_mm) {
        if (!(p >= 0.0)) throw_data("negative precipitation for trap " + row.trap_id);
        prcp += p;
    }
    v.push_back(prcp);
    return v;
}

FeatureTable assemble_unscaled(const RawTable& raw) {
    FeatureTable table;
    table.column_names = feature_column_names(raw);
    table.rows.reserve(raw.rows.size());
    for (const auto& row : raw.rows) {
        FeatureRow out;
        out.trap_id = row.trap_id;
        out.position = row.position;
        out.week = row.week;
        out.label = row.label;
        try {
            out.features = raw_feature_vector(row);
        } catch (const Error& e) {
            throw Error(e.kind(), std::string(e.what()) + " (trap " + row.trap_id + ", week " +
                                      std::to_string(row.week) + ")");
        }
        table.rows.push_back(std::move(out));
    }
    return table;
}

void standardize(FeatureTable& table, const Scaler& scaler) {
    const std::size_t total = table.column_names.size();
    const std::size_t first = total - kContinuousTail;
    for (auto& row : table.rows)
        for (std::size_t c = 0; c < kContinuousTail; ++c)
            row.features[first + c] = scaler.apply(c, row.features[first + c]);
}

}  // namespace

AssembledFeatures assemble_features(const RawTable& raw, int train_end_week) {
    FeatureTable table = assemble_unscaled(raw);

    const std::size_t total = table.column_names.size();
    const std::size_t first = total - kContinuousTail;
    Scaler scaler;
    scaler.columns.assign(table.column_names.begin() + static_cast<std::ptrdiff_t>(first),
                          table.column_names.end());
    scaler.means.assign(kContinuousTail, 0.0);
    scaler.stds.assign(kContinuousTail, 0.0);

    std::size_t n_train = 0;
    for (const auto& row : table.rows) {
        if (row.week > train_end_week) continue;
        ++n_train;
        for (std::size_t c = 0; c < kContinuousTail; ++c) scaler.means[c] += row.features[first + c];
    }
    if (n_train == 0 && !table.rows.empty())
        throw_data("assemble_features: no rows at or before train_end_week " + std::to_string(train_end_week));
    if (n_train > 0) {
        for (double& m : scaler.means) m /= static_cast<double>(n_train);
        for (const auto& row : table.rows) {
            if (row.week > train_end_week) continue;
            for (std::size_t c = 0; c < kContinuousTail; ++c) {
                const double d = row.features[first + c] - scaler.means[c];
                scaler.stds[c] += d * d;
            }
        }
        for (double& s : scaler.stds) s = std::sqrt(s / static_cast<double>(n_train));
    }

    standardize(table, scaler);
    return {std::move(table), std::move(scaler)};
}

FeatureTable assemble_features_with_scaler(const RawTable& raw, const Scaler& scaler) {
    FeatureTable table = assemble_unscaled(raw);
    const std::size_t total = table.column_names.size();
    if (scaler.columns.size() != kContinuousTail ||
        !std::equal(scaler.columns.begin(), scaler.columns.end(),
                    table.column_names.begin() + static_cast<std::ptrdiff_t>(total - kContinuousTail)))
        throw_data("scaler columns do not match this table's continuous columns");
    standardize(table, scaler);
    return table;
}

}  // namespace mage
