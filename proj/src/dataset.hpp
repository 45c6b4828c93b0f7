#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "geo.hpp"

namespace mage {

// One (trap, week) observation from the raw covariate table.
struct RawRow {
    std::string trap_id;
    GeoPoint position;
    int week = 0;
    std::optional<int> label;  // empty = trap unchecked that week
    double canopy_pct = 0.0;
    double impervious_pct = 0.0;
    std::vector<double> landcover_fractions;
    std::vector<double> road_fractions;
    std::vector<double> daily_mean_temps_f;
    std::vector<double> daily_precip_mm;
};

struct RawTable {
    std::vector<std::string> landcover_classes;  // from lc_<name> columns
    std::vector<std::string> road_classes;       // from road_<name> columns
    std::size_t window_days = 0;                 // tmean_f_i / prcp_mm_i count
    std::vector<RawRow> rows;
};

// Input CSV schema: trap_id,lat,lon,week,label then covariate columns
// (canopy_pct, impervious_pct, lc_*, road_*, tmean_f_*, prcp_mm_*).
// Blank label means unchecked; every other field is required. Distinct
// traps sharing identical coordinates are rejected here rather than
// jittered downstream.
RawTable load_raw_table(const std::string& path);
RawTable parse_raw_table(const std::string& text, const std::string& origin);
std::string serialize_raw_table(const RawTable& table);

// Preprocessed feature rows in a fixed documented column order.
struct FeatureRow {
    std::string trap_id;
    GeoPoint position;
    int week = 0;
    std::optional<int> label;
    std::vector<double> features;
};

struct FeatureTable {
    std::vector<std::string> column_names;
    std::vector<FeatureRow> rows;

    // Unique trap ids in first-appearance order with their positions.
    std::vector<TrapObservation> traps_at_week(int week) const;
    std::vector<int> sorted_weeks() const;
};

FeatureTable load_feature_table(const std::string& path);
std::string serialize_feature_table(const FeatureTable& table);

}  // namespace mage
