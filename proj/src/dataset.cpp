#include "dataset.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "csv.hpp"
#include "error.hpp"

namespace mage {

namespace {

const std::vector<std::string> kBaseColumns = {"trap_id", "lat", "lon", "week", "label"};

bool has_prefix(const std::string& s, const std::string& prefix) {
    return s.size() > prefix.size() && s.compare(0, prefix.size(), prefix) == 0;
}

struct RawSchema {
    int canopy = -1;
    int impervious = -1;
    std::vector<std::pair<std::string, int>> landcover;
    std::vector<std::pair<std::string, int>> roads;
    std::vector<int> tmean;  // tmean_f_0..m-1 column indices
    std::vector<int> prcp;   // prcp_mm_0..m-1
};

RawSchema discover_schema(const CsvTable& csv, const std::string& origin) {
    for (std::size_t i = 0; i < kBaseColumns.size(); ++i) {
        if (csv.header.size() <= i || csv.header[i] != kBaseColumns[i])
            throw_data(origin + ": header must start with trap_id,lat,lon,week,label");
    }

    RawSchema schema;
    std::map<long, int> tmean_cols, prcp_cols;
    for (std::size_t i = kBaseColumns.size(); i < csv.header.size(); ++i) {
        const std::string& name = csv.header[i];
        const int idx = static_cast<int>(i);
        if (name == "canopy_pct") {
            schema.canopy = idx;
        } else if (name == "impervious_pct") {
            schema.impervious = idx;
        } else if (has_prefix(name, "lc_")) {
            schema.landcover.emplace_back(name.substr(3), idx);
        } else if (has_prefix(name, "road_")) {
            schema.roads.emplace_back(name.substr(5), idx);
        } else if (has_prefix(name, "tmean_f_")) {
            tmean_cols[parse_long(name.substr(8), origin + ": column " + name)] = idx;
        } else if (has_prefix(name, "prcp_mm_")) {
            prcp_cols[parse_long(name.substr(8), origin + ": column " + name)] = idx;
        } else {
            throw_data(origin + ": unknown column '" + name + "'");
        }
    }
    if (schema.canopy < 0) throw_data(origin + ": missing canopy_pct column");
    if (schema.impervious < 0) throw_data(origin + ": missing impervious_pct column");
    if (tmean_cols.empty()) throw_data(origin + ": missing tmean_f_* columns");
    if (tmean_cols.size() != prcp_cols.size())
        throw_data(origin + ": tmean_f_* and prcp_mm_* column counts differ");
    for (std::size_t d = 0; d < tmean_cols.size(); ++d) {
        if (tmean_cols.count(static_cast<long>(d)) == 0 || prcp_cols.count(static_cast<long>(d)) == 0)
            throw_data(origin + ": daily columns must be contiguous from index 0");
        schema.tmean.push_back(tmean_cols[static_cast<long>(d)]);
        schema.prcp.push_back(prcp_cols[static_cast<long>(d)]);
    }
    return schema;
}

}  // namespace

RawTable parse_raw_table(const std::string& text, const std::string& origin) {
    CsvTable csv = parse_csv(text, origin);
    RawSchema schema = discover_schema(csv, origin);

    RawTable table;
    for (const auto& [name, idx] : schema.landcover) {
        (void)idx;
        table.landcover_classes.push_back(name);
    }
    for (const auto& [name, idx] : schema.roads) {
        (void)idx;
        table.road_classes.push_back(name);
    }
    table.window_days = schema.tmean.size();

    std::vector<std::string> problems;
    std::set<std::pair<std::string, int>> seen_keys;
    std::map<std::string, GeoPoint> trap_positions;

    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        const auto& fields = csv.rows[r];
        const std::string where = origin + ": row " + std::to_string(r + 2);
        try {
            RawRow row;
            row.trap_id = fields[0];
            if (row.trap_id.empty()) throw_data(where + ": empty trap_id");
            row.position = {parse_double(fields[1], where + " lat"), parse_double(fields[2], where + " lon")};
            validate_geo_point(row.position);
            row.week = static_cast<int>(parse_long(fields[3], where + " week"));
            if (row.week < 0) throw_data(where + ": negative week");
            if (!fields[4].empty()) {
                const long lab = parse_long(fields[4], where + " label");
                if (lab != 0 && lab != 1) throw_data(where + ": label must be 0, 1, or blank");
                row.label = static_cast<int>(lab);
            }
            row.canopy_pct = parse_double(fields[static_cast<std::size_t>(schema.canopy)], where + " canopy_pct");
            row.impervious_pct =
                parse_double(fields[static_cast<std::size_t>(schema.impervious)], where + " impervious_pct");
            for (const auto& [name, idx] : schema.landcover)
                row.landcover_fractions.push_back(
                    parse_double(fields[static_cast<std::size_t>(idx)], where + " lc_" + name));
            for (const auto& [name, idx] : schema.roads)
                row.road_fractions.push_back(
                    parse_double(fields[static_cast<std::size_t>(idx)], where + " road_" + name));
            for (int idx : schema.tmean)
                row.daily_mean_temps_f.push_back(
                    parse_double(fields[static_cast<std::size_t>(idx)], where + " tmean"));
            for (int idx : schema.prcp)
                row.daily_precip_mm.push_back(parse_double(fields[static_cast<std::size_t>(idx)], where + " prcp"));

            if (!seen_keys.insert({row.trap_id, row.week}).second)
                throw_data(where + ": duplicate (trap_id, week) = (" + row.trap_id + ", " +
                           std::to_string(row.week) + ")");
            auto [it, inserted] = trap_positions.emplace(row.trap_id, row.position);
            if (!inserted && (it->second.latitude != row.position.latitude ||
                              it->second.longitude != row.position.longitude))
                throw_data(where + ": trap " + row.trap_id + " moves between rows");

            table.rows.push_back(std::move(row));
        } catch (const Error& e) {
            std::string msg = e.what();
            if (msg.find(where) == std::string::npos) msg = where + ": " + msg;
            problems.push_back(std::move(msg));
        }
    }

    // Distinct traps on identical coordinates break distance-based graphs.
    std::map<std::pair<double, double>, std::string> by_coord;
    for (const auto& [trap, pos] : trap_positions) {
        auto [it, inserted] = by_coord.emplace(std::make_pair(pos.latitude, pos.longitude), trap);
        if (!inserted)
            problems.push_back(origin + ": traps " + it->second + " and " + trap +
                               " share identical coordinates; de-duplicate the table");
    }

    if (!problems.empty()) {
        std::string msg = origin + ": " + std::to_string(problems.size()) + " invalid row(s)";
        for (const auto& p : problems) msg += "\n  " + p;
        throw_data(msg);
    }
    return table;
}

RawTable load_raw_table(const std::string& path) { return parse_raw_table(read_file(path), path); }

std::string serialize_raw_table(const RawTable& table) {
    std::string out = "trap_id,lat,lon,week,label,canopy_pct,impervious_pct";
    for (const auto& cls : table.landcover_classes) out += ",lc_" + cls;
    for (const auto& cls : table.road_classes) out += ",road_" + cls;
    for (std::size_t d = 0; d < table.window_days; ++d) out += ",tmean_f_" + std::to_string(d);
    for (std::size_t d = 0; d < table.window_days; ++d) out += ",prcp_mm_" + std::to_string(d);
    out += "\n";

    std::vector<const RawRow*> ordered;
    ordered.reserve(table.rows.size());
    for (const auto& row : table.rows) ordered.push_back(&row);
    std::stable_sort(ordered.begin(), ordered.end(), [](const RawRow* a, const RawRow* b) {
        return a->week != b->week ? a->week < b->week : a->trap_id < b->trap_id;
    });

    for (const RawRow* row : ordered) {
        out += row->trap_id + "," + format_double(row->position.latitude) + "," +
               format_double(row->position.longitude) + "," + std::to_string(row->week) + ",";
        if (row->label) out += std::to_string(*row->label);
        out += "," + format_double(row->canopy_pct) + "," + format_double(row->impervious_pct);
        for (double f : row->landcover_fractions) out += "," + format_double(f);
        for (double f : row->road_fractions) out += "," + format_double(f);
        for (double t : row->daily_mean_temps_f) out += "," + format_double(t);
        for (double p : row->daily_precip_mm) out += "," + format_double(p);
        out += "\n";
    }
    return out;
}

std::vector<TrapObservation> FeatureTable::traps_at_week(int week) const {
    std::vector<TrapObservation> traps;
    for (const auto& row : rows) {
        if (row.week != week) continue;
        traps.push_back({row.trap_id, row.position, row.label.has_value()});
    }
    std::sort(traps.begin(), traps.end(),
              [](const TrapObservation& a, const TrapObservation& b) { return a.trap_id < b.trap_id; });
    return traps;
}

std::vector<int> FeatureTable::sorted_weeks() const {
    std::set<int> weeks;
    for (const auto& row : rows) weeks.insert(row.week);
    return {weeks.begin(), weeks.end()};
}

FeatureTable load_feature_table(const std::string& path) {
    CsvTable csv = read_csv(path);
    for (std::size_t i = 0; i < kBaseColumns.size(); ++i) {
        if (csv.header.size() <= i || csv.header[i] != kBaseColumns[i])
            throw_data(path + ": feature header must start with trap_id,lat,lon,week,label");
    }
    FeatureTable table;
    table.column_names.assign(csv.header.begin() + static_cast<std::ptrdiff_t>(kBaseColumns.size()),
                              csv.header.end());
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        const auto& fields = csv.rows[r];
        const std::string where = path + ": row " + std::to_string(r + 2);
        FeatureRow row;
        row.trap_id = fields[0];
        row.position = {parse_double(fields[1], where), parse_double(fields[2], where)};
        row.week = static_cast<int>(parse_long(fields[3], where));
        if (!fields[4].empty()) row.label = static_cast<int>(parse_long(fields[4], where));
        for (std::size_t c = kBaseColumns.size(); c < fields.size(); ++c)
            row.features.push_back(parse_double(fields[c], where));
        table.rows.push_back(std::move(row));
    }
    return table;
}

std::string serialize_feature_table(const FeatureTable& table) {
    std::string out = "trap_id,lat,lon,week,label";
    for (const auto& name : table.column_names) out += "," + name;
    out += "\n";

    std::vector<const FeatureRow*> ordered;
    ordered.reserve(table.rows.size());
    for (const auto& row : table.rows) ordered.push_back(&row);
    std::stable_sort(ordered.begin(), ordered.end(), [](const FeatureRow* a, const FeatureRow* b) {
        return a->week != b->week ? a->week < b->week : a->trap_id < b->trap_id;
    });

    for (const FeatureRow* row : ordered) {
        out += row->trap_id + "," + format_double(row->position.latitude) + "," +
               format_double(row->position.longitude) + "," + std::to_string(row->week) + ",";
        if (row->label) out += std::to_string(*row->label);
        for (double v : row->features) out += "," + format_double(v);
        out += "\n";
    }
    return out;
}

}  // namespace mage
