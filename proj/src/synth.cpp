#include "synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "csv.hpp"
#include "error.hpp"
#include "tensor.hpp"

namespace mage {

void SynthConfig::validate() const {
    if (n_traps < 2) throw_param("synth: n_traps must be >= 2");
    if (n_weeks < 1) throw_param("synth: n_weeks must be >= 1");
    if (!(missing_rate >= 0.0 && missing_rate < 1.0)) throw_param("synth: missing_rate must be in [0, 1)");
}

namespace {

// Trap scatter box, roughly greater Chicagoland.
constexpr double kLat0 = 41.0, kLat1 = 42.6;
constexpr double kLon0 = -88.8, kLon1 = -87.0;
constexpr int kWindowDays = 7;

struct Bump {
    double x, y;  // km in the local projection
    double amplitude;
    double scale_km;
};

// Sum of Gaussian bumps; smooth at the ~7 km neighbor spacing.
struct SmoothField {
    std::vector<Bump> bumps;

    double operator()(double x, double y) const {
        double v = 0.0;
        for (const auto& b : bumps) {
            const double dx = x - b.x, dy = y - b.y;
            v += b.amplitude * std::exp(-(dx * dx + dy * dy) / (2.0 * b.scale_km * b.scale_km));
        }
        return v;
    }
};

SmoothField random_field(Rng& rng, int n_bumps, double width_km, double height_km, double amp_lo,
                         double amp_hi) {
    std::uniform_real_distribution<double> ux(0.0, width_km), uy(0.0, height_km);
    std::uniform_real_distribution<double> uamp(amp_lo, amp_hi), uscale(18.0, 40.0);
    std::bernoulli_distribution usign(0.5);
    SmoothField field;
    for (int i = 0; i < n_bumps; ++i) {
        const double amp = uamp(rng) * (usign(rng) ? 1.0 : -1.0);
        field.bumps.push_back({ux(rng), uy(rng), amp, uscale(rng)});
    }
    return field;
}

double clamp_pct(double v) { return std::clamp(v, 0.0, 100.0); }

}  // namespace

SyntheticWorld generate_synthetic_world(const SynthConfig& config) {
    config.validate();
    Rng rng(config.seed);

    const double mid_lat = 0.5 * (kLat0 + kLat1);
    const double km_per_deg_lat = 110.574;
    const double km_per_deg_lon = 111.320 * std::cos(mid_lat * std::numbers::pi / 180.0);
    const double width_km = (kLon1 - kLon0) * km_per_deg_lon;
    const double height_km = (kLat1 - kLat0) * km_per_deg_lat;

    // Trap locations: uniform scatter, de-duplicated by construction.
    std::uniform_real_distribution<double> ulat(kLat0, kLat1), ulon(kLon0, kLon1);
    std::vector<GeoPoint> positions;
    std::set<std::pair<double, double>> used;
    while (positions.size() < static_cast<std::size_t>(config.n_traps)) {
        GeoPoint p{ulat(rng), ulon(rng)};
        if (used.emplace(p.latitude, p.longitude).second) positions.push_back(p);
    }
    auto km_xy = [&](const GeoPoint& p) {
        return std::pair<double, double>{(p.longitude - kLon0) * km_per_deg_lon,
                                         (p.latitude - kLat0) * km_per_deg_lat};
    };

    // Latent structure: one field drives risk, two more drive land cover and
    // urbanization, partially correlated with risk.
    const SmoothField risk_field = random_field(rng, 7, width_km, height_km, 0.7, 1.5);
    const SmoothField env_field = random_field(rng, 6, width_km, height_km, 0.6, 1.3);
    const SmoothField urban_field = random_field(rng, 5, width_km, height_km, 0.6, 1.3);

    std::normal_distribution<double> trap_noise(0.0, 1.0);
    std::normal_distribution<double> daily_noise(0.0, 2.5);
    std::normal_distribution<double> weekly_noise(0.0, 0.30);
    std::uniform_real_distribution<double> unif01(0.0, 1.0);

    SyntheticWorld world;
    world.table.landcover_classes = {"open_water",     "developed_open", "developed_low", "developed_medium",
                                     "developed_high", "deciduous_forest", "grassland",   "pasture_hay",
                                     "cultivated_crops", "woody_wetlands"};
    world.table.road_classes = {"primary", "secondary", "tertiary", "nonroad"};
    world.table.window_days = kWindowDays;

    // Static per-trap covariates: noisy, discretized views of the fields.
    struct TrapProfile {
        double risk, env, urban;
        double canopy_pct, impervious_pct;
        std::vector<double> landcover;
        std::vector<double> roads;
        double cov_effect;  // covariate contribution to the latent risk
    };
    std::vector<TrapProfile> profiles;
    for (int v = 0; v < config.n_traps; ++v) {
        auto [x, y] = km_xy(positions[static_cast<std::size_t>(v)]);
        TrapProfile tp;
        tp.risk = risk_field(x, y);
        tp.env = 0.55 * tp.risk + 0.45 * env_field(x, y);
        tp.urban = -0.45 * tp.risk + 0.55 * urban_field(x, y);

        tp.canopy_pct = clamp_pct(42.0 + 24.0 * (tp.env + 0.9 * trap_noise(rng)));
        tp.impervious_pct = clamp_pct(45.0 + 24.0 * (tp.urban + 0.9 * trap_noise(rng)));

        // Land-cover composition: intensities keyed to the fields plus trap
        // noise, normalized to fractions.
        const double water = std::exp(0.5 * env_field(x * 0.7, y * 0.7) + 0.5 * trap_noise(rng) - 1.4);
        const double dev_open = std::exp(0.5 * tp.urban + 0.4 * trap_noise(rng) - 0.4);
        const double dev_low = std::exp(0.7 * tp.urban + 0.4 * trap_noise(rng) - 0.3);
        const double dev_med = std::exp(0.9 * tp.urban + 0.4 * trap_noise(rng) - 0.5);
        const double dev_high = std::exp(1.1 * tp.urban + 0.4 * trap_noise(rng) - 0.9);
        const double forest = std::exp(0.9 * tp.env + 0.4 * trap_noise(rng) - 0.2);
        const double grass = std::exp(0.4 * tp.env - 0.3 * tp.urban + 0.4 * trap_noise(rng) - 0.6);
        const double pasture = std::exp(0.5 * tp.env - 0.6 * tp.urban + 0.4 * trap_noise(rng) - 0.5);
        const double crops = std::exp(0.3 * tp.env - 0.8 * tp.urban + 0.4 * trap_noise(rng) - 0.4);
        const double wetland = std::exp(0.8 * tp.risk + 0.4 * trap_noise(rng) - 0.9);
        std::vector<double> intensity = {water,    dev_open, dev_low, dev_med,  dev_high,
                                         forest,   grass,    pasture, crops,    wetland};
        double total = 0.0;
        for (double i : intensity) total += i;
        tp.landcover.reserve(intensity.size());
        for (double i : intensity) tp.landcover.push_back(i / total);

        const double road_base = 0.10 + 0.15 * tp.urban;
        tp.roads = {std::clamp(0.08 + 0.10 * tp.urban + 0.05 * trap_noise(rng), 0.0, 1.0),
                    std::clamp(0.10 + 0.12 * tp.urban + 0.05 * trap_noise(rng), 0.0, 1.0),
                    std::clamp(0.12 + 0.10 * tp.urban + 0.05 * trap_noise(rng), 0.0, 1.0),
                    std::clamp(road_base + 0.05 * trap_noise(rng), 0.0, 1.0)};

        tp.cov_effect = 0.35 * tp.env - 0.15 * tp.urban;
        profiles.push_back(std::move(tp));
    }

    // Weekly outcomes and covariate rows.
    std::uniform_real_distribution<double> ucheck(0.0, 1.0);
    for (int t = 0; t < config.n_weeks; ++t) {
        const double season = std::sin(2.0 * std::numbers::pi * static_cast<double>(t % 52) / 52.0 - 1.3);
        const double season_f = 52.0 + 26.0 * season;
        for (int v = 0; v < config.n_traps; ++v) {
            const auto& tp = profiles[static_cast<std::size_t>(v)];
            RawRow row;
            row.trap_id = "trap" + std::to_string(v);
            row.position = positions[static_cast<std::size_t>(v)];
            row.week = t;
            row.canopy_pct = tp.canopy_pct;
            row.impervious_pct = tp.impervious_pct;
            row.landcover_fractions = tp.landcover;
            row.road_fractions = tp.roads;

            auto [x, y] = km_xy(row.position);
            const double microclimate = 1.5 * env_field(x, y);
            double prcp_total = 0.0;
            for (int d = 0; d < kWindowDays; ++d) {
                row.daily_mean_temps_f.push_back(season_f + microclimate + daily_noise(rng));
                const double p = std::max(0.0, 3.0 * unif01(rng) * (1.2 + 0.4 * season));
                row.daily_precip_mm.push_back(p);
                prcp_total += p;
            }
            (void)prcp_total;

            const double latent = -0.35 + 1.25 * season + 1.55 * tp.risk + tp.cov_effect + weekly_noise(rng);
            const double p_true = 1.0 / (1.0 + std::exp(-latent));
            const bool outcome = unif01(rng) < p_true;
            const bool checked = ucheck(rng) >= config.missing_rate;
            if (checked) row.label = outcome ? 1 : 0;

            world.oracle.push_back({row.trap_id, t, p_true});
            world.table.rows.push_back(std::move(row));
        }
    }
    return world;
}

std::string serialize_oracle(const std::vector<OracleRecord>& oracle) {
    std::string out = "trap_id,week,p_true\n";
    std::vector<const OracleRecord*> ordered;
    ordered.reserve(oracle.size());
    for (const auto& rec : oracle) ordered.push_back(&rec);
    std::stable_sort(ordered.begin(), ordered.end(), [](const OracleRecord* a, const OracleRecord* b) {
        return a->week != b->week ? a->week < b->week : a->trap_id < b->trap_id;
    });
    for (const OracleRecord* rec : ordered)
        out += rec->trap_id + "," + std::to_string(rec->week) + "," + format_double(rec->p_true) + "\n";
    return out;
}

std::vector<OracleRecord> load_oracle(const std::string& path) {
    CsvTable csv = read_csv(path);
    if (csv.header != std::vector<std::string>{"trap_id", "week", "p_true"})
        throw_data(path + ": expected header trap_id,week,p_true");
    std::vector<OracleRecord> oracle;
    for (const auto& row : csv.rows)
        oracle.push_back({row[0], static_cast<int>(parse_long(row[1], path)), parse_double(row[2], path)});
    return oracle;
}

}  // namespace mage
