#include "geo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace mage {

namespace {

constexpr double kEarthRadiusKm = 6371.0088;

double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }

}  // namespace

void validate_geo_point(const GeoPoint& p) {
    if (!(p.latitude >= -90.0 && p.latitude <= 90.0))
        throw_data("latitude out of range [-90, 90]: " + std::to_string(p.latitude));
    if (!(p.longitude >= -180.0 && p.longitude <= 180.0))
        throw_data("longitude out of range [-180, 180]: " + std::to_string(p.longitude));
}

double geo_distance(const GeoPoint& a, const GeoPoint& b) {
    validate_geo_point(a);
    validate_geo_point(b);
    if (a.latitude == b.latitude && a.longitude == b.longitude) return 0.0;
    const double phi1 = deg2rad(a.latitude);
    const double phi2 = deg2rad(b.latitude);
    const double dphi = deg2rad(b.latitude - a.latitude);
    const double dlam = deg2rad(b.longitude - a.longitude);
    const double s1 = std::sin(dphi / 2.0);
    const double s2 = std::sin(dlam / 2.0);
    const double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
    return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

std::vector<std::vector<InEdge>> build_knn_graph(const std::vector<GeoPoint>& positions, std::size_t k,
                                                 double radius_km) {
    if (k < 1) throw_param("build_knn_graph: k must be >= 1");
    if (!(radius_km > 0.0)) throw_param("build_knn_graph: radius_km must be positive");
    if (positions.empty()) throw_param("build_knn_graph: need at least one node");

    const std::size_t n = positions.size();
    std::vector<std::vector<InEdge>> in_neighbors(n);
    std::vector<InEdge> candidates;
    for (std::size_t v = 0; v < n; ++v) {
        candidates.clear();
        for (std::size_t u = 0; u < n; ++u) {
            if (u == v) continue;
            const double d = geo_distance(positions[u], positions[v]);
            if (d <= radius_km) candidates.push_back({u, d});
        }
        const std::size_t take = std::min(k, candidates.size());
        auto by_distance_then_id = [](const InEdge& a, const InEdge& b) {
            if (a.distance_km != b.distance_km) return a.distance_km < b.distance_km;
            return a.src < b.src;
        };
        std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take),
                          candidates.end(), by_distance_then_id);
        candidates.resize(take);
        in_neighbors[v] = candidates;
    }
    return in_neighbors;
}

namespace {

SpatialGraph build_graph_over(std::vector<TrapObservation> nodes, int week, std::size_t k, double radius_km) {
    SpatialGraph g;
    g.week = week;
    g.node_ids.reserve(nodes.size());
    g.positions.reserve(nodes.size());
    g.labeled_mask.reserve(nodes.size());
    for (const auto& obs : nodes) {
        g.node_ids.push_back(obs.trap_id);
        g.positions.push_back(obs.position);
        g.labeled_mask.push_back(obs.checked);
    }
    g.in_neighbors = build_knn_graph(g.positions, k, radius_km);
    return g;
}

}  // namespace

SpatialGraph build_supervised_graph(const std::vector<TrapObservation>& observations, int week, std::size_t k,
                                    double radius_km) {
    std::vector<TrapObservation> checked;
    for (const auto& obs : observations) {
        if (obs.checked) checked.push_back(obs);
    }
    if (checked.empty())
        throw_data("build_supervised_graph: no checked observations at week " + std::to_string(week));
    for (auto& obs : checked) obs.checked = true;
    return build_graph_over(std::move(checked), week, k, radius_km);
}

SpatialGraph build_semisupervised_graph(const std::vector<TrapObservation>& observations, int week,
                                        std::size_t k, double radius_km) {
    if (observations.empty()) throw_data("build_semisupervised_graph: no traps at week " + std::to_string(week));
    return build_graph_over(observations, week, k, radius_km);
}

double interpolated_quantile(std::vector<double> values, double q) {
    if (values.empty()) throw_data("quantile of empty set");
    if (!(q >= 0.0 && q <= 1.0)) throw_param("quantile level must be in [0, 1]");
    std::sort(values.begin(), values.end());
    const double h = q * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(h);
    if (lo + 1 >= values.size()) return values.back();
    const double frac = h - static_cast<double>(lo);
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

ConnectivityPartition connectivity_partition(const SpatialGraph& graph) {
    if (graph.num_nodes() == 0) throw_data("connectivity_partition: empty graph");

    ConnectivityPartition part;
    part.scores.resize(graph.num_nodes(), 0.0);
    for (std::size_t v = 0; v < graph.num_nodes(); ++v) {
        for (const auto& e : graph.in_neighbors[v]) {
            if (e.distance_km == 0.0)
                throw_data("connectivity_partition: zero-distance edge into node " + graph.node_ids[v] +
                           "; de-duplicate coordinates upstream");
            part.scores[v] += 1.0 / e.distance_km;
        }
    }

    const double q80 = interpolated_quantile(part.scores, 0.80);
    const double q20 = interpolated_quantile(part.scores, 0.20);
    for (std::size_t v = 0; v < graph.num_nodes(); ++v) {
        if (part.scores[v] > q80) part.upper_set.push_back(v);
        if (part.scores[v] < q20) part.lower_set.push_back(v);
    }
    return part;
}

std::string export_edge_list(const std::vector<SpatialGraph>& graphs) {
    std::vector<std::string> lines;
    char buf[64];
    for (const auto& g : graphs) {
        for (std::size_t v = 0; v < g.num_nodes(); ++v) {
            for (const auto& e : g.in_neighbors[v]) {
                std::snprintf(buf, sizeof(buf), "%.6f", e.distance_km);
                lines.push_back(std::to_string(g.week) + "," + g.node_ids[e.src] + "," + g.node_ids[v] + "," +
                                buf);
            }
        }
    }
    std::sort(lines.begin(), lines.end());
    std::string out;
    for (const auto& line : lines) {
        out += line;
        out += '\n';
    }
    return out;
}

}  // namespace mage
