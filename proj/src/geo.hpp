#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "error.hpp"

namespace mage {

struct GeoPoint {
    double latitude;   // degrees, [-90, 90]
    double longitude;  // degrees, [-180, 180]
};

void validate_geo_point(const GeoPoint& p);

// Great-circle (haversine) distance in kilometers, Earth radius 6371.0088 km.
double geo_distance(const GeoPoint& a, const GeoPoint& b);

struct InEdge {
    std::size_t src;
    double distance_km;
};

// Per-week directed spatial graph over trap nodes. u appearing in
// in_neighbors[v] means u is among v's k nearest within the radius and
// messages flow u -> v. Neighbor lists are sorted by (distance, src).
struct SpatialGraph {
    int week = 0;
    std::vector<std::string> node_ids;
    std::vector<GeoPoint> positions;
    std::vector<std::vector<InEdge>> in_neighbors;
    std::vector<bool> labeled_mask;

    std::size_t num_nodes() const { return node_ids.size(); }
};

// Truncated kNN adjacency: for each node, the up-to-k nearest other nodes
// with distance <= radius_km. Isolated nodes are valid output.
std::vector<std::vector<InEdge>> build_knn_graph(const std::vector<GeoPoint>& positions, std::size_t k,
                                                 double radius_km);

struct TrapObservation {
    std::string trap_id;
    GeoPoint position;
    bool checked = false;  // outcome observed this week
};

// Graph over the checked traps only; labeled_mask is all true.
SpatialGraph build_supervised_graph(const std::vector<TrapObservation>& observations, int week, std::size_t k,
                                    double radius_km);

// Graph over every known trap location; labeled_mask marks checked traps.
SpatialGraph build_semisupervised_graph(const std::vector<TrapObservation>& observations, int week,
                                        std::size_t k, double radius_km);

struct ConnectivityPartition {
    std::vector<double> scores;          // per node: sum of inverse distances (1/km)
    std::vector<std::size_t> upper_set;  // strictly above the 80th percentile score
    std::vector<std::size_t> lower_set;  // strictly below the 20th percentile score
};

ConnectivityPartition connectivity_partition(const SpatialGraph& graph);

// Quantile by linear interpolation between order statistics of sorted values.
double interpolated_quantile(std::vector<double> values, double q);

// Text export `week,src_id,dst_id,distance_km` (6-decimal distances),
// lexicographically sorted lines. The golden-file test format.
std::string export_edge_list(const std::vector<SpatialGraph>& graphs);

}  // namespace mage
