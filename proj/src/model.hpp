#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "geo.hpp"
#include "tensor.hpp"

namespace mage {

enum class Variant { GraphMage, GraphSage, ResGcnOverMage, ResGcnOverSage };
enum class AggregatorKind { Mean, InverseDistanceWeightedMean };

std::string variant_name(Variant v);
Variant parse_variant(const std::string& name);
std::string aggregator_name(AggregatorKind a);
AggregatorKind parse_aggregator(const std::string& name);

struct ModelConfig {
    Variant variant = Variant::GraphMage;
    int num_layers = 4;
    int width = 128;
    double dropout_p = 0.2;
    AggregatorKind aggregator = AggregatorKind::Mean;
    int input_dim = 0;

    void validate() const;
};

// Embedding map, per-layer MLP (affine -> relu -> dropout -> affine), and a
// one-logit output head. Shapes are determined entirely by the config.
struct LayerParameters {
    Tensor w1, b1;  // (2*width) x width affine
    Tensor w2, b2;  // width x width affine
};

struct ModelParameters {
    Tensor embed_w, embed_b;  // input_dim -> width
    std::vector<LayerParameters> layers;
    Tensor head_w, head_b;  // width -> 1

    std::vector<Tensor> all() const;
    std::vector<std::pair<std::string, Tensor>> named() const;
    void set_requires_grad(bool on);
    void zero_grad();
    ModelParameters clone() const;
};

// Glorot-uniform weights (+-sqrt(6/(fan_in+fan_out))), zero biases,
// deterministic per seed.
ModelParameters init_parameters(const ModelConfig& config, std::uint64_t seed);

// Neighbor aggregation weights for one graph: mean or inverse-distance
// weighted mean over in-neighbors; empty neighborhoods yield a zero row.
RowMix aggregation_mix(const SpatialGraph& graph, AggregatorKind kind);

struct ForwardResult {
    Tensor logits;                  // num_nodes x 1
    std::vector<Tensor> embeddings;  // h^0 .. h^L, each num_nodes x width
};

// One forward pass over a graph snapshot. Dispatches on config.variant:
// GraphMage concatenates h^0 with the aggregated neighbor state at every
// layer, GraphSage concatenates h^{l-1}, and the ResGcn variants add an
// identity residual h^l += h^{l-1} after the base layer.
ForwardResult model_forward(Tape& tape, const Tensor& features, const SpatialGraph& graph,
                            const ModelParameters& params, const ModelConfig& config, bool training, Rng& rng);

// Root-mean-square pairwise distance between embedding rows; the collapse
// diagnostics compare this across architectures.
double row_dispersion(const Tensor& embeddings);

// Path-length census of the layer wiring: count of input-to-output paths by
// number of MLP applications, computed symbolically. GraphMage yields one
// path per length 1..L; ResGcn over GraphSage yields C(L, j) paths of
// length j.
std::map<int, long long> count_input_output_paths(const ModelConfig& config);

// Versioned text container for config + scaler reference + parameters;
// round-trips bit-exactly.
std::string serialize_checkpoint(const ModelConfig& config, const ModelParameters& params,
                                 const std::string& scaler_ref);

struct Checkpoint {
    ModelConfig config;
    ModelParameters params;
    std::string scaler_ref;
};

Checkpoint parse_checkpoint(const std::string& text, const std::string& origin);
void save_checkpoint(const std::string& path, const ModelConfig& config, const ModelParameters& params,
                     const std::string& scaler_ref);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace mage
