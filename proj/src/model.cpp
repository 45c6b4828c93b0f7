#include "model.hpp"

#include <cmath>
#include <sstream>

#include "csv.hpp"

namespace mage {

std::string variant_name(Variant v) {
    switch (v) {
        case Variant::GraphMage: return "graphmage";
        case Variant::GraphSage: return "graphsage";
        case Variant::ResGcnOverMage: return "resgcn-over-mage";
        case Variant::ResGcnOverSage: return "resgcn-over-sage";
    }
    throw_param("unknown variant");
}

Variant parse_variant(const std::string& name) {
    if (name == "graphmage") return Variant::GraphMage;
    if (name == "graphsage") return Variant::GraphSage;
    if (name == "resgcn-over-mage") return Variant::ResGcnOverMage;
    if (name == "resgcn-over-sage") return Variant::ResGcnOverSage;
    throw_param("unknown model variant '" + name +
                "' (expected graphmage, graphsage, resgcn-over-mage, or resgcn-over-sage)");
}

std::string aggregator_name(AggregatorKind a) {
    return a == AggregatorKind::Mean ? "mean" : "inverse-distance-weighted-mean";
}

AggregatorKind parse_aggregator(const std::string& name) {
    if (name == "mean") return AggregatorKind::Mean;
    if (name == "inverse-distance-weighted-mean") return AggregatorKind::InverseDistanceWeightedMean;
    throw_param("unknown aggregator '" + name + "' (expected mean or inverse-distance-weighted-mean)");
}

void ModelConfig::validate() const {
    if (num_layers < 1) throw_param("model: num_layers must be >= 1");
    if (width < 1) throw_param("model: width must be >= 1");
    if (!(dropout_p >= 0.0 && dropout_p < 1.0)) throw_param("model: dropout_p must be in [0, 1)");
    if (input_dim < 1) throw_param("model: input_dim must be >= 1");
}

std::vector<Tensor> ModelParameters::all() const {
    std::vector<Tensor> out = {embed_w, embed_b};
    for (auto& layer : layers) {
        out.push_back(layer.w1);
        out.push_back(layer.b1);
        out.push_back(layer.w2);
        out.push_back(layer.b2);
    }
    out.push_back(head_w);
    out.push_back(head_b);
    return out;
}

std::vector<std::pair<std::string, Tensor>> ModelParameters::named() const {
    std::vector<std::pair<std::string, Tensor>> out;
    out.emplace_back("embed.weight", embed_w);
    out.emplace_back("embed.bias", embed_b);
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const std::string prefix = "layer" + std::to_string(l) + ".";
        out.emplace_back(prefix + "w1", layers[l].w1);
        out.emplace_back(prefix + "b1", layers[l].b1);
        out.emplace_back(prefix + "w2", layers[l].w2);
        out.emplace_back(prefix + "b2", layers[l].b2);
    }
    out.emplace_back("head.weight", head_w);
    out.emplace_back("head.bias", head_b);
    return out;
}

void ModelParameters::set_requires_grad(bool on) {
    for (auto& t : all()) t.set_requires_grad(on);
}

void ModelParameters::zero_grad() {
    for (auto& t : all()) t.zero_grad();
}

ModelParameters ModelParameters::clone() const {
    ModelParameters copy;
    copy.embed_w = embed_w.clone();
    copy.embed_b = embed_b.clone();
    for (const auto& layer : layers)
        copy.layers.push_back({layer.w1.clone(), layer.b1.clone(), layer.w2.clone(), layer.b2.clone()});
    copy.head_w = head_w.clone();
    copy.head_b = head_b.clone();
    return copy;
}

namespace {

Tensor glorot_affine(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> unif(-bound, bound);
    Tensor w = Tensor::zeros(fan_in, fan_out, true);
    for (double& v : w.values()) v = unif(rng);
    return w;
}

}  // namespace

ModelParameters init_parameters(const ModelConfig& config, std::uint64_t seed) {
    config.validate();
    Rng rng(seed);
    const auto width = static_cast<std::size_t>(config.width);
    const auto input_dim = static_cast<std::size_t>(config.input_dim);

    ModelParameters params;
    params.embed_w = glorot_affine(input_dim, width, rng);
    params.embed_b = Tensor::zeros(1, width, true);
    for (int l = 0; l < config.num_layers; ++l) {
        LayerParameters layer;
        layer.w1 = glorot_affine(2 * width, width, rng);
        layer.b1 = Tensor::zeros(1, width, true);
        layer.w2 = glorot_affine(width, width, rng);
        layer.b2 = Tensor::zeros(1, width, true);
        params.layers.push_back(std::move(layer));
    }
    params.head_w = glorot_affine(width, 1, rng);
    params.head_b = Tensor::zeros(1, 1, true);

    for (auto& [name, tensor] : params.named()) tensor.set_name(name);
    return params;
}

RowMix aggregation_mix(const SpatialGraph& graph, AggregatorKind kind) {
    RowMix mix;
    mix.rows.resize(graph.num_nodes());
    for (std::size_t v = 0; v < graph.num_nodes(); ++v) {
        const auto& edges = graph.in_neighbors[v];
        if (edges.empty()) continue;
        if (kind == AggregatorKind::Mean) {
            const double w = 1.0 / static_cast<double>(edges.size());
            for (const auto& e : edges) mix.rows[v].push_back({e.src, w});
        } else {
            double total = 0.0;
            for (const auto& e : edges) {
                if (e.distance_km == 0.0)
                    throw_data("aggregation: zero-distance edge into node " + graph.node_ids[v]);
                total += 1.0 / e.distance_km;
            }
            for (const auto& e : edges) mix.rows[v].push_back({e.src, (1.0 / e.distance_km) / total});
        }
    }
    return mix;
}

ForwardResult model_forward(Tape& tape, const Tensor& features, const SpatialGraph& graph,
                            const ModelParameters& params, const ModelConfig& config, bool training, Rng& rng) {
    config.validate();
    if (features.rows() != graph.num_nodes())
        throw_shape("model_forward: " + std::to_string(features.rows()) + " feature rows for " +
                    std::to_string(graph.num_nodes()) + " graph nodes");
    if (features.cols() != static_cast<std::size_t>(config.input_dim))
        throw_shape("model_forward: feature width " + std::to_string(features.cols()) +
                    " != input_dim " + std::to_string(config.input_dim));

    const bool self_is_initial =
        config.variant == Variant::GraphMage || config.variant == Variant::ResGcnOverMage;
    const bool residual =
        config.variant == Variant::ResGcnOverMage || config.variant == Variant::ResGcnOverSage;

    const RowMix mix = aggregation_mix(graph, config.aggregator);

    ForwardResult result;
    Tensor h0 = tape.add_row_bias(tape.matmul(features, params.embed_w), params.embed_b);
    result.embeddings.push_back(h0);

    Tensor h = h0;
    for (int l = 0; l < config.num_layers; ++l) {
        const auto& layer = params.layers[static_cast<std::size_t>(l)];
        Tensor agg = tape.mix_rows(h, mix);
        Tensor z = tape.concat_cols(self_is_initial ? h0 : h, agg);
        Tensor u = tape.relu(tape.add_row_bias(tape.matmul(z, layer.w1), layer.b1));
        u = tape.dropout(u, config.dropout_p, training, rng);
        Tensor next = tape.add_row_bias(tape.matmul(u, layer.w2), layer.b2);
        if (residual) next = tape.add(next, h);
        h = next;
        result.embeddings.push_back(h);
    }

    result.logits = tape.add_row_bias(tape.matmul(h, params.head_w), params.head_b);
    return result;
}

double row_dispersion(const Tensor& embeddings) {
    const std::size_t n = embeddings.rows(), d = embeddings.cols();
    if (n < 2) return 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double sq = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
                const double diff = embeddings.at(i, c) - embeddings.at(j, c);
                sq += diff * diff;
            }
            total += sq;
        }
    }
    const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
    return std::sqrt(total / pairs);
}

std::map<int, long long> count_input_output_paths(const ModelConfig& config) {
    config.validate();
    const int L = config.num_layers;

    auto shift = [](const std::map<int, long long>& census) {
        std::map<int, long long> out;
        for (const auto& [len, count] : census) out[len + 1] = count;
        return out;
    };
    auto merge = [](std::map<int, long long>& into, const std::map<int, long long>& from) {
        for (const auto& [len, count] : from) into[len] += count;
    };

    // Walk the wiring layer by layer. `census` tracks, for every signal path
    // reaching the current layer output, how many MLPs it has passed through.
    std::map<int, long long> census;
    switch (config.variant) {
        case Variant::GraphMage:
            census = {{1, 1}};
            for (int l = 2; l <= L; ++l) {
                census = shift(census);
                census[1] += 1;  // fresh h^0 entry through this layer's MLP
            }
            break;
        case Variant::GraphSage:
            census = {{L, 1}};  // every path passes through every MLP
            break;
        case Variant::ResGcnOverSage:
            census = {{0, 1}};
            for (int l = 1; l <= L; ++l) {
                auto processed = shift(census);
                merge(census, processed);  // each path either skips or processes
            }
            break;
        case Variant::ResGcnOverMage:
            census = {{0, 1}, {1, 1}};
            for (int l = 2; l <= L; ++l) {
                auto processed = shift(census);
                processed[1] += 1;  // fresh h^0 entry
                merge(census, processed);
            }
            break;
    }
    return census;
}

namespace {

void append_tensor(std::string& out, const std::string& name, const Tensor& t) {
    out += "tensor " + name + " " + std::to_string(t.rows()) + " " + std::to_string(t.cols()) + "\n";
    for (std::size_t r = 0; r < t.rows(); ++r) {
        for (std::size_t c = 0; c < t.cols(); ++c) {
            if (c) out += ' ';
            out += format_double(t.at(r, c));
        }
        out += '\n';
    }
}

}  // namespace

std::string serialize_checkpoint(const ModelConfig& config, const ModelParameters& params,
                                 const std::string& scaler_ref) {
    std::string out = "magegraph-checkpoint format_version=1\n";
    out += "variant=" + variant_name(config.variant) + "\n";
    out += "num_layers=" + std::to_string(config.num_layers) + "\n";
    out += "width=" + std::to_string(config.width) + "\n";
    out += "dropout_p=" + format_double(config.dropout_p) + "\n";
    out += "aggregator=" + aggregator_name(config.aggregator) + "\n";
    out += "input_dim=" + std::to_string(config.input_dim) + "\n";
    out += "scaler=" + scaler_ref + "\n";
    for (const auto& [name, tensor] : params.named()) append_tensor(out, name, tensor);
    out += "end\n";
    return out;
}

Checkpoint parse_checkpoint(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    auto next_line = [&](const char* what) {
        if (!std::getline(in, line)) throw_data(origin + ": truncated checkpoint (" + what + ")");
        return line;
    };
    if (next_line("magic") != "magegraph-checkpoint format_version=1")
        throw_data(origin + ": not a format_version=1 magegraph checkpoint");

    auto field = [&](const std::string& key) {
        next_line(key.c_str());
        if (line.compare(0, key.size() + 1, key + "=") != 0)
            throw_data(origin + ": expected " + key + "=..., got '" + line + "'");
        return line.substr(key.size() + 1);
    };

    Checkpoint ckpt;
    ckpt.config.variant = parse_variant(field("variant"));
    ckpt.config.num_layers = static_cast<int>(parse_long(field("num_layers"), origin));
    ckpt.config.width = static_cast<int>(parse_long(field("width"), origin));
    ckpt.config.dropout_p = parse_double(field("dropout_p"), origin);
    ckpt.config.aggregator = parse_aggregator(field("aggregator"));
    ckpt.config.input_dim = static_cast<int>(parse_long(field("input_dim"), origin));
    ckpt.scaler_ref = field("scaler");
    ckpt.config.validate();

    ckpt.params.layers.resize(static_cast<std::size_t>(ckpt.config.num_layers));
    std::map<std::string, Tensor*> slots;
    slots["embed.weight"] = &ckpt.params.embed_w;
    slots["embed.bias"] = &ckpt.params.embed_b;
    for (int l = 0; l < ckpt.config.num_layers; ++l) {
        auto& layer = ckpt.params.layers[static_cast<std::size_t>(l)];
        const std::string prefix = "layer" + std::to_string(l) + ".";
        slots[prefix + "w1"] = &layer.w1;
        slots[prefix + "b1"] = &layer.b1;
        slots[prefix + "w2"] = &layer.w2;
        slots[prefix + "b2"] = &layer.b2;
    }
    slots["head.weight"] = &ckpt.params.head_w;
    slots["head.bias"] = &ckpt.params.head_b;

    std::size_t loaded = 0;
    while (true) {
        next_line("tensor header");
        if (line == "end") break;
        std::istringstream hdr(line);
        std::string tag, name;
        std::size_t rows = 0, cols = 0;
        hdr >> tag >> name >> rows >> cols;
        if (tag != "tensor" || hdr.fail()) throw_data(origin + ": bad tensor header '" + line + "'");
        auto it = slots.find(name);
        if (it == slots.end()) throw_data(origin + ": unexpected tensor '" + name + "'");

        Tensor t = Tensor::zeros(rows, cols, true);
        t.set_name(name);
        for (std::size_t r = 0; r < rows; ++r) {
            next_line("tensor row");
            std::size_t pos = 0, c = 0;
            while (c < cols) {
                const std::size_t end = line.find(' ', pos);
                const std::string tok =
                    end == std::string::npos ? line.substr(pos) : line.substr(pos, end - pos);
                t.at(r, c) = parse_double(tok, origin + ": " + name);
                pos = end == std::string::npos ? line.size() : end + 1;
                ++c;
            }
        }
        *it->second = t;
        ++loaded;
    }
    if (loaded != slots.size())
        throw_data(origin + ": checkpoint holds " + std::to_string(loaded) + " tensors, expected " +
                   std::to_string(slots.size()));
    return ckpt;
}

void save_checkpoint(const std::string& path, const ModelConfig& config, const ModelParameters& params,
                     const std::string& scaler_ref) {
    write_file_atomic(path, serialize_checkpoint(config, params, scaler_ref));
}

Checkpoint load_checkpoint(const std::string& path) { return parse_checkpoint(read_file(path), path); }

}  // namespace mage
