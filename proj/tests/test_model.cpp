#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <deque>
#include <filesystem>
#include <random>
#include <set>

#include "csv.hpp"
#include "error.hpp"
#include "model.hpp"

using namespace mage;

namespace {

Tensor random_features(std::size_t n, std::size_t d, unsigned seed) {
    Rng rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Tensor t = Tensor::zeros(n, d);
    for (double& v : t.values()) v = unif(rng);
    return t;
}

SpatialGraph random_graph(std::size_t n, unsigned seed, std::size_t k = 4, double radius = 80.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dlat(41.0, 41.5), dlon(-88.5, -88.0);
    SpatialGraph g;
    g.week = 0;
    for (std::size_t i = 0; i < n; ++i) {
        g.node_ids.push_back("n" + std::to_string(i));
        g.positions.push_back({dlat(rng), dlon(rng)});
    }
    g.labeled_mask.assign(n, true);
    g.in_neighbors = build_knn_graph(g.positions, k, radius);
    return g;
}

SpatialGraph edgeless(std::size_t n) {
    SpatialGraph g;
    g.week = 0;
    for (std::size_t i = 0; i < n; ++i) {
        g.node_ids.push_back("n" + std::to_string(i));
        g.positions.push_back({41.0 + 0.01 * static_cast<double>(i), -88.0});
    }
    g.labeled_mask.assign(n, true);
    g.in_neighbors.resize(n);
    return g;
}

// Nodes reachable from src along edge direction (u -> v when u feeds v)
// within max_hops, via breadth-first search. The receptive-field oracle.
std::set<std::size_t> bfs_reachable(const SpatialGraph& g, std::size_t src, int max_hops) {
    std::vector<std::vector<std::size_t>> out_edges(g.num_nodes());
    for (std::size_t v = 0; v < g.num_nodes(); ++v)
        for (const auto& e : g.in_neighbors[v]) out_edges[e.src].push_back(v);

    std::set<std::size_t> seen = {src};
    std::deque<std::pair<std::size_t, int>> frontier = {{src, 0}};
    while (!frontier.empty()) {
        auto [u, depth] = frontier.front();
        frontier.pop_front();
        if (depth == max_hops) continue;
        for (std::size_t v : out_edges[u]) {
            if (seen.insert(v).second) frontier.push_back({v, depth + 1});
        }
    }
    return seen;
}

ModelConfig small_config(Variant variant, int layers, int width, int input_dim, double dropout = 0.0) {
    ModelConfig cfg;
    cfg.variant = variant;
    cfg.num_layers = layers;
    cfg.width = width;
    cfg.dropout_p = dropout;
    cfg.input_dim = input_dim;
    return cfg;
}

std::vector<double> eval_logits(const ModelConfig& cfg, const ModelParameters& params, const Tensor& x,
                                const SpatialGraph& g) {
    Tape tape;
    Rng rng(0);
    return model_forward(tape, x, g, params, cfg, false, rng).logits.values();
}

}  // namespace

TEST_CASE("init_parameters is deterministic and Glorot-bounded") {
    ModelConfig cfg = small_config(Variant::GraphMage, 2, 3, 5);
    ModelParameters a = init_parameters(cfg, 42);
    ModelParameters b = init_parameters(cfg, 42);
    auto na = a.named(), nb = b.named();
    for (std::size_t i = 0; i < na.size(); ++i) CHECK(na[i].second.values() == nb[i].second.values());

    ModelParameters c = init_parameters(cfg, 43);
    bool any_diff = false;
    auto nc = c.named();
    for (std::size_t i = 0; i < na.size(); ++i) any_diff = any_diff || na[i].second.values() != nc[i].second.values();
    CHECK(any_diff);

    ModelConfig w1 = small_config(Variant::GraphMage, 1, 1, 4);
    ModelParameters p = init_parameters(w1, 7);
    const double bound = std::sqrt(6.0 / (4.0 + 1.0));
    for (double v : p.embed_w.values()) {
        CHECK(v > -bound);
        CHECK(v < bound);
    }
    for (double v : p.embed_b.values()) CHECK(v == 0.0);
}

TEST_CASE("neighbor aggregation") {
    SpatialGraph g = edgeless(3);
    g.in_neighbors[0] = {{1, 2.0}};            // one neighbor
    g.in_neighbors[2] = {{0, 1.0}, {1, 3.0}};  // two neighbors
    Tensor h = Tensor::from_rows({{1, 1}, {3, 3}, {10, 10}});

    Tape tape;
    Tensor mean = tape.mix_rows(h, aggregation_mix(g, AggregatorKind::Mean));
    CHECK(mean.values() == std::vector<double>{3, 3, 0, 0, 2, 2});  // isolated node 1 -> zeros

    Tape tape2;
    Tensor idw = tape2.mix_rows(h, aggregation_mix(g, AggregatorKind::InverseDistanceWeightedMean));
    // Node 2: weights (1/1)/(4/3) = 0.75 on node 0, (1/3)/(4/3) = 0.25 on node 1.
    CHECK(idw.at(2, 0) == doctest::Approx(0.75 * 1 + 0.25 * 3).epsilon(1e-12));
    CHECK(idw.at(0, 0) == 3.0);

    g.in_neighbors[0][0].distance_km = 0.0;
    CHECK_THROWS_AS(aggregation_mix(g, AggregatorKind::InverseDistanceWeightedMean), Error);
}

TEST_CASE("edgeless single-layer graphmage is a pure per-node MLP") {
    ModelConfig cfg = small_config(Variant::GraphMage, 1, 6, 4);
    ModelParameters params = init_parameters(cfg, 3);
    Tensor x = random_features(8, 4, 1);
    SpatialGraph g = edgeless(8);

    auto base = eval_logits(cfg, params, x, g);

    // No cross-node dependence: perturbing node 5 leaves everyone else fixed.
    Tensor x2 = x.clone();
    x2.at(5, 0) += 0.5;
    auto bumped = eval_logits(cfg, params, x2, g);
    for (std::size_t v = 0; v < 8; ++v) {
        if (v == 5)
            CHECK(base[v] != bumped[v]);
        else
            CHECK(base[v] == bumped[v]);
    }
}

TEST_CASE("graphsage equals graphmage at depth 1, diverges deeper on edges") {
    Tensor x = random_features(10, 4, 2);
    SpatialGraph g = random_graph(10, 2);

    ModelConfig mage = small_config(Variant::GraphMage, 1, 5, 4);
    ModelConfig sage = small_config(Variant::GraphSage, 1, 5, 4);
    ModelParameters params = init_parameters(mage, 11);
    CHECK(eval_logits(mage, params, x, g) == eval_logits(sage, params, x, g));

    // Edgeless at any depth: both collapse to per-node MLP stacks, but only
    // the L=1 case coincides since deeper layers see different self-inputs.
    ModelConfig mage3 = small_config(Variant::GraphMage, 3, 5, 4);
    ModelConfig sage3 = small_config(Variant::GraphSage, 3, 5, 4);
    ModelParameters params3 = init_parameters(mage3, 12);
    SpatialGraph bare = edgeless(10);
    CHECK(eval_logits(mage3, params3, x, bare) != eval_logits(sage3, params3, x, bare));
}

TEST_CASE("self-information persistence: zero aggregate equals edgeless run") {
    ModelConfig cfg = small_config(Variant::GraphMage, 3, 6, 4);
    ModelParameters params = init_parameters(cfg, 21);
    Tensor x = random_features(12, 4, 3);

    // Force all neighbor aggregates to zero by removing every edge; with the
    // h^0 concat the forward must factor into per-node MLP compositions.
    SpatialGraph connected = random_graph(12, 3);
    SpatialGraph bare = edgeless(12);

    Tape tape;
    Rng rng(0);
    ForwardResult with_edges = model_forward(tape, x, connected, params, cfg, false, rng);
    (void)with_edges;
    auto from_bare = eval_logits(cfg, params, x, bare);

    // Re-run the connected graph with aggregation short-circuited to zero
    // by zeroing h^{l-1} contributions: equivalent to a graph with no edges.
    SpatialGraph no_edges = connected;
    for (auto& row : no_edges.in_neighbors) row.clear();
    CHECK(eval_logits(cfg, params, x, no_edges) == from_bare);
}

TEST_CASE("resgcn residual path") {
    ModelConfig cfg = small_config(Variant::ResGcnOverMage, 3, 5, 5);
    ModelParameters params = init_parameters(cfg, 9);
    Tensor x = random_features(7, 5, 4);
    SpatialGraph g = random_graph(7, 5);

    // Zeroed MLPs leave only the residual chain: h^L == h^0 exactly.
    ModelParameters zeroed = params.clone();
    for (auto& layer : zeroed.layers) {
        std::fill(layer.w1.values().begin(), layer.w1.values().end(), 0.0);
        std::fill(layer.b1.values().begin(), layer.b1.values().end(), 0.0);
        std::fill(layer.w2.values().begin(), layer.w2.values().end(), 0.0);
        std::fill(layer.b2.values().begin(), layer.b2.values().end(), 0.0);
    }
    Tape tape;
    Rng rng(0);
    ForwardResult res = model_forward(tape, x, g, zeroed, cfg, false, rng);
    CHECK(res.embeddings.back().values() == res.embeddings.front().values());

    // L=1: base layer output + h^0.
    ModelConfig base_cfg = small_config(Variant::GraphMage, 1, 5, 5);
    ModelConfig res_cfg = small_config(Variant::ResGcnOverMage, 1, 5, 5);
    ModelParameters p1 = init_parameters(base_cfg, 10);
    Tape t1, t2;
    ForwardResult plain = model_forward(t1, x, g, p1, base_cfg, false, rng);
    ForwardResult with_res = model_forward(t2, x, g, p1, res_cfg, false, rng);
    for (std::size_t i = 0; i < plain.embeddings.back().size(); ++i)
        CHECK(with_res.embeddings.back().values()[i] ==
              plain.embeddings.back().values()[i] + plain.embeddings.front().values()[i]);
}

TEST_CASE("gradients flow through deep residual stacks") {
    ModelConfig cfg = small_config(Variant::ResGcnOverSage, 8, 3, 3);
    SpatialGraph g = random_graph(5, 6, 2);
    ModelParameters params = init_parameters(cfg, 31);
    Tensor labels = Tensor::from_rows({{1}, {0}, {1}, {0}, {1}});

    const double err = grad_check(
        [&](Tape& t, const Tensor& x) {
            Rng rng(0);
            ForwardResult out = model_forward(t, x, g, params, cfg, false, rng);
            return t.weighted_bce_with_logits(out.logits, labels, 1.0, 1.0);
        },
        random_features(5, 3, 7), 1e-5);
    CHECK(err < 1e-4);
}

TEST_CASE("receptive field matches BFS oracle") {
    for (unsigned seed : {1u, 2u, 3u}) {
        for (int L : {1, 2, 4}) {
            ModelConfig cfg = small_config(Variant::GraphMage, L, 4, 3);
            ModelParameters params = init_parameters(cfg, seed * 100 + static_cast<unsigned>(L));
            SpatialGraph g = random_graph(14, seed, 3, 40.0);
            Tensor x = random_features(14, 3, seed + 50);

            auto base = eval_logits(cfg, params, x, g);
            const std::size_t src = seed % 14;
            Tensor x2 = x.clone();
            x2.at(src, 1) += 0.25;
            auto bumped = eval_logits(cfg, params, x2, g);

            auto reachable = bfs_reachable(g, src, L);
            for (std::size_t v = 0; v < 14; ++v) {
                if (!reachable.count(v)) CHECK(base[v] == bumped[v]);
            }
            CHECK(base[src] != bumped[src]);
        }
    }
}

TEST_CASE("depth robustness: graphmage disperses more than graphsage at depth") {
    for (int L : {16, 32}) {
        int mage_wins = 0;
        for (unsigned seed = 1; seed <= 5; ++seed) {
            SpatialGraph g = random_graph(50, seed, 6, 500.0);
            Tensor x = random_features(50, 6, seed + 10);

            ModelConfig mage = small_config(Variant::GraphMage, L, 8, 6);
            ModelConfig sage = small_config(Variant::GraphSage, L, 8, 6);
            ModelParameters shared = init_parameters(mage, seed * 7);

            Tape tm, ts;
            Rng rng(0);
            const double dm = row_dispersion(model_forward(tm, x, g, shared, mage, false, rng).embeddings.back());
            const double ds = row_dispersion(model_forward(ts, x, g, shared, sage, false, rng).embeddings.back());
            if (dm > ds) ++mage_wins;
            if (L == 32) CHECK(dm > 1e-6);  // no collapse on the mage side
        }
        CHECK(mage_wins >= 4);
    }
}

TEST_CASE("path census") {
    SUBCASE("graphmage: one path per length 1..L") {
        for (int L : {1, 2, 4, 9, 16}) {
            auto census = count_input_output_paths(small_config(Variant::GraphMage, L, 4, 3));
            // Enumeration oracle: the skip into layer l contributes one path
            // of length L - l + 1.
            std::map<int, long long> expected;
            for (int l = 1; l <= L; ++l) expected[L - l + 1] += 1;
            CHECK(census == expected);
        }
    }

    SUBCASE("resgcn-over-sage: binomial profile via subset enumeration") {
        for (int L : {1, 2, 4, 6}) {
            auto census = count_input_output_paths(small_config(Variant::ResGcnOverSage, L, 4, 3));
            std::map<int, long long> expected;
            for (unsigned mask = 0; mask < (1u << L); ++mask) {
                int processed = 0;
                for (int b = 0; b < L; ++b)
                    if (mask & (1u << b)) ++processed;
                expected[processed] += 1;
            }
            CHECK(census == expected);
        }
        auto c4 = count_input_output_paths(small_config(Variant::ResGcnOverSage, 4, 4, 3));
        CHECK(c4 == std::map<int, long long>{{0, 1}, {1, 4}, {2, 6}, {3, 4}, {4, 1}});
    }

    SUBCASE("depth one") {
        CHECK(count_input_output_paths(small_config(Variant::GraphMage, 1, 4, 3)) ==
              std::map<int, long long>{{1, 1}});
        CHECK(count_input_output_paths(small_config(Variant::GraphSage, 1, 4, 3)) ==
              std::map<int, long long>{{1, 1}});
        CHECK(count_input_output_paths(small_config(Variant::ResGcnOverMage, 1, 4, 3)) ==
              std::map<int, long long>{{0, 1}, {1, 1}});
    }
}

TEST_CASE("node permutation equivariance") {
    ModelConfig cfg = small_config(Variant::GraphMage, 3, 5, 4);
    ModelParameters params = init_parameters(cfg, 77);
    SpatialGraph g = random_graph(9, 8, 3);
    Tensor x = random_features(9, 4, 9);
    auto base = eval_logits(cfg, params, x, g);

    // Apply a fixed permutation to nodes, features, and adjacency.
    std::vector<std::size_t> perm = {3, 1, 4, 0, 8, 2, 7, 5, 6};
    std::vector<std::size_t> inv(perm.size());
    for (std::size_t i = 0; i < perm.size(); ++i) inv[perm[i]] = i;

    SpatialGraph pg;
    pg.week = g.week;
    pg.in_neighbors.resize(g.num_nodes());
    Tensor px = Tensor::zeros(9, 4);
    for (std::size_t new_v = 0; new_v < perm.size(); ++new_v) {
        const std::size_t old_v = perm[new_v];
        pg.node_ids.push_back(g.node_ids[old_v]);
        pg.positions.push_back(g.positions[old_v]);
        pg.labeled_mask.push_back(g.labeled_mask[old_v]);
        for (const auto& e : g.in_neighbors[old_v]) pg.in_neighbors[new_v].push_back({inv[e.src], e.distance_km});
        for (std::size_t c = 0; c < 4; ++c) px.at(new_v, c) = x.at(old_v, c);
    }
    auto permuted = eval_logits(cfg, params, px, pg);
    for (std::size_t new_v = 0; new_v < perm.size(); ++new_v) CHECK(permuted[new_v] == base[perm[new_v]]);
}

TEST_CASE("checkpoint round-trip is bit-exact") {
    ModelConfig cfg = small_config(Variant::GraphMage, 2, 4, 6, 0.2);
    ModelParameters params = init_parameters(cfg, 123);
    const std::string text = serialize_checkpoint(cfg, params, "scaler.txt");
    Checkpoint back = parse_checkpoint(text, "mem");
    CHECK(serialize_checkpoint(back.config, back.params, back.scaler_ref) == text);
    CHECK(back.scaler_ref == "scaler.txt");
    CHECK(back.config.num_layers == 2);

    auto orig = params.named();
    auto loaded = back.params.named();
    for (std::size_t i = 0; i < orig.size(); ++i) CHECK(orig[i].second.values() == loaded[i].second.values());
}

TEST_CASE("checkpoint golden file stays stable") {
    const std::string golden_path = std::string(MAGE_TEST_DATA_DIR) + "/golden_checkpoint.ckpt";
    ModelConfig cfg = small_config(Variant::GraphSage, 1, 2, 3, 0.1);
    cfg.aggregator = AggregatorKind::InverseDistanceWeightedMean;
    ModelParameters params = init_parameters(cfg, 2024);
    const std::string text = serialize_checkpoint(cfg, params, "scaler_v1.txt");
    CHECK(text == read_file(golden_path));

    Checkpoint ckpt = load_checkpoint(golden_path);
    CHECK(variant_name(ckpt.config.variant) == "graphsage");
    CHECK(serialize_checkpoint(ckpt.config, ckpt.params, ckpt.scaler_ref) == text);
}
