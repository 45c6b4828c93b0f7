#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "calibration.hpp"
#include "error.hpp"
#include "metrics.hpp"

using namespace mage;

namespace {

// Exhaustive monotone least squares on distinct-score points: try every
// consecutive-block partition, keep nondecreasing block means, min SSE.
std::vector<double> oracle_monotone_fit(const std::vector<int>& labels) {
    const std::size_t n = labels.size();
    std::vector<double> best;
    double best_sse = 1e300;
    for (unsigned mask = 0; mask < (1u << (n - 1)); ++mask) {
        std::vector<double> fit(n);
        double prev_mean = -1.0;
        bool monotone = true;
        std::size_t start = 0;
        double sse = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const bool boundary = i + 1 == n || (mask & (1u << i));
            if (!boundary) continue;
            double sum = 0.0;
            for (std::size_t j = start; j <= i; ++j) sum += labels[j];
            const double mean = sum / static_cast<double>(i - start + 1);
            if (mean < prev_mean) {
                monotone = false;
                break;
            }
            for (std::size_t j = start; j <= i; ++j) {
                fit[j] = mean;
                sse += (mean - labels[j]) * (mean - labels[j]);
            }
            prev_mean = mean;
            start = i + 1;
        }
        if (monotone && sse < best_sse) {
            best_sse = sse;
            best = fit;
        }
    }
    return best;
}

}  // namespace

TEST_CASE("pava pins") {
    // No violations: the fit reproduces the labels.
    IsotonicModel m = fit_isotonic({0.1, 0.2, 0.3}, {0, 1, 1});
    CHECK(m.fitted_values == std::vector<double>{0, 1, 1});

    // Single violation pools the first two points.
    m = fit_isotonic({0.1, 0.2, 0.3}, {1, 0, 1});
    CHECK(m.fitted_values == std::vector<double>{0.5, 0.5, 1.0});
    CHECK(m.breakpoints == std::vector<double>{0.1, 0.2, 0.3});

    CHECK_THROWS_AS(fit_isotonic({0.1}, {1}), Error);
    CHECK_THROWS_AS(fit_isotonic({0.1, 0.2}, {1, 1}), Error);  // single class
    CHECK_THROWS_AS(fit_isotonic({0.1, 0.2}, {0, 2}), Error);
}

TEST_CASE("pava pools exact score ties before fitting") {
    IsotonicModel m = fit_isotonic({0.4, 0.4, 0.4, 0.7}, {1, 0, 0, 1});
    CHECK(m.breakpoints == std::vector<double>{0.4, 0.7});
    CHECK(m.fitted_values == std::vector<double>{1.0 / 3.0, 1.0});

    // All-tied scores collapse to one constant breakpoint.
    m = fit_isotonic({0.5, 0.5, 0.5, 0.5}, {0, 1, 1, 0});
    CHECK(m.breakpoints.size() == 1);
    CHECK(m.fitted_values == std::vector<double>{0.5});
    CHECK(m.evaluate(0.01) == 0.5);
    CHECK(m.evaluate(0.99) == 0.5);
}

TEST_CASE("pava equals exhaustive monotone least squares on <= 8 points") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 2 + trial % 7;  // 2..8 points
        std::vector<double> scores;
        std::vector<int> labels;
        bool has0 = false, has1 = false;
        for (std::size_t i = 0; i < n; ++i) {
            scores.push_back(0.1 * static_cast<double>(i) + 0.05);  // distinct, increasing
            labels.push_back(static_cast<int>(rng() % 2));
            (labels.back() ? has1 : has0) = true;
        }
        if (!has0 || !has1) continue;
        IsotonicModel m = fit_isotonic(scores, labels);
        CHECK(m.fitted_values == oracle_monotone_fit(labels));
    }
}

TEST_CASE("fitted values are nondecreasing on random inputs") {
    std::mt19937_64 rng(2025);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 10 + static_cast<std::size_t>(rng() % 191);  // up to 200
        std::vector<double> scores;
        std::vector<int> labels;
        bool has0 = false, has1 = false;
        for (std::size_t i = 0; i < n; ++i) {
            scores.push_back(std::round(unif(rng) * 50.0) / 50.0);  // some ties
            labels.push_back(static_cast<int>(rng() % 2));
            (labels.back() ? has1 : has0) = true;
        }
        if (!has0 || !has1) continue;
        IsotonicModel m = fit_isotonic(scores, labels);
        for (std::size_t i = 1; i < m.fitted_values.size(); ++i)
            CHECK(m.fitted_values[i - 1] <= m.fitted_values[i]);
        for (std::size_t i = 1; i < m.breakpoints.size(); ++i)
            CHECK(m.breakpoints[i - 1] < m.breakpoints[i]);
        for (double v : m.fitted_values) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("isotonic evaluation interpolates and clamps") {
    IsotonicModel m;
    m.breakpoints = {0.2, 0.6};
    m.fitted_values = {0.1, 0.9};
    CHECK(m.evaluate(0.0) == 0.1);
    CHECK(m.evaluate(0.2) == 0.1);
    CHECK(m.evaluate(0.4) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(m.evaluate(0.6) == 0.9);
    CHECK(m.evaluate(1.0) == 0.9);
}

TEST_CASE("calibrate blends raw and isotonic outputs") {
    CalibratedPredictor pred;
    pred.isotonic.breakpoints = {0.0, 1.0};
    pred.isotonic.fitted_values = {0.25, 0.75};

    pred.lambda = 1.0;
    for (double raw : {0.0, 0.123456789, 0.5, 1.0}) CHECK(calibrate(raw, pred) == raw);

    pred.lambda = 0.0;
    for (double raw : {0.0, 0.3, 0.9}) CHECK(calibrate(raw, pred) == pred.isotonic.evaluate(raw));

    // lambda 0.5, raw 0.4, isotonic 0.6 -> 0.5.
    CalibratedPredictor half;
    half.lambda = 0.5;
    half.isotonic.breakpoints = {0.4};
    half.isotonic.fitted_values = {0.6};
    CHECK(calibrate(0.4, half) == doctest::Approx(0.5).epsilon(1e-15));

    CHECK_THROWS_AS(calibrate(1.5, pred), Error);

    // Monotone nondecreasing in raw for a fixed predictor.
    pred.lambda = 0.3;
    double prev = -1.0;
    for (double raw = 0.0; raw <= 1.0; raw += 0.01) {
        const double out = calibrate(raw, pred);
        CHECK(out >= prev);
        prev = out;
    }
}

TEST_CASE("node entropy") {
    CHECK(node_entropy(std::vector<double>(8, 0.5)) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(node_entropy({0.0, 1.0, 1.0, 0.0}) == 0.0);
    CHECK(node_entropy({0.9, 0.1}) == doctest::Approx(0.3250829733914482).epsilon(1e-15));

    // Maximized at one half, symmetric under p -> 1-p.
    for (double p : {0.05, 0.2, 0.35, 0.49}) {
        CHECK(node_entropy({p}) == doctest::Approx(node_entropy({1.0 - p})).epsilon(1e-12));
        CHECK(node_entropy({p}) < node_entropy({0.5}));
    }
    CHECK_THROWS_AS(node_entropy({}), Error);
    CHECK_THROWS_AS(node_entropy({1.7}), Error);
}

TEST_CASE("entropy grouping") {
    EntropyGroups groups;
    groups.group_names = {"canopy_low", "lc_forest", "lc_wetland"};
    groups.node_indicators = {
        {1, 1, 1},  // node 0 sits in all three groups
        {0, 1, 0},
        {0, 0, 0},
    };
    std::vector<std::pair<std::string, std::vector<double>>> subsets = {
        {"all", {0.2, 0.4, 0.6}},
        {"upper80", {0.3, 0.5, 0.7}},
    };
    auto rows = entropy_by_group(groups, subsets);

    auto find = [&](const std::string& g, const std::string& s) -> const EntropyGroupRow* {
        for (const auto& row : rows)
            if (row.group == g && row.subset == s) return &row;
        return nullptr;
    };

    REQUIRE(find("canopy_low", "all") != nullptr);
    CHECK(find("canopy_low", "all")->mean_entropy == 0.2);
    CHECK(find("canopy_low", "all")->node_count == 1);

    // Node 0 contributes to both lc groups; lc_forest averages nodes 0 and 1.
    CHECK(find("lc_forest", "all")->mean_entropy == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(find("lc_forest", "all")->node_count == 2);
    CHECK(find("lc_wetland", "upper80")->mean_entropy == 0.3);

    // No node has zero indicators everywhere... node 2 belongs nowhere, and
    // a group with no members must be absent rather than reported as zero.
    EntropyGroups empty_group;
    empty_group.group_names = {"lc_desert"};
    empty_group.node_indicators = {{0}, {0}};
    CHECK(entropy_by_group(empty_group, {{"all", {0.1, 0.2}}}).empty());

    const std::string csv = serialize_entropy_report(rows);
    CHECK(csv.rfind("group,subset,mean_entropy,node_count\n", 0) == 0);
    CHECK(csv.find("lc_forest,all,0.3") != std::string::npos);
    CHECK(csv.find("lc_wetland,upper80,0.3,1") != std::string::npos);
}

TEST_CASE("isotonic fit never hurts brier on the calibration split") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (unsigned seed = 1; seed <= 10; ++seed) {
        rng.seed(seed);
        std::vector<double> scores;
        std::vector<int> labels;
        bool has0 = false, has1 = false;
        for (int i = 0; i < 80; ++i) {
            const double s = unif(rng);
            scores.push_back(s);
            // Miscalibrated truth: outcomes follow s^2, not s.
            labels.push_back(unif(rng) < s * s ? 1 : 0);
            (labels.back() ? has1 : has0) = true;
        }
        if (!has0 || !has1) continue;

        IsotonicModel iso = fit_isotonic(scores, labels);
        CalibratedPredictor pred{0.0, iso};
        std::vector<double> calibrated;
        for (double s : scores) calibrated.push_back(calibrate(s, pred));
        CHECK(brier(calibrated, labels) <= brier(scores, labels));
    }
}
