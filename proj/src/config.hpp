#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "model.hpp"
#include "synth.hpp"
#include "train.hpp"

namespace mage {

// Complete declarative run description. Parsed from a flat key=value file
// with [section] headers; unknown keys are rejected up front, and the
// resolved config is copied into the run's output directory for provenance.
struct RunConfig {
    struct Data {
        std::string input = "data.csv";
        std::string oracle = "oracle.csv";
        std::string features = "features.csv";
        std::string scaler = "scaler.txt";
        std::string out_dir = "run";
    } data;

    SynthConfig synth;

    struct Graph {
        std::size_t k = 10;
        double radius_km = 50.0;
    } graph;

    struct Split {
        int train_end_week = 104;       // weeks <= this are the training period
        double validation_frac = 0.15;  // chronologically last slice of training weeks
        double calibration_frac = 0.2;  // chronologically first slice of test weeks
    } split;

    ModelConfig model;  // input_dim stays 0 here; it is fixed by the feature table

    struct Train {
        Regime regime = Regime::Supervised;
        std::string subset = "all";  // all | upper80 | lower80
        std::vector<int> horizons = {0};
        std::vector<std::uint64_t> seeds = {1, 2, 3};
        int epochs = 200;
        double base_lr = 1e-3;
        double min_lr = 1e-5;
        double weight_decay = 1e-4;
        double agc_lambda = 0.01;
        int patience = 20;
    } train;

    struct Evaluate {
        std::vector<std::string> subsets = {"all"};  // all | upper20 | lower20
        std::string baseline = "logistic";           // none | logistic
        std::string plot;                            // optional SVG path (under out_dir)
    } evaluate;

    struct Calibrate {
        double lambda = 0.5;
    } calibrate;

    struct Entropy {
        std::vector<std::string> subsets = {"all"};  // training subsets to report
    } entropy;

    void validate() const;
};

RunConfig parse_run_config(const std::string& text, const std::string& origin);
RunConfig load_run_config(const std::string& path);
std::string serialize_run_config(const RunConfig& config);

// Apply a `section.key=value` override on top of a parsed config.
void apply_override(RunConfig& config, const std::string& dotted_key, const std::string& value);

}  // namespace mage
