#pragma once

#include <string>

#include "config.hpp"

namespace mage::pipeline {

// CLI subcommands. Each validates the resolved config, does its work, and
// drops the resolved config into data.out_dir for provenance. All outputs
// are deterministic functions of (config, seed).
void cmd_synth(const RunConfig& config);
void cmd_preprocess(const RunConfig& config);
void cmd_build_graph(const RunConfig& config);
void cmd_train(const RunConfig& config);
void cmd_evaluate(const RunConfig& config);
void cmd_calibrate(const RunConfig& config);
void cmd_entropy_report(const RunConfig& config);

// Dispatch by name: synth, preprocess, build-graph, train, evaluate,
// calibrate, entropy-report.
void run_command(const RunConfig& config, const std::string& command);

}  // namespace mage::pipeline
