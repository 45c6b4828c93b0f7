#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dataset.hpp"

namespace mage {

struct SynthConfig {
    std::uint64_t seed = 7;
    int n_traps = 200;
    int n_weeks = 150;
    double missing_rate = 0.2;

    void validate() const;
};

struct OracleRecord {
    std::string trap_id;
    int week;
    double p_true;  // exact Bernoulli probability behind the label
};

struct SyntheticWorld {
    RawTable table;
    std::vector<OracleRecord> oracle;
};

// Desk-scale stand-in for a trap/covariate dataset. Traps scatter uniformly
// over a Chicagoland-sized lat/lon box; the latent risk combines a seasonal
// sinusoid, smooth spatial Gaussian bumps, and covariate effects; weekly
// labels are Bernoulli draws of logistic(latent). Covariates are noisy,
// discretized views of the underlying fields, so a single trap sees the risk
// field only coarsely while a neighborhood sees it well. Fully determined by
// the seed.
SyntheticWorld generate_synthetic_world(const SynthConfig& config);

std::string serialize_oracle(const std::vector<OracleRecord>& oracle);
std::vector<OracleRecord> load_oracle(const std::string& path);

}  // namespace mage
