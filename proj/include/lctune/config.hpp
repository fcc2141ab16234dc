#pragma once

#include "lctune/antenna.hpp"
#include "lctune/cell.hpp"
#include "lctune/landau.hpp"
#include "lctune/material.hpp"
#include "lctune/profile.hpp"
#include "lctune/relax.hpp"

#include <string>
#include <vector>

namespace lctune {

struct SweepConfig {
    double start = 0.0;  // V
    double stop = 3.0;   // V
    int count = 61;
    bool warm_start = true;
    std::vector<double> profile_voltages{1.0};  // director profiles written for these
    std::vector<double> voltages() const;
};

struct OpticsConfig {
    double voltage = 1.0;  // V
    OpticsOptions options{};
    double spectrum_start = 400e-9;
    double spectrum_stop = 700e-9;
    int spectrum_count = 61;
};

struct AntennaConfig {
    double eps_low = 8.0;
    double f_low = 4.15e9;
    double eps_high = 47.1;
    double f_high = 3.09e9;
    double q_factor = kDefaultQFactor;
    double c_p = 0.8e-12;
    double z0 = 50.0;
    double band_low = 3.3e9;
    double band_high = 3.8e9;
    double s11_eps = 20.0;
    double s11_start = 3.0e9;
    double s11_stop = 4.5e9;
    int s11_count = 3001;
    TuningModel model() const;
};

struct SpiralConfig {
    SpiralParams params{};
    int samples_per_turn = 64;
};

struct RunConfig {
    LCMaterial material;      // resolved from the table plus inline overrides
    ModelOptions model{};
    CellStack cell{};
    SweepConfig sweep{};
    SolverOptions solver{};
    PermittivityAverage average = PermittivityAverage::volume;
    OpticsConfig optics{};
    AntennaConfig antenna{};
    SpiralConfig spiral{};
    std::string output_dir = "out";
};

// Default configuration: RDP-84909 and the default cell.
RunConfig default_config();

// Parses INI text (sections and key = value lines). Unknown keys, malformed
// numbers and invalid values raise ConfigError.
RunConfig parse_config(const std::string& text, const MaterialTable& table);
RunConfig load_config(const std::string& path, const MaterialTable& table);

// Canonical INI text holding every field; parse_config(serialize_config(c))
// serialises to the same text.
std::string serialize_config(const RunConfig& config);

// Hex SHA-256 of the canonical text with the output directory left out, so
// the same run written to two places carries the same hash.
std::string config_hash(const RunConfig& config);

// Checks the cross-field invariants; throws ConfigError.
void validate_config(const RunConfig& config);

std::string to_string(QuarticConvention c);
std::string to_string(ElasticRule r);
std::string to_string(PermittivityAverage a);

}  // namespace lctune
