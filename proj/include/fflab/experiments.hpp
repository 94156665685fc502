#pragma once

// Experiment registry: dispatches a parsed configuration to the module
// operations over its parameter grid and writes the CSV / JSON (and, for
// snapshots, SVG) outputs.

#include <cstdint>
#include <string>

#include "fflab/config.hpp"

namespace fflab {

struct RunOutputs {
  std::string csv_path;
  std::string json_path;
  std::string svg_path;       // snapshot runs only
  bool checks_passed = true;  // every verdict passed (vacuously true)
};

// Per-experiment key: derive(config.seed, fnv1a(experiment name)). Replica
// streams split off this key, so runs of different experiments never share
// variates even under the same master seed.
std::uint64_t experiment_seed(const ExperimentConfig& config);

// 16 hex digits of the canonical config echo; stamped into estimate CSVs.
std::string spec_hash(const ExperimentConfig& config);

// Runs one experiment. Output prefix is config.output, or the experiment
// name when empty. Throws ConfigError on an invalid config.
RunOutputs run_experiment(const ExperimentConfig& config);

}  // namespace fflab
