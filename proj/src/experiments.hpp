#ifndef LEVYLAB_SRC_EXPERIMENTS_HPP
#define LEVYLAB_SRC_EXPERIMENTS_HPP

#include <string>

#include "config.hpp"

namespace levylab {

inline constexpr const char* kVersion = "0.1.0";

struct ExperimentOutcome {
    std::string output_dir;
    std::string summary_json;
};

// Runs the configured subcommand over every (seed, replication) job and writes
// config.resolved.ini, metadata.json and the subcommand's CSV/JSON outputs.
ExperimentOutcome run_experiment(const ExperimentConfig& config);

}  // namespace levylab

#endif
