#pragma once

#include <stdexcept>
#include <string>

namespace archemb {

// Exit-code contract for the CLI: 2 config, 3 numeric, 4 missing artifact.

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

struct MissingArtifactError : std::runtime_error {
    explicit MissingArtifactError(const std::string& path)
        : std::runtime_error("missing artifact: " + path) {}
};

// Thrown when an architecture's Jacobian collapses to zero (sigma_1 = 0);
// view precomputation catches this and records the genotype as degenerate.
struct DegenerateArchitectureError : NumericError {
    explicit DegenerateArchitectureError(const std::string& msg) : NumericError(msg) {}
};

struct TrainDivergenceError : NumericError {
    int epoch;
    TrainDivergenceError(const std::string& msg, int epoch_index)
        : NumericError(msg), epoch(epoch_index) {}
};

}  // namespace archemb
