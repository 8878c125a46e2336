#pragma once

#include "frontcont/continuation.hpp"

#include <json.hpp>

#include <memory>
#include <optional>
#include <string>

namespace frontcont {

struct GridConfig {
    std::optional<double> L;  ///< derived from the seed decay rate when absent
    int nx = 401;
    int ny = 41;
};

struct RobinConfig {
    std::string family = "quartic";
    double a = 1.0;
    double lambda_seed = 0.1;
    double lambda_seed_max = 0.15;
};

struct BoreConfig {
    double rho1 = 1.0;
    double rho2 = 0.25;
    double eps_seed = 0.02;
    double eps_seed_max = 0.05;
    double delta = 1e-3;
};

struct OutputConfig {
    std::string directory = "out";
    int snapshot_stride = 10;  ///< 0 disables snapshots
    int precision = 17;
};

struct RunConfig {
    std::string problem = "robin";
    GridConfig grid;
    RobinConfig robin;
    BoreConfig bore;
    ContinuationConfig continuation;
    OutputConfig output;
};

/// Parses and validates; unknown keys and wrong types raise ConfigError with the key path.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

/// Full echo including defaults; parse_config(to_json(c)) reproduces c.
nlohmann::json to_json(const RunConfig& c);

/// Half-length giving a seed tail below 1e-8 at the truncation boundary.
double auto_half_length(const RunConfig& c);

/// Resolves L (when absent) and builds the grid for the configured problem.
Grid make_grid(RunConfig& c);
std::unique_ptr<FrontProblem> make_problem(RunConfig& c);
RobinNonlinearity make_nonlinearity(const RobinConfig& c);

}  // namespace frontcont
