#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "shockflow/admissible.hpp"
#include "shockflow/config.hpp"
#include "shockflow/hopf_lax.hpp"
#include "shockflow/legendre.hpp"
#include "shockflow/superdiff.hpp"

namespace shockflow {

inline constexpr const char* kVersion = "0.1.0";

struct FixtureInfo {
    std::string name;
    std::string description;
    std::string parameters;
};

std::vector<FixtureInfo> fixture_catalog();

HamiltonianModel make_model(const ExperimentConfig& config);
InitialCondition make_fixture(const ExperimentConfig& config);

/// A random shock instance: momenta with components in [-2, 2].
struct ShockInstance {
    HamiltonianModel model;
    LimitMomentumSet lms;
};

/// kind_index selects quadratic, anisotropic, power, cosh (mod 4); power
/// exponents cycle through {1.5, 2.5, 4}.
ShockInstance random_instance(std::mt19937_64& rng, int kind_index, int dim, int k);

/// Minimum of \hat L on a grid of the given step, located by nested grids
/// around the best point of each coarser level (sound because \hat L is convex).
Vec grid_minimize_lhat(const LimitMomentumSet& lms, const HamiltonianModel& model, double step);

struct RunResult {
    nlohmann::json summary;
    std::vector<std::string> outputs;
};

/// Runs the configured experiment, writing CSV artifacts and manifest.json
/// into `output.dir` (or `out_override` when non-empty).
RunResult run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_override = {});

}  // namespace shockflow
