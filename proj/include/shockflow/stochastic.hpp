#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "shockflow/admissible.hpp"
#include "shockflow/flow.hpp"
#include "shockflow/hopf_lax.hpp"
#include "shockflow/superdiff.hpp"

namespace shockflow {

struct SdeOptions {
    double epsilon = 0.05;
    double t0 = 0.0;
    double T = 1.0;
    double dt = 1e-3;
    int n_paths = 400;
    std::uint64_t rng_seed = 1;
    std::size_t stored_paths = 16;  ///< leading paths kept in full for output
    SuperdiffOptions superdiff;
};

/// Euler-Maruyama ensemble of dX = grad H(grad phi(t, X)) dt + eps dW.
struct SdeEnsemble {
    double epsilon = 0.0;
    std::uint64_t rng_seed = 0;
    int n_paths = 0;
    double dt = 0.0;
    Vec seed_point;
    std::vector<Vec> reference_momenta;     ///< branch momenta met near the seed, used for labels
    std::vector<ParticleTrajectory> paths;  ///< first stored_paths paths
    std::vector<Vec> final_positions;       ///< all paths
    std::vector<double> occupancy;          ///< time share per branch, sums to 1
    std::vector<double> occupancy_stderr;
    Vec mean_velocity;  ///< (X_T - X_t0) / (T - t0), averaged over paths
    Vec mean_velocity_stderr;
};

SdeEnsemble simulate_sde(const InitialCondition& ic, const HamiltonianModel& model, const Vec& seed_point,
                         const SdeOptions& options = {});

/// v = sum_{j in S} pi_j v_j with pi >= 0, sum pi = 1 and I(v) = S.
struct SelfConsistentSolution {
    Vec v_dagger;
    std::vector<int> active_set;
    std::vector<double> shares;  ///< aligned with active_set
};

/// All self-consistent velocities, by enumeration of branch subsets.
std::vector<SelfConsistentSolution> self_consistent_velocity(const LimitMomentumSet& lms,
                                                             const HamiltonianModel& model,
                                                             double tol = 1e-9);

struct CandidateVerdict {
    SelfConsistentSolution candidate;
    double distance = 0.0;  ///< |v_dagger - v*|
    bool coincide = false;
    bool sde_consistent = false;  ///< SDE mean velocity within 3 standard errors of v_dagger
};

struct RegularizationReport {
    AdmissibleSolution admissible;
    std::vector<CandidateVerdict> candidates;
    double tolerance = 0.0;
    std::optional<SdeEnsemble> sde;
    bool sde_consistent_with_admissible = false;  ///< mean velocity within 3 standard errors of v*
    std::string summary() const;
};

RegularizationReport compare_regularizations(const LimitMomentumSet& lms, const HamiltonianModel& model,
                                             const SdeEnsemble* sde = nullptr, double tol = 1e-8);

}  // namespace shockflow
