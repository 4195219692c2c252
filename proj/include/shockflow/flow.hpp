#pragma once

#include <optional>
#include <vector>

#include "shockflow/admissible.hpp"
#include "shockflow/hopf_lax.hpp"
#include "shockflow/superdiff.hpp"

namespace shockflow {

/// One fiber of the coalescing flow, sampled on a uniform time grid.
struct ParticleTrajectory {
    int id = 0;
    Vec seed;
    std::vector<double> times;
    std::vector<Vec> positions;
    std::vector<char> on_shock;
    std::optional<double> shock_entry;
    std::optional<int> merged_into;   ///< lowest id of the merge class, if merged
    std::optional<double> merge_time;
};

struct FlowOptions {
    SuperdiffOptions superdiff;
    AdmissibleOptions admissible;
    bool shock_snap = true;
    double merge_tol = -1.0;  ///< < 0 means 2 * dt * V_max
};

/// Bound on particle speeds implied by the fixture's Lipschitz constant.
double flow_speed_bound(const InitialCondition& ic, const HamiltonianModel& model);

/// Admissible velocity v*(t, x); grad H(grad phi) at smooth points.
Vec forward_velocity(const InitialCondition& ic, const HamiltonianModel& model, double t, const Vec& x,
                     const FlowOptions& options = {});

/// Forward Euler on v* with shock snapping. Seeds are integrated
/// independently; merge links are set by a detect_coalescence post-pass.
std::vector<ParticleTrajectory> integrate_flow(const InitialCondition& ic, const HamiltonianModel& model,
                                               const std::vector<Vec>& seeds, double T, double dt,
                                               const FlowOptions& options = {});

struct CoalescencePartition {
    std::vector<std::vector<int>> classes;  ///< trajectory indices, each class sorted
};

/// Groups trajectories that stay within merge_tol of each other from some
/// sample on, and sets merged_into / merge_time for non-root members.
CoalescencePartition detect_coalescence(std::vector<ParticleTrajectory>& trajectories, double merge_tol);

/// Merge classes as seen from sample index `sample`: pairs that agree within
/// tol at every sample from `sample` on.
std::vector<std::vector<int>> coalescence_classes_at(const std::vector<ParticleTrajectory>& trajectories,
                                                     double tol, std::size_t sample);

}  // namespace shockflow
