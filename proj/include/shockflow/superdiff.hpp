#pragma once

#include <cstddef>
#include <vector>

#include "shockflow/hopf_lax.hpp"
#include "shockflow/legendre.hpp"

namespace shockflow {

/// One smooth branch meeting at a point: its momentum p_i = grad phi_i,
/// energy H_i = H(p_i) and velocity v_i = grad H(p_i).
struct LimitEntry {
    Vec momentum;
    double energy = 0.0;
    Vec velocity;
    Vec preimage;  ///< starting point of the branch minimizer (empty when unknown)
};

/// Limit momenta at (t, x): the vertices of the p-projection of the
/// superdifferential. Entries are pairwise separated in momentum space.
struct LimitMomentumSet {
    double t = 0.0;
    Vec x;
    std::vector<LimitEntry> entries;

    std::size_t k() const noexcept { return entries.size(); }
    int dim() const noexcept { return entries.empty() ? 0 : static_cast<int>(entries[0].momentum.size()); }
};

struct SuperdiffOptions {
    double momentum_cluster_tol = 1e-3;
    HopfLaxOptions hopf_lax;
};

LimitMomentumSet limit_data(const InitialCondition& ic, const HamiltonianModel& model, double t,
                            const Vec& x, const SuperdiffOptions& options = {});

/// Builds shock data directly from branch momenta (energies and velocities from
/// the model). Used for synthetic instances that have no underlying fixture.
LimitMomentumSet limit_set_from_momenta(const HamiltonianModel& model, const std::vector<Vec>& momenta);

bool is_shock(const LimitMomentumSet& lms) noexcept;

/// Vertex (-H_i, p_i) of the superdifferential polytope.
struct SuperVertex {
    double neg_energy = 0.0;
    Vec momentum;
};

std::vector<SuperVertex> superdifferential_vertices(const LimitMomentumSet& lms);

}  // namespace shockflow
