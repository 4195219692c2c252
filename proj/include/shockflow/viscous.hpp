#pragma once

#include <cstddef>
#include <vector>

#include "shockflow/flow.hpp"
#include "shockflow/hopf_lax.hpp"
#include "shockflow/legendre.hpp"
#include "shockflow/superdiff.hpp"

namespace shockflow {

/// Snapshot of phi^mu on the periodic grid over [-pi, pi)^d.
///
/// phi = psi + slope . x with psi periodic; gradients and Laplacians are
/// therefore periodic even for data with a background tilt. Nodes are stored
/// row-major with the last axis fastest; node i on an axis sits at -pi + i h.
struct GridField {
    int dim = 1;
    int n = 0;
    double h = 0.0;
    double t = 0.0;
    double mu = 0.0;
    Vec slope;
    std::vector<double> psi;
    std::vector<double> rate;  ///< forward difference (phi^{n+1} - phi^n) / dt

    std::size_t size() const noexcept { return psi.size(); }
    double node_coord(int i) const noexcept;
    Vec node_position(std::size_t flat) const;
    double node_value(std::size_t flat) const;

    /// Multilinear interpolation of phi, the centered gradient, the discrete
    /// Laplacian and the time rate at an arbitrary (wrapped) point.
    double value(const Vec& x) const;
    Vec gradient(const Vec& x) const;
    double laplacian(const Vec& x) const;
    double time_rate(const Vec& x) const;
};

struct ViscousOptions {
    double dt = 0.0;        ///< 0 picks the stability bound
    double frame_dt = 0.0;  ///< spacing of stored frames; 0 picks T / 1000 (1D) or T / 50 (2D)
};

struct ViscousSeries {
    double mu = 0.0;
    double dt = 0.0;
    std::size_t steps = 0;
    std::vector<GridField> frames;  ///< increasing times, first at t = 0, last at T

    double t_end() const { return frames.back().t; }
    /// Bracketing frames and blend weight for time t; flags times past the last frame.
    void locate(double t, std::size_t& k, double& w, bool& extrapolated) const;
    Vec gradient(double t, const Vec& x, bool* extrapolated = nullptr) const;
    double value(double t, const Vec& x) const;
};

/// Largest stable explicit step 0.25 * min(h^2 / (2 d mu), h / V_max).
double viscous_stability_bound(const InitialCondition& ic, const HamiltonianModel& model, double mu, int n);

/// Explicit scheme for phi_t + H(grad phi) = mu Lap phi: centered Laplacian and
/// a local Lax-Friedrichs numerical Hamiltonian whose extra dissipation is
/// reduced by what the physical viscosity already supplies.
ViscousSeries solve_viscous(const InitialCondition& ic, const HamiltonianModel& model, double mu, double T,
                            int n, const ViscousOptions& options = {});

struct RegularizedPath {
    ParticleTrajectory trajectory;
    bool extrapolated = false;  ///< some step used the last frame past its time
};

/// Euler steps of gamma' = grad H(grad phi^mu(t, gamma)), positions wrapped to the box.
RegularizedPath integrate_regularized_flow(const ViscousSeries& series, const HamiltonianModel& model,
                                           const Vec& seed, double dt, double T = -1.0);

struct AnomalySeries {
    std::vector<double> times;
    std::vector<double> viscous_term;  ///< mu * Lap phi^mu
    std::vector<double> residual;      ///< phi_t + H(grad phi^mu)
};

/// Dissipative term sampled along the trajectory samples that lie inside the series span.
AnomalySeries anomaly_along(const ViscousSeries& series, const HamiltonianModel& model,
                            const ParticleTrajectory& trajectory);

/// Mean of the series over times >= t_from.
double plateau(const std::vector<double>& times, const std::vector<double>& values, double t_from);

/// Distance from grad phi^mu(lms.t, lms.x) to the momentum hull of lms, one entry per series.
std::vector<double> gradient_limit_check(const std::vector<ViscousSeries>& ladder, const LimitMomentumSet& lms);

}  // namespace shockflow
