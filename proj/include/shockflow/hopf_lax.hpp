#pragma once

#include <optional>
#include <string>
#include <vector>

#include "shockflow/legendre.hpp"

namespace shockflow {

enum class IcForm { zero, constant, linear, neg_abs, neg_power, cosine, min_affine, sampled };

/// Initial datum phi_0 for the Cauchy problem.
///
/// The catalog forms act on the first coordinate where that makes sense, so a
/// d-dimensional `neg_abs` is the planar sheet -|y_1| + drift * y_1. `min_affine`
/// is the concave piecewise-linear datum min_i (p_i . y + c_i), which produces
/// shocks with prescribed limit momenta. `sampled` is a table on a box,
/// multilinearly interpolated and clamped outside the box.
class InitialCondition {
public:
    static InitialCondition zero(int dim);
    static InitialCondition constant(int dim, double value);
    static InitialCondition linear(const Vec& slope);
    static InitialCondition neg_abs(int dim, double drift = 0.0);
    static InitialCondition neg_power(int dim);
    static InitialCondition cosine(int dim, double amplitude);
    static InitialCondition min_affine(std::vector<Vec> slopes, std::vector<double> offsets);
    static InitialCondition sampled(const Vec& lower, const Vec& upper, std::vector<int> counts,
                                    std::vector<double> values);

    IcForm form() const noexcept { return form_; }
    int dim() const noexcept { return dim_; }
    std::string name() const;

    double operator()(const Vec& y) const;
    /// Gradient where phi_0 is differentiable; nullopt at kinks and for tables.
    std::optional<Vec> gradient(const Vec& y) const;
    /// Upper bound on the Lipschitz constant over the evaluation region.
    double lipschitz() const noexcept { return lipschitz_; }

    /// Affine families (zero, constant, linear, min_affine) admit an exact
    /// Hopf-Lax evaluation.
    bool is_affine_family() const noexcept;
    const std::vector<Vec>& affine_slopes() const noexcept { return slopes_; }
    const std::vector<double>& affine_offsets() const noexcept { return offsets_; }

    /// Decomposition phi_0 = periodic_part + background_slope . x on [-pi, pi]^d
    /// used by the grid solvers.
    bool periodizable() const noexcept;
    Vec background_slope() const;
    double periodic_part(const Vec& x) const;

private:
    InitialCondition(IcForm form, int dim) : form_(form), dim_(dim) {}

    IcForm form_;
    int dim_;
    double scalar_ = 0.0;  // constant value, drift, or amplitude
    double lipschitz_ = 0.0;
    std::vector<Vec> slopes_;
    std::vector<double> offsets_;
    // sampled table
    Vec lower_, upper_;
    std::vector<int> counts_;
    std::vector<double> values_;
};

struct HopfLaxOptions {
    int scan_points = 0;            ///< per axis; 0 picks a dimension-dependent default
    double value_rel_tol = 1e-7;    ///< minimizers within value_rel_tol * (1 + |phi|) of the minimum
    double cluster_tol = -1.0;      ///< preimage separation; < 0 means 1e-4 * search box width
    double speed_margin = 0.25;     ///< search radius is t * V_max * (1 + speed_margin)
};

/// phi(t, x) with one representative preimage per minimizing basin.
struct ValueResult {
    double t = 0.0;
    Vec x;
    double value = 0.0;
    std::vector<Vec> minimizers;   ///< preimages y_i, best first
    std::vector<Vec> velocities;   ///< (x - y_i) / t
    std::vector<double> objective; ///< objective value at each y_i
    double search_radius = 0.0;    ///< in preimage space
};

ValueResult solve_value(const InitialCondition& ic, const HamiltonianModel& model, double t,
                        const Vec& x, const HopfLaxOptions& options = {});

std::vector<Vec> minimizer_set(const InitialCondition& ic, const HamiltonianModel& model, double t,
                               const Vec& x, double cluster_tol);

/// phi(t, x); returns phi_0(x) at t == 0.
double evaluate_phi(const InitialCondition& ic, const HamiltonianModel& model, double t,
                    const Vec& x, const HopfLaxOptions& options = {});

/// phi(t1, gamma(t1)) + int L(gamma') ds - phi(t2, gamma(t2)) for a sampled curve.
/// Velocities are taken segment-wise, so the integral is exact for piecewise
/// linear curves. Nonnegative up to solver tolerance.
double action_inequality_check(const InitialCondition& ic, const HamiltonianModel& model,
                               const std::vector<double>& times, const std::vector<Vec>& curve,
                               const HopfLaxOptions& options = {});

}  // namespace shockflow
