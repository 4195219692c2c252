#pragma once

#include <optional>
#include <string>
#include <vector>

#include "shockflow/errors.hpp"
#include "shockflow/hull.hpp"
#include "shockflow/legendre.hpp"
#include "shockflow/superdiff.hpp"

namespace shockflow {

/// The unique admissible velocity at a point together with its certificate.
struct AdmissibleSolution {
    Vec v_star;
    Vec p_star;
    double H_star = 0.0;
    std::vector<int> active_set;  ///< I(v*), zero-based entry indices
    std::vector<double> weights;  ///< convex weights over active_set with p* = sum w_j p_j
    double anomaly = 0.0;         ///< \hat L(v*) = min_v \hat L
    double hull_distance = 0.0;   ///< certification residual
};

enum class AdmissibleMethod {
    automatic,       ///< enclosing ball for quadratic forms, general solver otherwise
    enclosing_ball,  ///< quadratic and anisotropic models only
    general,         ///< subgradient descent + active-set polish for any model
};

struct AdmissibleOptions {
    double tie_tol = 1e-9;       ///< band defining I(v)
    double certify_tol = 1e-8;   ///< accepted hull distance
    AdmissibleMethod method = AdmissibleMethod::automatic;
    std::optional<Vec> start;    ///< subgradient starting point; centroid of v_i if unset
    int subgradient_iterations = 500;
};

/// Raised when the solver cannot certify its best iterate.
class AdmissibleFailure : public NumericalFailure {
public:
    AdmissibleFailure(const std::string& what, Vec best, double hull_distance)
        : NumericalFailure("admissible", what), best_(std::move(best)), hull_distance_(hull_distance) {}

    const Vec& best_iterate() const noexcept { return best_; }
    double hull_distance() const noexcept { return hull_distance_; }

private:
    Vec best_;
    double hull_distance_;
};

/// \hat L(v) = max_i [L(v) + H_i - p_i . v].
double lhat(const LimitMomentumSet& lms, const HamiltonianModel& model, const Vec& v);

/// I(v) = { j : -H_j + p_j . v <= min_i(-H_i + p_i . v) + tol }.
std::vector<int> active_set(const LimitMomentumSet& lms, const HamiltonianModel& model, const Vec& v,
                            double tol = 1e-9);

struct AdmissibilityVerdict {
    bool accepted = false;
    double hull_distance = 0.0;
    std::vector<int> active_set;
    std::vector<double> weights;  ///< over active_set
    Vec momentum;                 ///< p(v)
};

/// Tests whether p(v) lies in conv{p_j : j in I(v)}. A rejection is a verdict,
/// not an error; it carries the positive hull distance.
AdmissibilityVerdict check_admissibility(const LimitMomentumSet& lms, const HamiltonianModel& model,
                                         const Vec& v, double tie_tol = 1e-9,
                                         double accept_tol = 1e-8);

AdmissibleSolution admissible_velocity(const LimitMomentumSet& lms, const HamiltonianModel& model,
                                       const AdmissibleOptions& options = {});

enum class ShockClass { restraining, nonrestraining, not_a_shock };

std::string to_string(ShockClass c);

/// Restraining iff p* lies in the relative interior of conv{p_i} (boundary
/// distance above boundary_tol).
ShockClass classify_shock(const LimitMomentumSet& lms, const HamiltonianModel& model,
                          const AdmissibleSolution& solution, double boundary_tol = 1e-7);

}  // namespace shockflow
