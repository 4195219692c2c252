#pragma once

#include <string>

#include <Eigen/Core>

namespace shockflow {

/// Small dense vectors (dimension 1-3) without heap allocation.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 3, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 3, 3>;

enum class HamiltonianKind { quadratic, anisotropic, power_law, cosh_sum };

std::string to_string(HamiltonianKind kind);

/// Strictly convex, superlinear Hamiltonian H(p) that does not depend on (t, x).
///
/// Four families are provided:
///   quadratic     |p|^2 / 2
///   anisotropic   p^T A p / 2 with A symmetric positive definite
///   power_law     |p|^a / a with a > 1 (Euclidean norm)
///   cosh_sum      sum_k (cosh p_k - 1)
///
/// Every family has closed forms for H, grad H, the Lagrangian L and its
/// gradient, so the momentum/velocity maps are exact to rounding.
class HamiltonianModel {
public:
    static HamiltonianModel quadratic(int dim);
    static HamiltonianModel anisotropic(const Mat& spd);
    static HamiltonianModel power_law(int dim, double exponent);
    static HamiltonianModel cosh_sum(int dim);

    HamiltonianKind kind() const noexcept { return kind_; }
    int dim() const noexcept { return dim_; }
    double exponent() const noexcept { return exponent_; }
    const Mat& matrix() const noexcept { return matrix_; }
    std::string describe() const;

    /// True when L is a quadratic form, i.e. Bregman divergences are squared
    /// distances in a fixed metric.
    bool is_quadratic_form() const noexcept {
        return kind_ == HamiltonianKind::quadratic || kind_ == HamiltonianKind::anisotropic;
    }

    double hamiltonian(const Vec& p) const;
    Vec gradient(const Vec& p) const;
    Mat hessian(const Vec& p) const;

    double lagrangian(const Vec& v) const;
    /// grad L(v), the momentum Legendre-paired with v.
    Vec lagrangian_gradient(const Vec& v) const;

    /// sup |grad H(p)| over |p| <= momentum_bound.
    double max_speed(double momentum_bound) const;

private:
    HamiltonianModel(HamiltonianKind kind, int dim) : kind_(kind), dim_(dim) {}

    HamiltonianKind kind_;
    int dim_;
    double exponent_ = 2.0;
    Mat matrix_;
    Mat inverse_;
};

/// Lagrangian evaluated either through the closed forms or by numerically
/// maximizing p.v - H(p) (damped Newton with bisection-style backtracking).
/// The numeric route exists as an independent cross-check of the closed forms.
class LagrangianView {
public:
    enum class Route { closed_form, numeric };

    explicit LagrangianView(const HamiltonianModel& model, Route route = Route::closed_form,
                            double tolerance = 1e-12)
        : model_(model), route_(route), tolerance_(tolerance) {}

    double value(const Vec& v) const;
    Vec momentum(const Vec& v) const;

private:
    const HamiltonianModel& model_;
    Route route_;
    double tolerance_;
};

/// Solves grad H(p) = v by safeguarded Newton on the strictly convex
/// function H(p) - p.v. Throws NumericalFailure on stagnation.
Vec invert_gradient_newton(const HamiltonianModel& model, const Vec& v, double tolerance = 1e-12,
                           int max_iterations = 200);

double lagrangian_of(const HamiltonianModel& model, const Vec& v);
Vec velocity_of_momentum(const HamiltonianModel& model, const Vec& p);
Vec momentum_of_velocity(const HamiltonianModel& model, const Vec& v);

/// L(v) + H(p) - p.v, nonnegative by the Young inequality.
double young_gap(const HamiltonianModel& model, const Vec& p, const Vec& v);

/// L(v) - L(w) - grad L(w).(v - w).
double bregman_divergence(const HamiltonianModel& model, const Vec& v, const Vec& w);

}  // namespace shockflow
