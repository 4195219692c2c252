#include "shockflow/legendre.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "shockflow/errors.hpp"

namespace shockflow {

namespace {

void require_dim(int dim) {
    if (dim < 1 || dim > 3) throw ConfigError("hamiltonian.dim", "dimension must be 1, 2 or 3");
}

void require_dim(const HamiltonianModel& model, const Vec& x, const char* what) {
    if (x.size() != model.dim())
        throw std::invalid_argument(std::string(what) + " has wrong dimension");
}

// cosh(x) - 1 without cancellation near zero.
double cosh_m1(double x) {
    const double s = std::sinh(0.5 * x);
    return 2.0 * s * s;
}

// v asinh(v) - sqrt(1 + v^2) + 1 without cancellation near zero.
double cosh_conjugate(double v) {
    return v * std::asinh(v) - v * v / (std::sqrt(1.0 + v * v) + 1.0);
}

}  // namespace

std::string to_string(HamiltonianKind kind) {
    switch (kind) {
        case HamiltonianKind::quadratic: return "quadratic";
        case HamiltonianKind::anisotropic: return "anisotropic";
        case HamiltonianKind::power_law: return "power";
        case HamiltonianKind::cosh_sum: return "cosh";
    }
    return "unknown";
}

HamiltonianModel HamiltonianModel::quadratic(int dim) {
    require_dim(dim);
    HamiltonianModel m(HamiltonianKind::quadratic, dim);
    m.matrix_ = Mat::Identity(dim, dim);
    m.inverse_ = m.matrix_;
    return m;
}

HamiltonianModel HamiltonianModel::anisotropic(const Mat& spd) {
    const int dim = static_cast<int>(spd.rows());
    require_dim(dim);
    if (spd.cols() != dim) throw ConfigError("hamiltonian.matrix", "matrix must be square");
    if (!spd.isApprox(spd.transpose(), 1e-12))
        throw ConfigError("hamiltonian.matrix", "matrix must be symmetric");
    Eigen::LLT<Mat> llt(spd);
    if (llt.info() != Eigen::Success)
        throw ConfigError("hamiltonian.matrix", "matrix must be positive definite");
    HamiltonianModel m(HamiltonianKind::anisotropic, dim);
    m.matrix_ = spd;
    m.inverse_ = llt.solve(Mat::Identity(dim, dim));
    return m;
}

HamiltonianModel HamiltonianModel::power_law(int dim, double exponent) {
    require_dim(dim);
    if (!(exponent > 1.0) || !std::isfinite(exponent))
        throw ConfigError("hamiltonian.exponent", "exponent must be finite and > 1");
    HamiltonianModel m(HamiltonianKind::power_law, dim);
    m.exponent_ = exponent;
    return m;
}

HamiltonianModel HamiltonianModel::cosh_sum(int dim) {
    require_dim(dim);
    return HamiltonianModel(HamiltonianKind::cosh_sum, dim);
}

std::string HamiltonianModel::describe() const {
    std::ostringstream os;
    os << to_string(kind_) << "(d=" << dim_;
    if (kind_ == HamiltonianKind::power_law) os << ", a=" << exponent_;
    if (kind_ == HamiltonianKind::anisotropic) {
        os << ", A=[";
        for (int i = 0; i < matrix_.size(); ++i) os << (i ? "," : "") << matrix_.data()[i];
        os << "]";
    }
    os << ")";
    return os.str();
}

double HamiltonianModel::hamiltonian(const Vec& p) const {
    require_dim(*this, p, "momentum");
    switch (kind_) {
        case HamiltonianKind::quadratic: return 0.5 * p.squaredNorm();
        case HamiltonianKind::anisotropic: return 0.5 * p.dot(matrix_ * p);
        case HamiltonianKind::power_law: return std::pow(p.norm(), exponent_) / exponent_;
        case HamiltonianKind::cosh_sum: {
            double h = 0.0;
            for (int k = 0; k < dim_; ++k) h += cosh_m1(p[k]);
            return h;
        }
    }
    return 0.0;
}

Vec HamiltonianModel::gradient(const Vec& p) const {
    require_dim(*this, p, "momentum");
    switch (kind_) {
        case HamiltonianKind::quadratic: return p;
        case HamiltonianKind::anisotropic: return matrix_ * p;
        case HamiltonianKind::power_law: {
            const double r = p.norm();
            if (r == 0.0) return Vec::Zero(dim_);
            return std::pow(r, exponent_ - 2.0) * p;
        }
        case HamiltonianKind::cosh_sum: return p.array().sinh().matrix();
    }
    return p;
}

Mat HamiltonianModel::hessian(const Vec& p) const {
    require_dim(*this, p, "momentum");
    switch (kind_) {
        case HamiltonianKind::quadratic:
        case HamiltonianKind::anisotropic: return matrix_;
        case HamiltonianKind::power_law: {
            // |p|^(a-2) (I + (a-2) n n^T); singular or unbounded at p = 0.
            const double r = std::max(p.norm(), 1e-150);
            const Vec n = p / r;
            Mat h = Mat::Identity(dim_, dim_) + (exponent_ - 2.0) * n * n.transpose();
            return std::pow(r, exponent_ - 2.0) * h;
        }
        case HamiltonianKind::cosh_sum: return p.array().cosh().matrix().asDiagonal();
    }
    return matrix_;
}

double HamiltonianModel::lagrangian(const Vec& v) const {
    require_dim(*this, v, "velocity");
    switch (kind_) {
        case HamiltonianKind::quadratic: return 0.5 * v.squaredNorm();
        case HamiltonianKind::anisotropic: return 0.5 * v.dot(inverse_ * v);
        case HamiltonianKind::power_law: {
            const double b = exponent_ / (exponent_ - 1.0);
            return std::pow(v.norm(), b) / b;
        }
        case HamiltonianKind::cosh_sum: {
            double l = 0.0;
            for (int k = 0; k < dim_; ++k) l += cosh_conjugate(v[k]);
            return l;
        }
    }
    return 0.0;
}

Vec HamiltonianModel::lagrangian_gradient(const Vec& v) const {
    require_dim(*this, v, "velocity");
    switch (kind_) {
        case HamiltonianKind::quadratic: return v;
        case HamiltonianKind::anisotropic: return inverse_ * v;
        case HamiltonianKind::power_law: {
            const double s = v.norm();
            if (s == 0.0) return Vec::Zero(dim_);
            const double b = exponent_ / (exponent_ - 1.0);
            return std::pow(s, b - 2.0) * v;
        }
        case HamiltonianKind::cosh_sum: return v.array().asinh().matrix();
    }
    return v;
}

double HamiltonianModel::max_speed(double momentum_bound) const {
    const double P = std::max(0.0, momentum_bound);
    switch (kind_) {
        case HamiltonianKind::quadratic: return P;
        case HamiltonianKind::anisotropic: {
            Eigen::SelfAdjointEigenSolver<Mat> es(matrix_);
            return es.eigenvalues().maxCoeff() * P;
        }
        case HamiltonianKind::power_law: return std::pow(P, exponent_ - 1.0);
        // sum_k sinh(p_k)^2 under |p| <= P is maximized on a coordinate axis.
        case HamiltonianKind::cosh_sum: return std::sinh(P);
    }
    return P;
}

Vec invert_gradient_newton(const HamiltonianModel& model, const Vec& v, double tolerance,
                           int max_iterations) {
    const int d = model.dim();
    const double scale = std::max(1.0, v.norm());
    auto objective = [&](const Vec& p) { return model.hamiltonian(p) - p.dot(v); };

    Vec p = Vec::Zero(d);
    Vec g = model.gradient(p) - v;
    double f = objective(p);
    for (int it = 0; it < max_iterations; ++it) {
        const double gnorm = g.norm();
        if (gnorm <= tolerance * scale) return p;

        Mat h = model.hessian(p);
        h.diagonal().array() += 1e-14 * (1.0 + h.norm());
        Vec step = h.ldlt().solve(-g);
        if (!step.allFinite()) step = -g;

        // Backtrack by halving until either the convex objective or the
        // gradient residual decreases.
        double alpha = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 80; ++ls, alpha *= 0.5) {
            const Vec trial = p + alpha * step;
            const double ft = objective(trial);
            if (!std::isfinite(ft)) continue;
            const Vec gt = model.gradient(trial) - v;
            if (ft < f + 1e-4 * alpha * g.dot(step) || gt.norm() < (1.0 - 1e-4 * alpha) * gnorm) {
                p = trial;
                f = ft;
                g = gt;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            if (gnorm <= 1e3 * tolerance * scale) return p;
            throw NumericalFailure("legendre.invert", "Newton stagnated with residual " +
                                                          std::to_string(gnorm));
        }
    }
    if (g.norm() <= 1e3 * tolerance * scale) return p;
    throw NumericalFailure("legendre.invert", "Newton did not converge within iteration budget");
}

double LagrangianView::value(const Vec& v) const {
    if (route_ == Route::closed_form) return model_.lagrangian(v);
    const Vec p = invert_gradient_newton(model_, v, tolerance_);
    return p.dot(v) - model_.hamiltonian(p);
}

Vec LagrangianView::momentum(const Vec& v) const {
    if (route_ == Route::closed_form) return model_.lagrangian_gradient(v);
    return invert_gradient_newton(model_, v, tolerance_);
}

double lagrangian_of(const HamiltonianModel& model, const Vec& v) { return model.lagrangian(v); }

Vec velocity_of_momentum(const HamiltonianModel& model, const Vec& p) { return model.gradient(p); }

Vec momentum_of_velocity(const HamiltonianModel& model, const Vec& v) {
    return model.lagrangian_gradient(v);
}

double young_gap(const HamiltonianModel& model, const Vec& p, const Vec& v) {
    return model.lagrangian(v) + model.hamiltonian(p) - p.dot(v);
}

double bregman_divergence(const HamiltonianModel& model, const Vec& v, const Vec& w) {
    return model.lagrangian(v) - model.lagrangian(w) - model.lagrangian_gradient(w).dot(v - w);
}

}  // namespace shockflow
