#pragma once

// Helpers and brute-force oracles shared by the unit tests. The oracles avoid
// the library's solvers on purpose: they scan grids or enumerate cases.

#include <algorithm>
#include <cmath>
#include <functional>
#include <initializer_list>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "shockflow/admissible.hpp"
#include "shockflow/legendre.hpp"
#include "shockflow/superdiff.hpp"

namespace sft {

using shockflow::HamiltonianModel;
using shockflow::Vec;

inline Vec vec(std::initializer_list<double> xs) {
    Vec v(static_cast<Eigen::Index>(xs.size()));
    int i = 0;
    for (double x : xs) v(i++) = x;
    return v;
}

inline Vec random_vec(std::mt19937_64& rng, int dim, double radius) {
    std::uniform_real_distribution<double> u(-radius, radius);
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v(i) = u(rng);
    return v;
}

inline std::vector<HamiltonianModel> all_models(int dim) {
    Eigen::MatrixXd A(dim, dim);
    A.setIdentity();
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) A(i, j) += (i == j ? 0.5 * i : 0.3);
    return {HamiltonianModel::quadratic(dim), HamiltonianModel::anisotropic(A),
            HamiltonianModel::power_law(dim, 4.0), HamiltonianModel::power_law(dim, 1.5),
            HamiltonianModel::cosh_sum(dim)};
}

/// Maximum of a concave 1D function: grid scan, then golden-section refinement
/// around the best grid node.
inline double maximize_concave_1d(const std::function<double(double)>& f, double lo, double hi, int n = 20001) {
    double best = -std::numeric_limits<double>::infinity();
    double arg = lo;
    const double step = (hi - lo) / (n - 1);
    for (int i = 0; i < n; ++i) {
        const double x = lo + i * step;
        const double fx = f(x);
        if (fx > best) {
            best = fx;
            arg = x;
        }
    }
    double a = arg - step, b = arg + step;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 200; ++it) {
        const double c = b - g * (b - a), d = a + g * (b - a);
        if (f(c) > f(d)) b = d; else a = c;
    }
    return std::max(best, f(0.5 * (a + b)));
}

/// Minimum of a 1D function over a uniform grid, returning the arg.
inline double grid_argmin_1d(const std::function<double(double)>& f, double lo, double hi, int n,
                             double* value = nullptr) {
    double best = std::numeric_limits<double>::infinity();
    double arg = lo;
    for (int i = 0; i < n; ++i) {
        const double x = lo + (hi - lo) * i / (n - 1);
        const double fx = f(x);
        if (fx < best) {
            best = fx;
            arg = x;
        }
    }
    if (value) *value = best;
    return arg;
}

/// Smallest enclosing ball by enumerating every support set of size <= d + 1:
/// for each subset, the circumcenter inside its affine hull, kept when it
/// encloses all points. O(k^(d+1)) and independent of Welzl's recursion.
struct OracleBall {
    Vec center;
    double radius = std::numeric_limits<double>::infinity();
};

inline OracleBall meb_by_enumeration(const std::vector<Vec>& pts) {
    const int k = static_cast<int>(pts.size());
    const int d = static_cast<int>(pts[0].size());
    OracleBall best;
    std::vector<int> idx;
    std::function<void(int)> rec = [&](int start) {
        if (!idx.empty()) {
            const int m = static_cast<int>(idx.size()) - 1;
            Vec c = pts[idx[0]];
            if (m > 0) {
                Eigen::MatrixXd D(d, m);
                for (int j = 0; j < m; ++j) D.col(j) = pts[idx[j + 1]] - pts[idx[0]];
                Eigen::MatrixXd G = D.transpose() * D;
                Eigen::VectorXd rhs(m);
                for (int j = 0; j < m; ++j) rhs(j) = 0.5 * D.col(j).squaredNorm();
                Eigen::FullPivLU<Eigen::MatrixXd> lu(G);
                if (lu.rank() == m) c = pts[idx[0]] + D * lu.solve(rhs);
                else c = Vec();
            }
            if (c.size() == d) {
                double r = 0.0;
                for (int i : idx) r = std::max(r, (pts[i] - c).norm());
                bool encloses = true;
                for (const auto& p : pts)
                    if ((p - c).norm() > r + 1e-12) encloses = false;
                if (encloses && r < best.radius) {
                    best.radius = r;
                    best.center = c;
                }
            }
        }
        if (static_cast<int>(idx.size()) == d + 1) return;
        for (int i = start; i < k; ++i) {
            idx.push_back(i);
            rec(i + 1);
            idx.pop_back();
        }
    };
    rec(0);
    return best;
}

/// max_i [L(v) + H_i - p_i . v] written out from the model's closed forms.
inline double lhat_direct(const shockflow::LimitMomentumSet& lms, const HamiltonianModel& model, const Vec& v) {
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& e : lms.entries)
        worst = std::max(worst, model.lagrangian(v) + e.energy - e.momentum.dot(v));
    return worst;
}

inline shockflow::LimitMomentumSet make_lms(const HamiltonianModel& model, std::vector<Vec> momenta) {
    return shockflow::limit_set_from_momenta(model, momenta);
}

/// Random momenta in [-2, 2]^d with pairwise separation above min_sep.
inline std::vector<Vec> separated_momenta(std::mt19937_64& rng, int dim, int k, double min_sep = 0.2) {
    std::vector<Vec> out;
    while (static_cast<int>(out.size()) < k) {
        Vec p = random_vec(rng, dim, 2.0);
        bool ok = true;
        for (const auto& q : out)
            if ((p - q).norm() < min_sep) ok = false;
        if (ok) out.push_back(p);
    }
    return out;
}

}  // namespace sft
