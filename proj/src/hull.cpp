#include "shockflow/hull.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

namespace shockflow {

namespace {

// Smallest ball with every point of `support` on its boundary; the centre is
// restricted to the affine hull of the support.
Ball circumscribed_ball(const std::vector<Vec>& support) {
    const Vec& r0 = support.front();
    const int m = static_cast<int>(support.size()) - 1;
    Vec center = r0;
    if (m > 0) {
        Eigen::MatrixXd gram(m, m);
        Eigen::VectorXd rhs(m);
        for (int i = 0; i < m; ++i) {
            const Vec di = support[i + 1] - r0;
            rhs[i] = di.squaredNorm();
            for (int j = 0; j < m; ++j) gram(i, j) = 2.0 * di.dot(support[j + 1] - r0);
        }
        const Eigen::VectorXd alpha = gram.completeOrthogonalDecomposition().solve(rhs);
        for (int i = 0; i < m; ++i) center += alpha[i] * (support[i + 1] - r0);
    }
    double radius = 0.0;
    for (const auto& s : support) radius = std::max(radius, (s - center).norm());
    return {center, radius};
}

Ball welzl(const std::vector<Vec>& points, std::size_t n, std::vector<Vec>& boundary, int dim,
           double eps) {
    if (n == 0 || static_cast<int>(boundary.size()) == dim + 1) {
        if (boundary.empty()) return {Vec::Zero(dim), -1.0};
        return circumscribed_ball(boundary);
    }
    const Vec& p = points[n - 1];
    Ball ball = welzl(points, n - 1, boundary, dim, eps);
    if (ball.radius >= 0 && (p - ball.center).norm() <= ball.radius + eps) return ball;
    boundary.push_back(p);
    ball = welzl(points, n - 1, boundary, dim, eps);
    boundary.pop_back();
    return ball;
}

}  // namespace

Ball min_enclosing_ball(const std::vector<Vec>& points) {
    if (points.empty()) throw std::invalid_argument("min_enclosing_ball needs at least one point");
    const int dim = static_cast<int>(points.front().size());
    double scale = 0.0;
    for (const auto& p : points) scale = std::max(scale, p.cwiseAbs().maxCoeff());
    std::vector<Vec> boundary;
    return welzl(points, points.size(), boundary, dim, 1e-13 * (1.0 + scale));
}

HullProjection project_onto_hull(const std::vector<Vec>& points, const Vec& query) {
    const int k = static_cast<int>(points.size());
    if (k == 0) throw std::invalid_argument("project_onto_hull needs at least one point");
    const int d = static_cast<int>(query.size());
    Eigen::MatrixXd P(d, k);
    for (int j = 0; j < k; ++j) P.col(j) = points[j];
    const Eigen::VectorXd q = query;
    const Eigen::MatrixXd G = P.transpose() * P;
    const Eigen::VectorXd c = P.transpose() * q;
    const double scale = 1.0 + G.diagonal().maxCoeff();

    // Feasible start at the nearest vertex.
    int start = 0;
    for (int j = 1; j < k; ++j)
        if ((points[j] - query).norm() < (points[start] - query).norm()) start = j;
    Eigen::VectorXd w = Eigen::VectorXd::Zero(k);
    w[start] = 1.0;
    std::vector<bool> free(k, false);
    free[start] = true;

    for (int iter = 0; iter < 200; ++iter) {
        std::vector<int> F;
        for (int j = 0; j < k; ++j)
            if (free[j]) F.push_back(j);
        const int m = static_cast<int>(F.size());

        // Equality-constrained subproblem on the free set: KKT system.
        Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(m + 1, m + 1);
        Eigen::VectorXd rhs(m + 1);
        for (int a = 0; a < m; ++a) {
            for (int b = 0; b < m; ++b) kkt(a, b) = G(F[a], F[b]);
            kkt(a, m) = 1.0;
            kkt(m, a) = 1.0;
            rhs[a] = c[F[a]];
        }
        rhs[m] = 1.0;
        const Eigen::VectorXd sol = kkt.completeOrthogonalDecomposition().solve(rhs);

        bool feasible = true;
        for (int a = 0; a < m; ++a)
            if (sol[a] < -1e-15) feasible = false;

        if (feasible) {
            w.setZero();
            for (int a = 0; a < m; ++a) w[F[a]] = std::max(0.0, sol[a]);
            w /= w.sum();
            const Eigen::VectorXd grad = G * w - c;
            double nu = 0.0;
            for (int a = 0; a < m; ++a) nu += w[F[a]] * grad[F[a]];
            int enter = -1;
            double worst = -1e-14 * scale;
            for (int j = 0; j < k; ++j) {
                if (free[j]) continue;
                if (grad[j] - nu < worst) {
                    worst = grad[j] - nu;
                    enter = j;
                }
            }
            if (enter < 0) break;
            free[enter] = true;
        } else {
            // Step toward the subproblem solution until a weight hits zero.
            double alpha = 1.0;
            int leave = -1;
            for (int a = 0; a < m; ++a) {
                const double wa = w[F[a]];
                if (sol[a] < 0 && wa - sol[a] > 0) {
                    const double r = wa / (wa - sol[a]);
                    if (r < alpha) {
                        alpha = r;
                        leave = F[a];
                    }
                }
            }
            for (int a = 0; a < m; ++a) w[F[a]] += alpha * (sol[a] - w[F[a]]);
            if (leave < 0) {
                for (int a = 0; a < m; ++a)
                    if (sol[a] < 0) leave = F[a];
            }
            w[leave] = 0.0;
            free[leave] = false;
            for (int a = 0; a < m; ++a)
                if (w[F[a]] <= 0.0) {
                    w[F[a]] = 0.0;
                    free[F[a]] = false;
                }
            w = w.cwiseMax(0.0);
            w /= w.sum();
        }
    }

    HullProjection out;
    out.weights.assign(w.data(), w.data() + k);
    out.point = Vec(P * w);
    out.distance = (out.point - query).norm();
    return out;
}

double relative_boundary_distance(const std::vector<Vec>& points, const Vec& query) {
    const int k = static_cast<int>(points.size());
    if (k < 2) return 0.0;
    const int d = static_cast<int>(query.size());
    const Vec& p0 = points.front();

    Eigen::MatrixXd D(d, k - 1);
    double scale = 0.0;
    for (int j = 1; j < k; ++j) {
        D.col(j - 1) = points[j] - p0;
        scale = std::max(scale, D.col(j - 1).norm());
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(D, Eigen::ComputeThinU);
    int m = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()[i] > 1e-10 * (1.0 + scale)) ++m;
    if (m == 0) return 0.0;
    const Eigen::MatrixXd U = svd.matrixU().leftCols(m);

    const Eigen::VectorXd rq = query - p0;
    const Eigen::VectorXd zq = U.transpose() * rq;
    const double eps = 1e-12 * (1.0 + scale);
    if ((rq - U * zq).norm() > 1e-9 * (1.0 + scale)) return 0.0;  // off the affine hull

    std::vector<Eigen::VectorXd> z(k);
    for (int j = 0; j < k; ++j) z[j] = U.transpose() * (points[j] - p0);

    double best = std::numeric_limits<double>::infinity();
    // Enumerate m-subsets as candidate facet hyperplanes in the m-dim hull.
    std::vector<int> idx(m);
    for (int i = 0; i < m; ++i) idx[i] = i;
    while (true) {
        Eigen::VectorXd normal(m);
        bool ok = true;
        if (m == 1) {
            normal[0] = 1.0;
        } else {
            Eigen::MatrixXd E(m - 1, m);
            for (int r = 1; r < m; ++r) E.row(r - 1) = (z[idx[r]] - z[idx[0]]).transpose();
            Eigen::JacobiSVD<Eigen::MatrixXd> es(E, Eigen::ComputeFullV);
            const auto& sv = es.singularValues();
            if (sv.size() < m - 1 || sv[m - 2] <= 1e-10 * (1.0 + scale)) ok = false;
            normal = es.matrixV().col(m - 1);
        }
        if (ok) {
            double lo = 0.0, hi = 0.0;
            for (int j = 0; j < k; ++j) {
                const double s = normal.dot(z[j] - z[idx[0]]);
                lo = std::min(lo, s);
                hi = std::max(hi, s);
            }
            if (hi <= eps || lo >= -eps) {
                if (hi > eps) normal = -normal;  // orient outward: all points at <= 0
                const double sq = normal.dot(zq - z[idx[0]]);
                if (sq > eps) return 0.0;        // outside the hull
                best = std::min(best, -sq);
            }
        }
        int pos = m - 1;
        while (pos >= 0 && idx[pos] == k - m + pos) --pos;
        if (pos < 0) break;
        ++idx[pos];
        for (int i = pos + 1; i < m; ++i) idx[i] = idx[i - 1] + 1;
    }
    return std::isfinite(best) ? std::max(0.0, best) : 0.0;
}

}  // namespace shockflow
