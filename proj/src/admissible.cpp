#include "shockflow/admissible.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

namespace shockflow {

namespace {

// L_i(v) - L(v) = H_i - p_i . v
std::vector<double> branch_offsets(const LimitMomentumSet& lms, const Vec& v) {
    std::vector<double> out(lms.k());
    for (std::size_t i = 0; i < lms.k(); ++i)
        out[i] = lms.entries[i].energy - lms.entries[i].momentum.dot(v);
    return out;
}

int rank_of_differences(const LimitMomentumSet& lms, const std::vector<int>& S) {
    if (S.size() < 2) return 0;
    const int d = lms.dim();
    Eigen::MatrixXd D(d, static_cast<int>(S.size()) - 1);
    double scale = 0.0;
    for (std::size_t a = 1; a < S.size(); ++a) {
        D.col(static_cast<int>(a) - 1) = lms.entries[S[a]].momentum - lms.entries[S[0]].momentum;
        scale = std::max(scale, D.col(static_cast<int>(a) - 1).norm());
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(D);
    lu.setThreshold(1e-10);
    return static_cast<int>(lu.rank());
}

bool affinely_independent(const LimitMomentumSet& lms, const std::vector<int>& S) {
    return rank_of_differences(lms, S) == static_cast<int>(S.size()) - 1;
}

struct Polished {
    Vec p;
    Vec v;
    std::vector<double> lambda;  // aligned with S
    bool ok = false;
};

// Minimizes F(mu) = H(p_1 + P mu) - mu . dH over the affine hull of the
// momenta in S. Stationarity is equality of the branch values L_j along S with
// p(v) in the affine hull of {p_j}, i.e. the KKT system of min max_j L_j
// restricted to S.
Polished polish_on(const LimitMomentumSet& lms, const HamiltonianModel& model,
                   const std::vector<int>& S, const Vec& guess) {
    const int d = lms.dim();
    const int m = static_cast<int>(S.size()) - 1;
    const Vec& p1 = lms.entries[S[0]].momentum;
    const double H1 = lms.entries[S[0]].energy;
    Polished out;
    if (m == 0) {
        out.p = p1;
        out.v = lms.entries[S[0]].velocity;
        out.lambda = {1.0};
        out.ok = true;
        return out;
    }
    Eigen::MatrixXd P(d, m);
    Eigen::VectorXd dH(m);
    for (int a = 0; a < m; ++a) {
        P.col(a) = lms.entries[S[a + 1]].momentum - p1;
        dH[a] = lms.entries[S[a + 1]].energy - H1;
    }
    const auto pinv = P.completeOrthogonalDecomposition();
    const Eigen::VectorXd target = model.lagrangian_gradient(guess) - p1;
    Eigen::VectorXd mu = pinv.solve(target);

    auto momentum = [&](const Eigen::VectorXd& z) { return Vec(p1 + P * z); };
    auto objective = [&](const Eigen::VectorXd& z) { return model.hamiltonian(momentum(z)) - z.dot(dH); };
    auto grad = [&](const Eigen::VectorXd& z) {
        return Eigen::VectorXd(P.transpose() * model.gradient(momentum(z)).cast<double>() - dH);
    };

    double f = objective(mu);
    if (!std::isfinite(f)) {
        mu.setZero();
        f = objective(mu);
    }
    Eigen::VectorXd g = grad(mu);
    const double gscale = 1.0 + dH.cwiseAbs().maxCoeff() + P.cwiseAbs().maxCoeff();
    for (int it = 0; it < 300; ++it) {
        const double gn = g.norm();
        if (gn <= 1e-14 * gscale) break;
        Eigen::MatrixXd Hs = P.transpose() * model.hessian(momentum(mu)).cast<double>() * P;
        Hs.diagonal().array() += 1e-15 * (1.0 + Hs.trace());
        Eigen::VectorXd step = Hs.ldlt().solve(-g);
        if (!step.allFinite()) step = -g;
        double alpha = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls, alpha *= 0.5) {
            const Eigen::VectorXd trial = mu + alpha * step;
            const double ft = objective(trial);
            if (!std::isfinite(ft)) continue;
            const Eigen::VectorXd gt = grad(trial);
            if (ft < f + 1e-4 * alpha * g.dot(step) || gt.norm() < (1.0 - 1e-4 * alpha) * gn) {
                mu = trial;
                f = ft;
                g = gt;
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
    }
    out.p = momentum(mu);
    out.v = model.gradient(out.p);
    out.lambda.resize(S.size());
    out.lambda[0] = 1.0 - mu.sum();
    for (int a = 0; a < m; ++a) out.lambda[a + 1] = mu[a];
    out.ok = out.v.allFinite() && g.norm() <= 1e-9 * gscale;
    return out;
}

// Polyak-type subgradient descent on the strictly convex max-function with a
// decreasing target gap and restarts from the best iterate.
Vec subgradient_phase(const LimitMomentumSet& lms, const HamiltonianModel& model, Vec v, int iterations) {
    double f = lhat(lms, model, v);
    Vec best = v;
    double fbest = f;
    double delta = std::max(1e-3, 0.5 * f);
    int fails = 0;
    for (int it = 0; it < iterations && delta > 1e-12 * (1.0 + fbest); ++it) {
        const auto off = branch_offsets(lms, v);
        const int j = static_cast<int>(std::max_element(off.begin(), off.end()) - off.begin());
        const Vec g = model.lagrangian_gradient(v) - lms.entries[j].momentum;
        const double gg = g.squaredNorm();
        if (gg == 0.0) return v;
        const double target = std::max(0.0, fbest - delta);
        v = v - ((f - target) / gg) * g;
        f = lhat(lms, model, v);
        if (!std::isfinite(f)) {
            v = best;
            f = fbest;
            delta *= 0.5;
            continue;
        }
        if (f < fbest - 0.5 * delta) {
            fails = 0;
        } else if (++fails > 15) {
            delta *= 0.5;
            fails = 0;
            v = best;
            f = fbest;
        }
        if (f < fbest) {
            fbest = f;
            best = v;
        }
    }
    return best;
}

struct Check {
    double max_violation;  // max_i L_i(v) - L_S(v), i outside S
    int worst;
};

Check violation(const LimitMomentumSet& lms, const std::vector<int>& S, const Vec& v) {
    const auto off = branch_offsets(lms, v);
    double level = off[S[0]];
    Check c{-std::numeric_limits<double>::infinity(), -1};
    for (int i = 0; i < static_cast<int>(lms.k()); ++i) {
        if (std::find(S.begin(), S.end(), i) != S.end()) continue;
        if (off[i] - level > c.max_violation) c = {off[i] - level, i};
    }
    return c;
}

AdmissibleSolution finish(const LimitMomentumSet& lms, const HamiltonianModel& model, const Vec& v,
                          const AdmissibleOptions& options) {
    const auto verdict = check_admissibility(lms, model, v, options.tie_tol, options.certify_tol);
    if (!verdict.accepted)
        throw AdmissibleFailure("best iterate failed certification", v, verdict.hull_distance);
    AdmissibleSolution sol;
    sol.v_star = v;
    sol.p_star = verdict.momentum;
    double mn = std::numeric_limits<double>::infinity();
    for (const auto& e : lms.entries) mn = std::min(mn, e.momentum.dot(v) - e.energy);
    sol.H_star = sol.p_star.dot(v) - mn;
    sol.active_set = verdict.active_set;
    sol.weights = verdict.weights;
    sol.anomaly = lhat(lms, model, v);
    sol.hull_distance = verdict.hull_distance;
    return sol;
}

AdmissibleSolution solve_enclosing_ball(const LimitMomentumSet& lms, const HamiltonianModel& model,
                                        const AdmissibleOptions& options) {
    // Bregman divergence of L(v) = v^T A^{-1} v / 2 is |C^{-1}(v - w)|^2 / 2 with A = C C^T.
    const Eigen::LLT<Mat> llt(model.matrix());
    const Mat C = llt.matrixL();
    std::vector<Vec> w;
    for (const auto& e : lms.entries) w.push_back(C.triangularView<Eigen::Lower>().solve(e.velocity));
    const Ball ball = min_enclosing_ball(w);
    return finish(lms, model, Vec(C * ball.center), options);
}

AdmissibleSolution solve_general(const LimitMomentumSet& lms, const HamiltonianModel& model,
                                 const AdmissibleOptions& options) {
    const int k = static_cast<int>(lms.k());
    Vec v0 = Vec::Zero(lms.dim());
    if (options.start) {
        v0 = *options.start;
    } else {
        for (const auto& e : lms.entries) v0 += e.velocity;
        v0 /= k;
    }
    const Vec vs = subgradient_phase(lms, model, v0, options.subgradient_iterations);

    // Initial working set: branches near the top at the subgradient iterate,
    // reduced to an affinely independent family.
    const auto off = branch_offsets(lms, vs);
    std::vector<int> order(k);
    for (int i = 0; i < k; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) { return off[a] > off[b]; });
    const double band = 1e-6 * (1.0 + std::abs(lhat(lms, model, vs)));
    std::vector<int> S{order[0]};
    for (int a = 1; a < k; ++a) {
        if (off[order[0]] - off[order[a]] > band) break;
        S.push_back(order[a]);
        if (!affinely_independent(lms, S)) S.pop_back();
    }

    const double viol_tol = 0.1 * options.tie_tol;
    Vec guess = vs;
    for (int it = 0; it < 4 * k + 8; ++it) {
        const Polished pol = polish_on(lms, model, S, guess);
        if (!pol.ok) break;
        const auto neg = std::min_element(pol.lambda.begin(), pol.lambda.end());
        if (*neg < -1e-12) {
            S.erase(S.begin() + (neg - pol.lambda.begin()));
            guess = pol.v;
            continue;
        }
        const Check c = violation(lms, S, pol.v);
        if (c.worst >= 0 && c.max_violation > viol_tol) {
            S.push_back(c.worst);
            if (!affinely_independent(lms, S)) break;
            guess = pol.v;
            continue;
        }
        try {
            return finish(lms, model, pol.v, options);
        } catch (const AdmissibleFailure&) {
            break;
        }
    }

    // Exhaustive fallback over affinely independent subsets (k <= 8): the
    // optimum is supported on one of them.
    Vec best_v = vs;
    double best_val = std::numeric_limits<double>::infinity();
    for (int mask = 1; mask < (1 << k); ++mask) {
        std::vector<int> T;
        for (int i = 0; i < k; ++i)
            if (mask & (1 << i)) T.push_back(i);
        if (static_cast<int>(T.size()) > lms.dim() + 1 || !affinely_independent(lms, T)) continue;
        const Polished pol = polish_on(lms, model, T, vs);
        if (!pol.ok) continue;
        if (*std::min_element(pol.lambda.begin(), pol.lambda.end()) < -1e-10) continue;
        const Check c = violation(lms, T, pol.v);
        if (c.worst >= 0 && c.max_violation > viol_tol) continue;
        const double val = lhat(lms, model, pol.v);
        if (val < best_val) {
            best_val = val;
            best_v = pol.v;
        }
    }
    return finish(lms, model, best_v, options);
}

}  // namespace

double lhat(const LimitMomentumSet& lms, const HamiltonianModel& model, const Vec& v) {
    const auto off = branch_offsets(lms, v);
    return model.lagrangian(v) + *std::max_element(off.begin(), off.end());
}

std::vector<int> active_set(const LimitMomentumSet& lms, const HamiltonianModel& model, const Vec& v,
                            double tol) {
    (void)model;
    std::vector<double> vals(lms.k());
    double mn = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < lms.k(); ++i) {
        vals[i] = -lms.entries[i].energy + lms.entries[i].momentum.dot(v);
        mn = std::min(mn, vals[i]);
    }
    std::vector<int> out;
    for (std::size_t i = 0; i < lms.k(); ++i)
        if (vals[i] <= mn + tol) out.push_back(static_cast<int>(i));
    return out;
}

AdmissibilityVerdict check_admissibility(const LimitMomentumSet& lms, const HamiltonianModel& model,
                                         const Vec& v, double tie_tol, double accept_tol) {
    AdmissibilityVerdict out;
    out.momentum = model.lagrangian_gradient(v);
    out.active_set = active_set(lms, model, v, tie_tol);
    std::vector<Vec> pts;
    for (int j : out.active_set) pts.push_back(lms.entries[j].momentum);
    const HullProjection proj = project_onto_hull(pts, out.momentum);
    out.weights = proj.weights;
    out.hull_distance = proj.distance;
    out.accepted = proj.distance <= accept_tol;
    return out;
}

AdmissibleSolution admissible_velocity(const LimitMomentumSet& lms, const HamiltonianModel& model,
                                       const AdmissibleOptions& options) {
    if (lms.k() == 0) throw std::invalid_argument("admissible_velocity needs at least one branch");
    if (lms.k() == 1) return finish(lms, model, lms.entries[0].velocity, options);
    switch (options.method) {
        case AdmissibleMethod::enclosing_ball:
            if (!model.is_quadratic_form())
                throw std::invalid_argument("enclosing-ball reduction requires a quadratic Hamiltonian");
            return solve_enclosing_ball(lms, model, options);
        case AdmissibleMethod::general: return solve_general(lms, model, options);
        case AdmissibleMethod::automatic:
            if (model.is_quadratic_form()) return solve_enclosing_ball(lms, model, options);
            return solve_general(lms, model, options);
    }
    return solve_general(lms, model, options);
}

std::string to_string(ShockClass c) {
    switch (c) {
        case ShockClass::restraining: return "restraining";
        case ShockClass::nonrestraining: return "nonrestraining";
        case ShockClass::not_a_shock: return "not-a-shock";
    }
    return "unknown";
}

ShockClass classify_shock(const LimitMomentumSet& lms, const HamiltonianModel& model,
                          const AdmissibleSolution& solution, double boundary_tol) {
    (void)model;
    if (lms.k() < 2) return ShockClass::not_a_shock;
    std::vector<Vec> pts;
    for (const auto& e : lms.entries) pts.push_back(e.momentum);
    return relative_boundary_distance(pts, solution.p_star) > boundary_tol ? ShockClass::restraining
                                                                           : ShockClass::nonrestraining;
}

}  // namespace shockflow
