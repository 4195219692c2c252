#include "shockflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>

#include <Eigen/Dense>

#include "shockflow/errors.hpp"
#include "shockflow/parallel.hpp"

namespace shockflow {

namespace {

// Hopf-Lax evaluations at t = 0 are replaced by this small positive time.
constexpr double kStartTime = 1e-7;

double eval_time(double t) { return std::max(t, kStartTime); }

// Value and momentum of the smooth branch whose minimizer started near `preimage`.
struct BranchValue {
    double value;
    Vec momentum;
    Vec preimage;
};

BranchValue branch_value(const InitialCondition& ic, const HamiltonianModel& model, double t, const Vec& x,
                         const LimitEntry& branch) {
    if (ic.is_affine_family()) {
        const auto& slopes = ic.affine_slopes();
        std::size_t j = 0;
        for (std::size_t i = 1; i < slopes.size(); ++i)
            if ((slopes[i] - branch.momentum).norm() < (slopes[j] - branch.momentum).norm()) j = i;
        const Vec& p = slopes[j];
        return {p.dot(x) + ic.affine_offsets()[j] - t * model.hamiltonian(p), p,
                Vec(x - t * model.gradient(p))};
    }
    // Local compass search in velocity space, started inside the branch basin.
    auto objective = [&](const Vec& v) { return ic(Vec(x - t * v)) + t * model.lagrangian(v); };
    Vec v = (x - branch.preimage) / t;
    double fv = objective(v);
    double step = 1e-3 * (1.0 + v.norm());
    const int d = static_cast<int>(v.size());
    while (step > 1e-13 * (1.0 + v.norm())) {
        bool moved = false;
        for (int k = 0; k < d && !moved; ++k)
            for (double s : {+1.0, -1.0}) {
                Vec trial = v;
                trial[k] += s * step;
                const double ft = objective(trial);
                if (ft < fv) {
                    v = trial;
                    fv = ft;
                    moved = true;
                    break;
                }
            }
        if (!moved) step *= 0.5;
    }
    return {fv, model.lagrangian_gradient(v), Vec(x - t * v)};
}

// 1D: bisection on the side indicator "best preimage lies left of the gap".
Vec snap_1d(const InitialCondition& ic, const HamiltonianModel& model, double t, const Vec& guess,
            double y_left, double y_right, double width, const HopfLaxOptions& hl) {
    const double mid = 0.5 * (y_left + y_right);
    auto left_side = [&](double x) {
        Vec p(1);
        p[0] = x;
        return solve_value(ic, model, t, p, hl).minimizers.front()[0] < mid;
    };
    double a = guess[0] - width, b = guess[0] + width;
    for (int grow = 0; grow < 30 && !left_side(a); ++grow) a -= width * (1 << std::min(grow, 20));
    for (int grow = 0; grow < 30 && left_side(b); ++grow) b += width * (1 << std::min(grow, 20));
    if (!left_side(a) || left_side(b))
        throw NumericalFailure("flow.snap", "could not bracket the shock");
    for (int it = 0; it < 80 && b - a > 1e-13 * (1.0 + std::abs(a)); ++it) {
        const double m = 0.5 * (a + b);
        (left_side(m) ? a : b) = m;
    }
    Vec out(1);
    out[0] = 0.5 * (a + b);
    return out;
}

// d >= 2: Gauss-Newton on the branch value differences phi_j - phi_0 = 0,
// moving along their gradients p_j - p_0 (minimum-norm steps).
Vec snap_nd(const InitialCondition& ic, const HamiltonianModel& model, double t, Vec x,
            const std::vector<LimitEntry>& branches) {
    const int m = static_cast<int>(branches.size()) - 1;
    if (m < 1) return x;
    for (int it = 0; it < 30; ++it) {
        std::vector<BranchValue> bv;
        for (const auto& b : branches) bv.push_back(branch_value(ic, model, t, x, b));
        Eigen::MatrixXd J(m, x.size());
        Eigen::VectorXd r(m);
        for (int s = 0; s < m; ++s) {
            r[s] = bv[s + 1].value - bv[0].value;
            J.row(s) = (bv[s + 1].momentum - bv[0].momentum).transpose();
        }
        if (r.norm() <= 1e-13 * (1.0 + std::abs(bv[0].value))) break;
        const Eigen::VectorXd step = J.completeOrthogonalDecomposition().solve(-r);
        x += Vec(step);
        if (step.norm() < 1e-15 * (1.0 + x.norm())) break;
    }
    return x;
}

std::vector<LimitEntry> entries_of(const LimitMomentumSet& lms, const std::vector<int>& idx) {
    std::vector<LimitEntry> out;
    for (int j : idx) out.push_back(lms.entries[j]);
    return out;
}

ParticleTrajectory integrate_one(const InitialCondition& ic, const HamiltonianModel& model, const Vec& seed,
                                 int id, std::size_t steps, double dt, double vmax,
                                 const FlowOptions& options) {
    ParticleTrajectory traj;
    traj.id = id;
    traj.seed = seed;
    const HopfLaxOptions& hl = options.superdiff.hopf_lax;

    double t = 0.0;
    Vec x = seed;
    LimitMomentumSet lms = limit_data(ic, model, eval_time(t), x, options.superdiff);
    traj.times.push_back(t);
    traj.positions.push_back(x);
    traj.on_shock.push_back(is_shock(lms));
    if (is_shock(lms)) traj.shock_entry = t;

    for (std::size_t n = 0; n < steps; ++n) {
        Vec v;
        std::vector<int> active;
        if (is_shock(lms)) {
            const AdmissibleSolution sol = admissible_velocity(lms, model, options.admissible);
            v = sol.v_star;
            active = sol.active_set;
        } else {
            v = lms.entries.front().velocity;
        }
        if (!(v.norm() <= vmax * (1.0 + 1e-6) + 1e-9))
            throw NumericalFailure("flow.step", "step rejected: |v*| = " + std::to_string(v.norm()) +
                                                     " exceeds V_max = " + std::to_string(vmax) +
                                                     " at t = " + std::to_string(t));
        const double t_next = (static_cast<double>(n) + 1.0) * dt;
        Vec x_next = x + dt * v;

        if (options.shock_snap) {
            const double width = std::max(2.0 * dt * vmax, 1e-9);
            if (active.size() >= 2) {
                const auto branches = entries_of(lms, active);
                if (x.size() == 1) {
                    double lo = branches[0].preimage[0], hi = lo;
                    for (const auto& b : branches) {
                        lo = std::min(lo, b.preimage[0]);
                        hi = std::max(hi, b.preimage[0]);
                    }
                    x_next = snap_1d(ic, model, t_next, x_next, lo, hi, width, hl);
                } else {
                    x_next = snap_nd(ic, model, t_next, x_next, branches);
                }
            } else if (!is_shock(lms)) {
                // Detect a shock crossed during the step by a jump of the preimage.
                const ValueResult vr = solve_value(ic, model, t_next, x_next, hl);
                const Vec& y_old = lms.entries.front().preimage;
                const Vec& y_new = vr.minimizers.front();
                const double jump_tol = std::max(1e-6, 1e-3 * t_next * vmax);
                if ((y_new - y_old).norm() > jump_tol) {
                    if (x.size() == 1) {
                        const double lo = std::min(y_old[0], y_new[0]);
                        const double hi = std::max(y_old[0], y_new[0]);
                        x_next = snap_1d(ic, model, t_next, x_next, lo, hi, width, hl);
                    } else {
                        LimitEntry fresh{model.lagrangian_gradient(vr.velocities.front()), 0.0,
                                         vr.velocities.front(), y_new};
                        x_next = snap_nd(ic, model, t_next, x_next, {lms.entries.front(), fresh});
                    }
                }
            }
        }

        t = t_next;
        x = x_next;
        lms = limit_data(ic, model, t, x, options.superdiff);
        traj.times.push_back(t);
        traj.positions.push_back(x);
        traj.on_shock.push_back(is_shock(lms));
        if (is_shock(lms) && !traj.shock_entry) traj.shock_entry = t;
    }
    return traj;
}

struct DisjointSets {
    std::vector<int> parent;
    explicit DisjointSets(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int a) { return parent[a] == a ? a : parent[a] = find(parent[a]); }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

// First sample index from which the pair stays within tol; npos if never.
std::size_t merge_index(const ParticleTrajectory& a, const ParticleTrajectory& b, double tol) {
    const std::size_t n = std::min(a.positions.size(), b.positions.size());
    std::size_t i = n;
    while (i > 0 && (a.positions[i - 1] - b.positions[i - 1]).norm() <= tol) --i;
    return i == n ? std::string::npos : i;
}

}  // namespace

double flow_speed_bound(const InitialCondition& ic, const HamiltonianModel& model) {
    return model.max_speed(ic.lipschitz());
}

Vec forward_velocity(const InitialCondition& ic, const HamiltonianModel& model, double t, const Vec& x,
                     const FlowOptions& options) {
    const LimitMomentumSet lms = limit_data(ic, model, eval_time(t), x, options.superdiff);
    if (!is_shock(lms)) return lms.entries.front().velocity;
    return admissible_velocity(lms, model, options.admissible).v_star;
}

std::vector<ParticleTrajectory> integrate_flow(const InitialCondition& ic, const HamiltonianModel& model,
                                               const std::vector<Vec>& seeds, double T, double dt,
                                               const FlowOptions& options) {
    if (!(dt > 0)) throw ConfigError("flow.dt", "time step must be positive");
    if (!(T > 0)) throw ConfigError("flow.T", "horizon must be positive");
    const auto steps = static_cast<std::size_t>(std::llround(T / dt));
    const double vmax = flow_speed_bound(ic, model);
    std::vector<ParticleTrajectory> out(seeds.size());
    parallel_for(seeds.size(), [&](std::size_t i) {
        out[i] = integrate_one(ic, model, seeds[i], static_cast<int>(i), steps, dt, vmax, options);
    });
    const double tol = options.merge_tol >= 0 ? options.merge_tol : 2.0 * dt * vmax;
    detect_coalescence(out, tol);
    return out;
}

CoalescencePartition detect_coalescence(std::vector<ParticleTrajectory>& trajectories, double merge_tol) {
    const int n = static_cast<int>(trajectories.size());
    DisjointSets sets(n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (merge_index(trajectories[i], trajectories[j], merge_tol) != std::string::npos) sets.unite(i, j);

    CoalescencePartition part;
    std::vector<int> slot(n, -1);
    for (int i = 0; i < n; ++i) {
        const int r = sets.find(i);
        if (slot[r] < 0) {
            slot[r] = static_cast<int>(part.classes.size());
            part.classes.emplace_back();
        }
        part.classes[slot[r]].push_back(i);
    }
    for (const auto& cls : part.classes) {
        const int root = cls.front();
        trajectories[root].merged_into.reset();
        trajectories[root].merge_time.reset();
        for (std::size_t a = 1; a < cls.size(); ++a) {
            auto& member = trajectories[cls[a]];
            std::size_t idx = merge_index(trajectories[root], member, merge_tol);
            if (idx == std::string::npos) {
                // Linked only through a chain: take the latest pairwise merge in the class.
                idx = 0;
                for (int other : cls)
                    if (other != cls[a]) {
                        const std::size_t k = merge_index(trajectories[other], member, merge_tol);
                        if (k != std::string::npos) idx = std::max(idx, k);
                    }
            }
            member.merged_into = trajectories[root].id;
            member.merge_time = member.times[std::min(idx, member.times.size() - 1)];
        }
    }
    return part;
}

std::vector<std::vector<int>> coalescence_classes_at(const std::vector<ParticleTrajectory>& trajectories,
                                                     double tol, std::size_t sample) {
    const int n = static_cast<int>(trajectories.size());
    DisjointSets sets(n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const std::size_t k = merge_index(trajectories[i], trajectories[j], tol);
            if (k != std::string::npos && k <= sample) sets.unite(i, j);
        }
    std::vector<std::vector<int>> classes;
    std::vector<int> slot(n, -1);
    for (int i = 0; i < n; ++i) {
        const int r = sets.find(i);
        if (slot[r] < 0) {
            slot[r] = static_cast<int>(classes.size());
            classes.emplace_back();
        }
        classes[slot[r]].push_back(i);
    }
    return classes;
}

}  // namespace shockflow
