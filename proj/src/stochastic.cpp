#include "shockflow/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "shockflow/errors.hpp"
#include "shockflow/parallel.hpp"

namespace shockflow {

namespace {

constexpr double kStartTime = 1e-7;

std::size_t nearest(const std::vector<Vec>& refs, const Vec& p) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < refs.size(); ++j)
        if ((refs[j] - p).squaredNorm() < (refs[best] - p).squaredNorm()) best = j;
    return best;
}

struct PathSummary {
    std::vector<double> counts;
    Vec final_position;
    Vec velocity;
    ParticleTrajectory stored;
};

}  // namespace

SdeEnsemble simulate_sde(const InitialCondition& ic, const HamiltonianModel& model, const Vec& seed_point,
                         const SdeOptions& options) {
    if (!(options.epsilon >= 0)) throw ConfigError("sde.epsilon", "noise amplitude must be nonnegative");
    if (!(options.dt > 0) || options.dt > 1e-3) throw ConfigError("sde.dt", "step must lie in (0, 1e-3]");
    if (options.n_paths < 1) throw ConfigError("sde.n_paths", "need at least one path");
    if (!(options.T > options.t0) || options.t0 < 0) throw ConfigError("sde.T", "need 0 <= t0 < T");

    SdeEnsemble ens;
    ens.epsilon = options.epsilon;
    ens.rng_seed = options.rng_seed;
    ens.n_paths = options.n_paths;
    ens.dt = options.dt;
    ens.seed_point = seed_point;

    const double t_ref = std::max(options.t0, options.dt);
    // Branches meeting near the seed: momenta on a 3^d stencil of radius 2 t V_max.
    const int dim = static_cast<int>(seed_point.size());
    const double radius = 2.0 * t_ref * std::max(model.max_speed(ic.lipschitz()), 1e-6);
    int stencil = 1;
    for (int k = 0; k < dim; ++k) stencil *= 3;
    for (int code = 0; code < stencil; ++code) {
        Vec offset(dim);
        for (int k = 0, c = code; k < dim; ++k, c /= 3) offset[k] = c % 3 - 1.0;
        const Vec x = offset.isZero() ? seed_point : Vec(seed_point + radius * offset.normalized());
        for (const auto& e : limit_data(ic, model, t_ref, x, options.superdiff).entries) {
            bool fresh = true;
            for (const auto& p : ens.reference_momenta)
                fresh = fresh && (p - e.momentum).norm() > options.superdiff.momentum_cluster_tol;
            if (fresh) ens.reference_momenta.push_back(e.momentum);
        }
    }
    const std::size_t branches = ens.reference_momenta.size();

    const auto steps = static_cast<std::size_t>(std::llround((options.T - options.t0) / options.dt));
    const double sqrt_dt = std::sqrt(options.dt);
    const HopfLaxOptions& hl = options.superdiff.hopf_lax;

    std::vector<PathSummary> results(options.n_paths);
    parallel_for(results.size(), [&](std::size_t path) {
        std::seed_seq seq{static_cast<std::uint32_t>(options.rng_seed & 0xffffffffu),
                          static_cast<std::uint32_t>(options.rng_seed >> 32), static_cast<std::uint32_t>(path)};
        std::mt19937_64 rng(seq);
        std::normal_distribution<double> normal(0.0, 1.0);
        PathSummary& out = results[path];
        out.counts.assign(branches, 0.0);
        const bool keep = path < options.stored_paths;
        if (keep) {
            out.stored.id = static_cast<int>(path);
            out.stored.seed = seed_point;
        }
        Vec x = seed_point;
        for (std::size_t n = 0; n < steps; ++n) {
            const double t = options.t0 + static_cast<double>(n) * options.dt;
            const ValueResult vr = solve_value(ic, model, std::max(t, kStartTime), x, hl);
            const Vec& v = vr.velocities.front();
            out.counts[nearest(ens.reference_momenta, model.lagrangian_gradient(v))] += 1.0;
            if (keep) {
                out.stored.times.push_back(t);
                out.stored.positions.push_back(x);
                out.stored.on_shock.push_back(vr.minimizers.size() > 1);
            }
            Vec noise(dim);
            for (int k = 0; k < dim; ++k) noise[k] = normal(rng);
            x += options.dt * v + options.epsilon * sqrt_dt * noise;
        }
        if (keep) {
            out.stored.times.push_back(options.T);
            out.stored.positions.push_back(x);
            out.stored.on_shock.push_back(0);
        }
        for (double& c : out.counts) c /= static_cast<double>(steps);
        out.final_position = x;
        out.velocity = (x - seed_point) / (options.T - options.t0);
    });

    const double n = options.n_paths;
    ens.occupancy.assign(branches, 0.0);
    ens.occupancy_stderr.assign(branches, 0.0);
    ens.mean_velocity = Vec::Zero(dim);
    ens.mean_velocity_stderr = Vec::Zero(dim);
    for (const auto& r : results) {
        for (std::size_t j = 0; j < branches; ++j) ens.occupancy[j] += r.counts[j] / n;
        ens.mean_velocity += r.velocity / n;
        ens.final_positions.push_back(r.final_position);
        if (!r.stored.times.empty()) ens.paths.push_back(r.stored);
    }
    if (options.n_paths > 1) {
        for (std::size_t j = 0; j < branches; ++j) {
            double ss = 0.0;
            for (const auto& r : results) ss += std::pow(r.counts[j] - ens.occupancy[j], 2);
            ens.occupancy_stderr[j] = std::sqrt(ss / (n - 1) / n);
        }
        for (int k = 0; k < dim; ++k) {
            double ss = 0.0;
            for (const auto& r : results) ss += std::pow(r.velocity[k] - ens.mean_velocity[k], 2);
            ens.mean_velocity_stderr[k] = std::sqrt(ss / (n - 1) / n);
        }
    }
    return ens;
}

std::vector<SelfConsistentSolution> self_consistent_velocity(const LimitMomentumSet& lms,
                                                             const HamiltonianModel& model, double tol) {
    const int k = static_cast<int>(lms.k());
    if (k < 1) throw NumericalFailure("stochastic.self_consistent", "empty limit momentum set");
    if (k > 8) throw ConfigError("admissible.max_k", "at most 8 branches are supported");
    const auto& e = lms.entries;
    std::vector<SelfConsistentSolution> out;

    for (unsigned mask = 1; mask < (1u << k); ++mask) {
        std::vector<int> subset;
        for (int j = 0; j < k; ++j)
            if (mask >> j & 1u) subset.push_back(j);
        const int m = static_cast<int>(subset.size());
        // Rows: equal active values relative to the first member, then sum(pi) = 1.
        Eigen::MatrixXd M(m, m);
        Eigen::VectorXd r(m);
        const int first = subset[0];
        for (int row = 0; row + 1 < m; ++row) {
            const int j = subset[row + 1];
            const Vec dp = e[j].momentum - e[first].momentum;
            for (int col = 0; col < m; ++col) M(row, col) = dp.dot(e[subset[col]].velocity);
            r[row] = e[j].energy - e[first].energy;
        }
        M.row(m - 1).setOnes();
        r[m - 1] = 1.0;
        const Eigen::VectorXd pi = M.completeOrthogonalDecomposition().solve(r);
        if ((M * pi - r).norm() > 1e-9 * (1.0 + r.norm())) continue;
        if (pi.minCoeff() < -tol) continue;

        Vec v = Vec::Zero(lms.dim());
        for (int col = 0; col < m; ++col) v += pi[col] * e[subset[col]].velocity;
        if (active_set(lms, model, v, std::max(tol, 1e-12)) != subset) continue;

        bool duplicate = false;
        for (const auto& s : out) duplicate = duplicate || (s.v_dagger - v).norm() <= 1e-8 * (1.0 + v.norm());
        if (duplicate) continue;
        SelfConsistentSolution sol;
        sol.v_dagger = v;
        sol.active_set = subset;
        for (int col = 0; col < m; ++col) sol.shares.push_back(std::max(0.0, pi[col]));
        out.push_back(std::move(sol));
    }
    return out;
}

RegularizationReport compare_regularizations(const LimitMomentumSet& lms, const HamiltonianModel& model,
                                             const SdeEnsemble* sde, double tol) {
    RegularizationReport rep;
    rep.tolerance = tol;
    rep.admissible = admissible_velocity(lms, model);
    for (auto& sol : self_consistent_velocity(lms, model)) {
        CandidateVerdict cv;
        cv.distance = (sol.v_dagger - rep.admissible.v_star).norm();
        cv.coincide = cv.distance <= tol * (1.0 + rep.admissible.v_star.norm());
        cv.candidate = std::move(sol);
        rep.candidates.push_back(std::move(cv));
    }
    if (sde) {
        rep.sde = *sde;
        auto within = [&](const Vec& v) {
            bool ok = true;
            for (int k = 0; k < sde->mean_velocity.size(); ++k)
                ok = ok && std::abs(sde->mean_velocity[k] - v[k]) <= 3.0 * sde->mean_velocity_stderr[k] + 1e-12;
            return ok;
        };
        rep.sde_consistent_with_admissible = within(rep.admissible.v_star);
        for (auto& cv : rep.candidates) cv.sde_consistent = within(cv.candidate.v_dagger);
    }
    return rep;
}

std::string RegularizationReport::summary() const {
    std::ostringstream os;
    os.precision(10);
    os << "v* = " << admissible.v_star.transpose() << "\n";
    for (const auto& c : candidates) {
        os << "v_dagger = " << c.candidate.v_dagger.transpose() << "  |v_dagger - v*| = " << c.distance << "  "
           << (c.coincide ? "coincide" : "differ");
        if (sde) os << (c.sde_consistent ? "  sde consistent" : "  sde inconsistent");
        os << "\n";
    }
    if (sde)
        os << "sde mean velocity = " << sde->mean_velocity.transpose() << " +/- "
           << sde->mean_velocity_stderr.transpose() << "  "
           << (sde_consistent_with_admissible ? "consistent with v*" : "inconsistent with v*") << "\n";
    return os.str();
}

}  // namespace shockflow
