// Acceptance suite: one PASS/FAIL line per criterion, with measured values and runtime.

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "shockflow/admissible.hpp"
#include "shockflow/experiments.hpp"
#include "shockflow/flow.hpp"
#include "shockflow/hopf_lax.hpp"
#include "shockflow/stochastic.hpp"
#include "shockflow/superdiff.hpp"
#include "shockflow/viscous.hpp"
#include "support.hpp"

using namespace shockflow;
using sft::vec;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void criterion(const std::string& name, double budget_s, const std::function<Outcome()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
        out = body();
    } catch (const std::exception& e) {
        out = {false, std::string("exception: ") + e.what()};
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (budget_s > 0 && elapsed > budget_s) {
        out.pass = false;
        out.detail += " [over runtime budget " + std::to_string(budget_s) + " s]";
    }
    if (!out.pass) ++failures;
    std::printf("%s  %-44s %8.2f s  %s\n", out.pass ? "PASS" : "FAIL", name.c_str(), elapsed, out.detail.c_str());
    std::fflush(stdout);
}

std::string fmt(double x) {
    std::ostringstream s;
    s.precision(6);
    s << x;
    return s.str();
}

const auto quad1 = HamiltonianModel::quadratic(1);

struct BenchCase {
    ShockInstance inst;
    AdmissibleSolution sol;
    double step = 0;
    std::mt19937_64 rng;
};

// The admissible-bench instance family with its default settings (seed 1, d <= 3, k <= 6).
std::vector<BenchCase>& bench_cases() {
    static std::vector<BenchCase> cases = [] {
        std::vector<BenchCase> out;
        const std::uint64_t seed = 1;
        for (std::size_t i = 0; i < 200; ++i) {
            std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                              static_cast<std::uint32_t>(i)};
            std::mt19937_64 rng(seq);
            const int dim = 1 + static_cast<int>((i / 4) % 3);
            const int k = 2 + static_cast<int>((i / 12) % 5);
            auto inst = random_instance(rng, static_cast<int>(i), dim, k);
            auto sol = admissible_velocity(inst.lms, inst.model);
            out.push_back({std::move(inst), std::move(sol), dim == 1 ? 1e-3 : 5e-3, rng});
        }
        return out;
    }();
    return cases;
}

bool decreasing(const std::vector<double>& xs) {
    for (std::size_t i = 1; i < xs.size(); ++i)
        if (!(xs[i] < xs[i - 1])) return false;
    return true;
}

std::string join(const std::vector<double>& xs) {
    std::string s = "[";
    for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ", " : "") + fmt(xs[i]);
    return s + "]";
}

}  // namespace

int main() {
    criterion("preshock superdifferential", 1.0, [] {
        const double tau = 0.1;
        const auto ic = InitialCondition::neg_power(1);
        const double value = solve_value(ic, quad1, tau, vec({0})).value;
        const double value_err = std::abs(value + 8.0 / 3.0 * tau * tau * tau);
        const auto lms = limit_data(ic, quad1, tau, vec({0}));
        double p_err = 1e9, h_err = 1e9;
        if (lms.k() == 2) {
            const double lo = std::min(lms.entries[0].momentum(0), lms.entries[1].momentum(0));
            const double hi = std::max(lms.entries[0].momentum(0), lms.entries[1].momentum(0));
            p_err = std::max(std::abs(lo + 0.4), std::abs(hi - 0.4));
            h_err = std::max(std::abs(lms.entries[0].energy - 0.08), std::abs(lms.entries[1].energy - 0.08));
        }
        return Outcome{value_err <= 1e-6 && p_err <= 1e-3 && h_err <= 1e-4,
                       "value err " + fmt(value_err) + ", momentum err " + fmt(p_err) + ", energy err " + fmt(h_err)};
    });

    criterion("1D Rankine-Hugoniot equivalence", 10.0, [] {
        Mat a(1, 1);
        a << 2.5;
        const std::vector<HamiltonianModel> models{quad1, HamiltonianModel::anisotropic(a),
                                                   HamiltonianModel::power_law(1, 1.5), HamiltonianModel::power_law(1, 4.0),
                                                   HamiltonianModel::cosh_sum(1)};
        std::mt19937_64 rng(2024);
        double worst = 0.0;
        for (const auto& model : models) {
            for (int i = 0; i < 100; ++i) {
                const auto ps = sft::separated_momenta(rng, 1, 2, 0.05);
                const auto lms = limit_set_from_momenta(model, ps);
                const double rh = (lms.entries[0].energy - lms.entries[1].energy) / (ps[0](0) - ps[1](0));
                worst = std::max(worst, std::abs(admissible_velocity(lms, model).v_star(0) - rh));
            }
        }
        return Outcome{worst <= 1e-8, "500 pairs over 5 models, worst |v* - RH| = " + fmt(worst)};
    });

    criterion("smallest-ball reduction", 10.0, [] {
        std::mt19937_64 rng(2025);
        double worst = 0.0;
        for (int i = 0; i < 100; ++i) {
            const int d = 2 + i % 2, k = 2 + i % 5;
            const auto model = HamiltonianModel::quadratic(d);
            const auto lms = limit_set_from_momenta(model, sft::separated_momenta(rng, d, k, 0.05));
            std::vector<Vec> vs;
            for (const auto& e : lms.entries) vs.push_back(e.velocity);
            worst = std::max(worst, (admissible_velocity(lms, model).v_star - sft::meb_by_enumeration(vs).center).norm());
        }
        return Outcome{worst <= 1e-8, "100 instances, worst |v* - ball center| = " + fmt(worst)};
    });

    criterion("lhat oracle equivalence (2 grid steps)", 300.0, [] {
        int within = 0, euclid_over = 0, sup_over = 0, value_ok = 0;
        double worst_ratio = 0.0, worst_abs = 0.0, worst_refined = 0.0;
        for (auto& c : bench_cases()) {
            const Vec g = grid_minimize_lhat(c.inst.lms, c.inst.model, c.step);
            const double gap = (g - c.sol.v_star).norm();
            if (gap > 2 * c.step) {
                // diagnostic: how the lattice argmin moves when the step shrinks fourfold
                const Vec fine = grid_minimize_lhat(c.inst.lms, c.inst.model, c.step / 4);
                worst_abs = std::max(worst_abs, gap);
                worst_refined = std::max(worst_refined, (fine - c.sol.v_star).norm());
            }
            const double sup_gap = (g - c.sol.v_star).cwiseAbs().maxCoeff();
            within += gap <= 2 * c.step;
            euclid_over += gap > 2 * c.step;
            sup_over += sup_gap > 2 * c.step;
            worst_ratio = std::max(worst_ratio, gap / c.step);
            value_ok += lhat(c.inst.lms, c.inst.model, c.sol.v_star) <= lhat(c.inst.lms, c.inst.model, g) + 1e-12;
        }
        return Outcome{within == 200, std::to_string(within) + "/200 within 2h (" + std::to_string(sup_over) +
                                          " beyond 2h in max-norm); worst gap " + fmt(worst_ratio) +
                                          " h; failing cases: worst gap " + fmt(worst_abs) + " at h, " +
                                          fmt(worst_refined) + " at h/4; lhat(v*) <= lattice minimum on " +
                                          std::to_string(value_ok) + "/200"};
    });

    criterion("admissibility certification", 0.0, [] {
        int accepted = 0, rejected = 0, degenerate = 0;
        double worst_hull = 0.0;
        for (auto& c : bench_cases()) {
            const auto verdict = check_admissibility(c.inst.lms, c.inst.model, c.sol.v_star);
            accepted += verdict.accepted && verdict.hull_distance <= 1e-8;
            worst_hull = std::max(worst_hull, verdict.hull_distance);
            auto rng = c.rng;
            Vec dir(c.inst.model.dim());
            std::normal_distribution<double> normal;
            for (int d = 0; d < dir.size(); ++d) dir(d) = normal(rng);
            const Vec probe = c.sol.v_star + 0.1 * dir.normalized();
            const auto pv = check_admissibility(c.inst.lms, c.inst.model, probe);
            if (!pv.accepted) {
                ++rejected;
            } else {
                const double gap = lhat(c.inst.lms, c.inst.model, probe) - lhat(c.inst.lms, c.inst.model, c.sol.v_star);
                degenerate += pv.hull_distance <= 1e-6 && gap <= 1e-6;
            }
        }
        const bool pass = accepted == 200 && rejected >= 198 && rejected + degenerate == 200;
        return Outcome{pass, "certified " + std::to_string(accepted) + "/200 (worst hull " + fmt(worst_hull) +
                                 "), perturbed rejected " + std::to_string(rejected) + "/200"};
    });

    auto anomaly_case = [](const HamiltonianModel& model) {
        const auto ic = InitialCondition::neg_abs(1);
        const auto path = integrate_flow(ic, model, {vec({0})}, 1.0, 1e-3).front();
        const auto series = solve_viscous(ic, model, 0.01, 1.0, 2048);
        const auto an = anomaly_along(series, model, path);
        const double measured = plateau(an.times, an.viscous_term, 0.5);
        const auto sol = admissible_velocity(limit_data(ic, model, 1.0, path.positions.back()), model);
        const double expected = -sol.anomaly;
        const double rel = std::abs(measured - expected) / std::abs(expected);
        return Outcome{rel <= 0.05, "plateau " + fmt(measured) + " vs " + fmt(expected) + " (rel err " + fmt(rel) + ")"};
    };
    criterion("dissipative anomaly, quadratic", 120.0, [&] { return anomaly_case(quad1); });
    criterion("dissipative anomaly, power a=4", 120.0, [&] { return anomaly_case(HamiltonianModel::power_law(1, 4.0)); });

    criterion("vanishing-viscosity flow convergence", 120.0, [] {
        const auto ic = InitialCondition::neg_abs(1);
        const auto inviscid = integrate_flow(ic, quad1, {vec({0.5})}, 1.0, 1e-3).front();
        std::vector<double> dist;
        for (double mu : {0.08, 0.04, 0.02, 0.01}) {
            const auto series = solve_viscous(ic, quad1, mu, 1.0, 2048);
            const auto path = integrate_regularized_flow(series, quad1, vec({0.5}), 1e-3).trajectory;
            double d = 0.0;
            for (std::size_t i = 0; i < path.positions.size(); ++i)
                d = std::max(d, (path.positions[i] - inviscid.positions[i]).norm());
            dist.push_back(d);
        }
        return Outcome{decreasing(dist) && dist.back() <= 0.05, "sup distances " + join(dist)};
    });

    criterion("coalescence and shock membership", 0.0, [] {
        const double dt = 1e-3;
        const auto ic = InitialCondition::neg_abs(1);
        const auto trajs = integrate_flow(ic, quad1, {vec({0.5}), vec({-0.3})}, 1.0, dt);
        const double tol = 2 * dt * flow_speed_bound(ic, quad1);
        bool merged = true;
        double worst = 0.0;
        for (std::size_t i = 0; i < trajs[0].times.size(); ++i) {
            if (trajs[0].times[i] < 0.55 - 1e-12) continue;
            const double d = (trajs[0].positions[i] - trajs[1].positions[i]).norm();
            worst = std::max(worst, d);
            merged &= d <= tol;
        }
        merged &= trajs[1].merged_into.has_value() && *trajs[1].merge_time <= 0.55;

        struct Shipped {
            InitialCondition ic;
            HamiltonianModel model;
            std::vector<Vec> seeds;
        };
        const std::vector<Shipped> shipped{
            {InitialCondition::neg_abs(1), quad1, {vec({0.5}), vec({-0.3}), vec({1.2}), vec({-2})}},
            {InitialCondition::neg_abs(1, 0.2), quad1, {vec({0.5}), vec({-0.3})}},
            {InitialCondition::neg_abs(1), HamiltonianModel::power_law(1, 4.0), {vec({0.5}), vec({-0.3})}},
            {InitialCondition::neg_power(1), quad1, {vec({0.1}), vec({-0.2})}},
            {InitialCondition::cosine(1, 1.0), quad1, {vec({0.4}), vec({-0.6})}},
            {InitialCondition::neg_abs(2), HamiltonianModel::quadratic(2), {vec({0.5, 0}), vec({-0.3, 0.5})}},
        };
        int reversions = 0, entered = 0;
        for (const auto& s : shipped) {
            for (const auto& tr : integrate_flow(s.ic, s.model, s.seeds, 1.5, dt)) {
                if (!tr.shock_entry) continue;
                ++entered;
                for (std::size_t i = 0; i < tr.times.size(); ++i)
                    if (tr.times[i] > *tr.shock_entry && !tr.on_shock[i]) ++reversions;
            }
        }
        return Outcome{merged && reversions == 0,
                       "pair distance after t=0.55 <= " + fmt(worst) + " (tol " + fmt(tol) + "); " +
                           std::to_string(entered) + " shock entries, " + std::to_string(reversions) + " reversions"};
    });

    criterion("quadratic coincidence of regularizations", 180.0, [] {
        std::mt19937_64 rng(2026);
        double worst = 0.0;
        bool unique = true;
        const auto model = HamiltonianModel::quadratic(2);
        for (int i = 0; i < 50; ++i) {
            const auto lms = limit_set_from_momenta(model, sft::separated_momenta(rng, 2, 2 + i % 3, 0.05));
            const auto sols = self_consistent_velocity(lms, model);
            unique &= sols.size() == 1;
            if (!sols.empty()) worst = std::max(worst, (sols[0].v_dagger - admissible_velocity(lms, model).v_star).norm());
        }
        SdeOptions o;
        o.epsilon = 0.05;
        o.n_paths = 400;
        o.T = 1.0;
        o.rng_seed = 1;
        const auto e = simulate_sde(InitialCondition::neg_abs(1), quad1, vec({0}), o);
        bool occ_ok = e.occupancy.size() == 2;
        std::string occ;
        for (std::size_t j = 0; j < e.occupancy.size(); ++j) {
            occ_ok &= std::abs(e.occupancy[j] - 0.5) <= 3 * e.occupancy_stderr[j];
            occ += (j ? ", " : "") + fmt(e.occupancy[j]) + " +- " + fmt(e.occupancy_stderr[j]);
        }
        return Outcome{unique && worst <= 1e-8 && occ_ok,
                       std::string(unique ? "unique" : "NOT unique") + " v-dagger, worst |v-dagger - v*| = " + fmt(worst) +
                           "; occupancy (" + occ + ")"};
    });

    criterion("nonuniqueness rejection", 0.0, [] {
        const auto ic = InitialCondition::zero(1);
        double worst = 0.0;
        for (int i = 0; i <= 100; ++i) {
            const double t = 0.01 + 0.02 * i;
            const double x = -3.0 + 0.06 * i;
            worst = std::max(worst, std::abs(evaluate_phi(ic, quad1, t, vec({x}))));
        }
        return Outcome{worst == 0.0, "max |phi| over 101 samples = " + fmt(worst)};
    });

    std::printf("%d criterion failure(s)\n", failures);
    return failures == 0 ? 0 : 1;
}
