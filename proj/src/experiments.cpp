#include "shockflow/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "shockflow/errors.hpp"
#include "shockflow/flow.hpp"
#include "shockflow/parallel.hpp"
#include "shockflow/stochastic.hpp"
#include "shockflow/viscous.hpp"

namespace shockflow {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double x) {
    if (!std::isfinite(x)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

/// Header-first CSV writer with fixed number formatting.
class Csv {
public:
    Csv(const fs::path& path, const std::vector<std::string>& header) : out_(path) {
        if (!out_) throw NumericalFailure("output", "cannot write " + path.string());
        row(header);
    }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
        out_ << '\n';
    }

private:
    std::ofstream out_;
};

std::vector<std::string> coord_header(int dim) {
    std::vector<std::string> h;
    for (int k = 0; k < dim; ++k) h.push_back("x" + std::to_string(k + 1));
    return h;
}

void append(std::vector<std::string>& row, const Vec& v) {
    for (int k = 0; k < v.size(); ++k) row.push_back(fmt(v[k]));
}

json to_json(const Vec& v) {
    json a = json::array();
    for (int k = 0; k < v.size(); ++k) a.push_back(v[k]);
    return a;
}

SuperdiffOptions superdiff_options(const ExperimentConfig& c) {
    SuperdiffOptions o;
    o.momentum_cluster_tol = c.real("superdiff.momentum_cluster_tol");
    o.hopf_lax.value_rel_tol = c.real("hopf_lax.value_rel_tol");
    o.hopf_lax.scan_points = static_cast<int>(c.integer("hopf_lax.scan_points"));
    return o;
}

FlowOptions flow_options(const ExperimentConfig& c) {
    FlowOptions o;
    o.superdiff = superdiff_options(c);
    o.admissible.tie_tol = c.real("admissible.tie_tol");
    o.admissible.certify_tol = c.real("admissible.certify_tol");
    o.merge_tol = c.real("flow.merge_tol");
    return o;
}

std::vector<Vec> checked_points(const ExperimentConfig& c, const std::string& key, int dim) {
    auto pts = c.vectors(key);
    for (const auto& p : pts)
        if (p.size() != dim) throw ConfigError(key, "points must have " + std::to_string(dim) + " components");
    return pts;
}

void write_trajectories(const fs::path& path, const std::vector<ParticleTrajectory>& trajs, int dim) {
    auto header = std::vector<std::string>{"traj_id", "t"};
    for (auto& h : coord_header(dim)) header.push_back(h);
    header.push_back("on_shock");
    header.push_back("merged_into");
    Csv csv(path, header);
    for (const auto& tr : trajs)
        for (std::size_t s = 0; s < tr.times.size(); ++s) {
            std::vector<std::string> row{std::to_string(tr.id), fmt(tr.times[s])};
            append(row, tr.positions[s]);
            row.push_back(tr.on_shock[s] ? "1" : "0");
            const bool merged = tr.merged_into && tr.merge_time && tr.times[s] >= *tr.merge_time;
            row.push_back(merged ? std::to_string(*tr.merged_into) : "-1");
            csv.row(row);
        }
}

// Samples that returned to the smooth region after entering a shock.
int shock_reversions(const ParticleTrajectory& tr) {
    int count = 0;
    bool entered = false;
    for (char s : tr.on_shock) {
        if (s) entered = true;
        else if (entered) ++count;
    }
    return count;
}

// ---------------------------------------------------------------- solve

RunResult run_solve(const ExperimentConfig& c, const fs::path& dir) {
    const auto ic = make_fixture(c);
    const auto model = make_model(c);
    const int dim = ic.dim();
    if (dim > 2) throw ConfigError("fixture.dim", "the solve experiment writes fields for d <= 2");
    const auto times = c.reals("solve.times");
    const double lo = c.real("solve.x_min"), hi = c.real("solve.x_max");
    if (!(hi > lo)) throw ConfigError("solve.x_max", "must exceed solve.x_min");
    const int n = static_cast<int>(c.integer("solve.points"));
    const auto sd = superdiff_options(c);

    std::vector<Vec> points;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < (dim == 2 ? n : 1); ++j) {
            Vec x(dim);
            x[0] = lo + (hi - lo) * i / (n - 1);
            if (dim == 2) x[1] = lo + (hi - lo) * j / (n - 1);
            points.push_back(x);
        }

    auto header = std::vector<std::string>{"t"};
    for (auto& h : coord_header(dim)) header.push_back(h);
    auto field_header = header;
    field_header.push_back("phi");
    auto shock_header = header;
    shock_header.push_back("k");
    for (int k = 0; k < dim; ++k) shock_header.push_back("v" + std::to_string(k + 1));
    Csv field(dir / "field.csv", field_header);
    Csv shocks(dir / "shocks.csv", shock_header);

    std::size_t shock_count = 0;
    for (double t : times) {
        std::vector<double> phi(points.size());
        std::vector<LimitMomentumSet> lms(points.size());
        parallel_for(points.size(), [&](std::size_t i) {
            const ValueResult vr = solve_value(ic, model, t, points[i], sd.hopf_lax);
            phi[i] = vr.value;
            if (vr.minimizers.size() > 1) lms[i] = limit_data(ic, model, t, points[i], sd);
        });
        for (std::size_t i = 0; i < points.size(); ++i) {
            std::vector<std::string> row{fmt(t)};
            append(row, points[i]);
            row.push_back(fmt(phi[i]));
            field.row(row);
            if (lms[i].k() >= 2) {
                ++shock_count;
                std::vector<std::string> srow{fmt(t)};
                append(srow, points[i]);
                srow.push_back(std::to_string(lms[i].k()));
                append(srow, admissible_velocity(lms[i], model).v_star);
                shocks.row(srow);
            }
        }
    }
    RunResult r;
    r.outputs = {"field.csv", "shocks.csv"};
    r.summary = {{"points", points.size()}, {"times", times}, {"shock_points", shock_count}};
    return r;
}

// ---------------------------------------------------------------- particles

RunResult run_particles(const ExperimentConfig& c, const fs::path& dir) {
    const auto ic = make_fixture(c);
    const auto model = make_model(c);
    const auto seeds = checked_points(c, "flow.seeds", ic.dim());
    const double T = c.real("flow.T"), dt = c.real("flow.dt");
    const auto opts = flow_options(c);
    auto trajs = integrate_flow(ic, model, seeds, T, dt, opts);
    write_trajectories(dir / "trajectories.csv", trajs, ic.dim());

    const double tol = opts.merge_tol >= 0 ? opts.merge_tol : 2.0 * dt * flow_speed_bound(ic, model);
    json per = json::array();
    int reversions = 0;
    for (const auto& tr : trajs) {
        reversions += shock_reversions(tr);
        per.push_back({{"id", tr.id},
                       {"seed", to_json(tr.seed)},
                       {"final", to_json(tr.positions.back())},
                       {"shock_entry", tr.shock_entry ? json(*tr.shock_entry) : json(nullptr)},
                       {"merged_into", tr.merged_into ? json(*tr.merged_into) : json(nullptr)},
                       {"merge_time", tr.merge_time ? json(*tr.merge_time) : json(nullptr)}});
    }
    const auto classes = coalescence_classes_at(trajs, tol, trajs.front().times.size() - 1);
    RunResult r;
    r.outputs = {"trajectories.csv"};
    r.summary = {{"merge_tol", tol},
                 {"classes", classes},
                 {"shock_reversions", reversions},
                 {"trajectories", per}};
    return r;
}

// ---------------------------------------------------------------- viscous

std::vector<ViscousSeries> solve_ladder(const InitialCondition& ic, const HamiltonianModel& model,
                                        const std::vector<double>& mus, double T, int n,
                                        const ViscousOptions& vo) {
    std::vector<ViscousSeries> ladder(mus.size());
    parallel_for(mus.size(), [&](std::size_t i) { ladder[i] = solve_viscous(ic, model, mus[i], T, n, vo); });
    return ladder;
}

void write_field(const fs::path& path, const GridField& f) {
    auto header = std::vector<std::string>{"t"};
    for (auto& h : coord_header(f.dim)) header.push_back(h);
    header.push_back("phi");
    Csv csv(path, header);
    for (std::size_t i = 0; i < f.size(); ++i) {
        std::vector<std::string> row{fmt(f.t)};
        append(row, f.node_position(i));
        row.push_back(fmt(f.node_value(i)));
        csv.row(row);
    }
}

double sup_distance(const ParticleTrajectory& a, const ParticleTrajectory& b) {
    double d = 0.0;
    const std::size_t n = std::min(a.positions.size(), b.positions.size());
    for (std::size_t i = 0; i < n; ++i) d = std::max(d, (a.positions[i] - b.positions[i]).norm());
    return d;
}

bool decreasing(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] < v[i - 1])) return false;
    return true;
}

RunResult run_viscous_compare(const ExperimentConfig& c, const fs::path& dir) {
    const auto ic = make_fixture(c);
    const auto model = make_model(c);
    const int dim = ic.dim();
    const auto mus = c.reals("viscous.mu_ladder");
    if (mus.empty()) throw ConfigError("viscous.mu_ladder", "ladder must not be empty");
    const double T = c.real("viscous.T");
    const int n = static_cast<int>(c.integer("viscous.N"));
    const double flow_dt = c.real("viscous.flow_dt");
    const double window = c.real("viscous.window");
    const Vec seed = checked_points(c, "viscous.seed", dim).front();
    ViscousOptions vo;
    vo.dt = c.real("viscous.dt");
    vo.frame_dt = c.real("viscous.frame_dt");

    const auto ladder = solve_ladder(ic, model, mus, T, n, vo);
    const auto fo = flow_options(c);
    const auto inviscid = integrate_flow(ic, model, {seed}, T, flow_dt, fo).front();

    // Hopf-Lax reference at the final time on the grid nodes inside the window.
    const GridField& probe = ladder.front().frames.back();
    std::vector<std::size_t> nodes;
    for (std::size_t i = 0; i < probe.size(); ++i)
        if (probe.node_position(i).cwiseAbs().maxCoeff() <= window) nodes.push_back(i);
    std::vector<double> exact(nodes.size());
    parallel_for(nodes.size(), [&](std::size_t j) {
        exact[j] = solve_value(ic, model, T, probe.node_position(nodes[j]), fo.superdiff.hopf_lax).value;
    });

    const Vec x_end = inviscid.positions.back();
    const LimitMomentumSet lms = limit_data(ic, model, T, x_end, fo.superdiff);
    const auto hull = gradient_limit_check(ladder, lms);

    std::vector<ParticleTrajectory> trajs{inviscid};
    std::vector<double> phi_err, flow_dist;
    Csv conv(dir / "convergence.csv",
             {"mu", "phi_sup_error", "flow_sup_distance", "gradient_hull_distance", "extrapolated"});
    for (std::size_t i = 0; i < ladder.size(); ++i) {
        const GridField& f = ladder[i].frames.back();
        double err = 0.0;
        for (std::size_t j = 0; j < nodes.size(); ++j) err = std::max(err, std::abs(f.node_value(nodes[j]) - exact[j]));
        auto path = integrate_regularized_flow(ladder[i], model, seed, flow_dt, T);
        path.trajectory.id = static_cast<int>(i) + 1;
        const double dist = sup_distance(path.trajectory, inviscid);
        phi_err.push_back(err);
        flow_dist.push_back(dist);
        conv.row({fmt(mus[i]), fmt(err), fmt(dist), fmt(hull[i]), path.extrapolated ? "1" : "0"});
        trajs.push_back(std::move(path.trajectory));
        write_field(dir / ("field_mu" + std::to_string(i) + ".csv"), f);
    }
    write_trajectories(dir / "trajectories.csv", trajs, dim);

    RunResult r;
    r.outputs = {"convergence.csv", "trajectories.csv"};
    for (std::size_t i = 0; i < ladder.size(); ++i) r.outputs.push_back("field_mu" + std::to_string(i) + ".csv");
    r.summary = {{"mu_ladder", mus},
                 {"phi_sup_error", phi_err},
                 {"flow_sup_distance", flow_dist},
                 {"gradient_hull_distance", hull},
                 {"phi_error_decreasing", decreasing(phi_err)},
                 {"flow_distance_decreasing", decreasing(flow_dist)},
                 {"shock_k_at_end", lms.k()}};
    return r;
}

RunResult run_anomaly(const ExperimentConfig& c, const fs::path& dir) {
    const auto ic = make_fixture(c);
    const auto model = make_model(c);
    const double mu = c.real("viscous.mu");
    const double T = c.real("viscous.T");
    const int n = static_cast<int>(c.integer("viscous.N"));
    const double flow_dt = c.real("viscous.flow_dt");
    const double from = c.real("anomaly.plateau_from");
    if (from >= T) throw ConfigError("anomaly.plateau_from", "must precede viscous.T");
    const Vec point = checked_points(c, "anomaly.point", ic.dim()).front();
    ViscousOptions vo;
    vo.dt = c.real("viscous.dt");
    vo.frame_dt = c.real("viscous.frame_dt");

    const auto fo = flow_options(c);
    const auto shock_path = integrate_flow(ic, model, {point}, T, flow_dt, fo).front();
    const auto series = solve_viscous(ic, model, mu, T, n, vo);
    const auto an = anomaly_along(series, model, shock_path);

    {
        Csv csv(dir / "anomaly.csv", {"t", "value"});
        for (std::size_t i = 0; i < an.times.size(); ++i) csv.row({fmt(an.times[i]), fmt(an.viscous_term[i])});
        Csv res(dir / "anomaly_residual.csv", {"t", "value"});
        for (std::size_t i = 0; i < an.times.size(); ++i) res.row({fmt(an.times[i]), fmt(an.residual[i])});
    }
    const double measured = plateau(an.times, an.viscous_term, from);
    const double residual = plateau(an.times, an.residual, from);
    const LimitMomentumSet lms = limit_data(ic, model, T, shock_path.positions.back(), fo.superdiff);
    const AdmissibleSolution sol = admissible_velocity(lms, model, fo.admissible);
    const double expected = -sol.anomaly;

    RunResult r;
    r.outputs = {"anomaly.csv", "anomaly_residual.csv"};
    r.summary = {{"mu", mu},
                 {"plateau", measured},
                 {"residual_plateau", residual},
                 {"expected", expected},
                 {"relative_error", expected != 0 ? std::abs(measured - expected) / std::abs(expected) : 0.0},
                 {"shock_k", lms.k()},
                 {"v_star", to_json(sol.v_star)}};
    return r;
}

// ---------------------------------------------------------------- sde

RunResult run_sde(const ExperimentConfig& c, const fs::path& dir) {
    const auto ic = make_fixture(c);
    const auto model = make_model(c);
    const int dim = ic.dim();
    std::vector<double> eps;
    if (c.has("sde.epsilon_ladder")) eps = c.reals("sde.epsilon_ladder");
    if (eps.empty()) eps = {c.real("sde.epsilon")};
    SdeOptions so;
    so.t0 = c.real("sde.t0");
    so.T = c.real("sde.T");
    so.dt = c.real("sde.dt");
    so.n_paths = static_cast<int>(c.integer("sde.n_paths"));
    so.rng_seed = static_cast<std::uint64_t>(c.integer("rng_seed"));
    so.stored_paths = static_cast<std::size_t>(c.integer("sde.stored_paths"));
    so.superdiff = superdiff_options(c);
    const Vec seed = checked_points(c, "sde.seed_point", dim).front();

    auto occ_header = std::vector<std::string>{"epsilon", "branch"};
    for (int k = 0; k < dim; ++k) occ_header.push_back("p" + std::to_string(k + 1));
    occ_header.push_back("share");
    occ_header.push_back("stderr");
    Csv occ(dir / "occupancy.csv", occ_header);
    auto vel_header = std::vector<std::string>{"epsilon"};
    for (int k = 0; k < dim; ++k) vel_header.push_back("v" + std::to_string(k + 1));
    for (int k = 0; k < dim; ++k) vel_header.push_back("se" + std::to_string(k + 1));
    Csv vel(dir / "sde_velocity.csv", vel_header);

    json ensembles = json::array();
    std::optional<SdeEnsemble> first;
    for (double e : eps) {
        so.epsilon = e;
        SdeEnsemble ens = simulate_sde(ic, model, seed, so);
        for (std::size_t j = 0; j < ens.occupancy.size(); ++j) {
            std::vector<std::string> row{fmt(e), std::to_string(j)};
            append(row, ens.reference_momenta[j]);
            row.push_back(fmt(ens.occupancy[j]));
            row.push_back(fmt(ens.occupancy_stderr[j]));
            occ.row(row);
        }
        std::vector<std::string> vrow{fmt(e)};
        append(vrow, ens.mean_velocity);
        append(vrow, ens.mean_velocity_stderr);
        vel.row(vrow);
        ensembles.push_back({{"epsilon", e},
                             {"occupancy", ens.occupancy},
                             {"occupancy_stderr", ens.occupancy_stderr},
                             {"mean_velocity", to_json(ens.mean_velocity)},
                             {"mean_velocity_stderr", to_json(ens.mean_velocity_stderr)}});
        if (!first) first = std::move(ens);
    }
    write_trajectories(dir / "sde_paths.csv", first->paths, dim);

    const LimitMomentumSet lms = limit_set_from_momenta(model, first->reference_momenta);
    const auto report = compare_regularizations(lms, model, &*first);
    auto cmp_header = std::vector<std::string>{"candidate"};
    for (int k = 0; k < dim; ++k) cmp_header.push_back("v" + std::to_string(k + 1));
    cmp_header.push_back("distance_to_v_star");
    cmp_header.push_back("verdict");
    Csv cmp(dir / "comparison.csv", cmp_header);
    {
        std::vector<std::string> row{"v_star"};
        append(row, report.admissible.v_star);
        row.push_back("0");
        row.push_back("reference");
        cmp.row(row);
    }
    json cands = json::array();
    for (std::size_t i = 0; i < report.candidates.size(); ++i) {
        const auto& cv = report.candidates[i];
        std::vector<std::string> row{"v_dagger_" + std::to_string(i)};
        append(row, cv.candidate.v_dagger);
        row.push_back(fmt(cv.distance));
        row.push_back(cv.coincide ? "coincide" : "differ");
        cmp.row(row);
        cands.push_back({{"v_dagger", to_json(cv.candidate.v_dagger)},
                         {"active_set", cv.candidate.active_set},
                         {"shares", cv.candidate.shares},
                         {"distance", cv.distance},
                         {"verdict", cv.coincide ? "coincide" : "differ"},
                         {"sde_consistent", cv.sde_consistent}});
    }

    RunResult r;
    r.outputs = {"occupancy.csv", "sde_velocity.csv", "sde_paths.csv", "comparison.csv"};
    r.summary = {{"branches", lms.k()},
                 {"v_star", to_json(report.admissible.v_star)},
                 {"candidates", cands},
                 {"sde_consistent_with_v_star", report.sde_consistent_with_admissible},
                 {"ensembles", ensembles}};
    return r;
}

// ---------------------------------------------------------------- admissible bench

RunResult run_bench(const ExperimentConfig& c, const fs::path& dir) {
    const auto count = static_cast<std::size_t>(c.integer("bench.instances"));
    const int max_dim = static_cast<int>(c.integer("bench.max_dim"));
    const int max_k = static_cast<int>(c.integer("bench.max_k"));
    const double h1 = c.real("bench.grid_step_1d"), hd = c.real("bench.grid_step");
    const auto seed = static_cast<std::uint64_t>(c.integer("rng_seed"));
    AdmissibleOptions ao;
    ao.tie_tol = c.real("admissible.tie_tol");
    ao.certify_tol = c.real("admissible.certify_tol");

    struct Row {
        std::string kind;
        int dim = 0, k = 0;
        Vec v;
        double gap = 0, step = 0, hull = 0;
        bool accepted = false, rejected_perturbed = false;
    };
    std::vector<Row> rows(count);
    parallel_for(count, [&](std::size_t i) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(i)};
        std::mt19937_64 rng(seq);
        const int dim = 1 + static_cast<int>((i / 4) % max_dim);
        const int k = 2 + static_cast<int>((i / 12) % (max_k - 1));
        const auto inst = random_instance(rng, static_cast<int>(i), dim, k);
        const auto sol = admissible_velocity(inst.lms, inst.model, ao);
        const double step = dim == 1 ? h1 : hd;
        const Vec oracle = grid_minimize_lhat(inst.lms, inst.model, step);
        const auto verdict = check_admissibility(inst.lms, inst.model, sol.v_star, ao.tie_tol, ao.certify_tol);
        Vec dir_vec(dim);
        std::normal_distribution<double> normal;
        for (int d = 0; d < dim; ++d) dir_vec[d] = normal(rng);
        const Vec probe = sol.v_star + 0.1 * dir_vec.normalized();
        const auto perturbed = check_admissibility(inst.lms, inst.model, probe, ao.tie_tol, ao.certify_tol);
        Row& r = rows[i];
        r.kind = to_string(inst.model.kind());
        r.dim = dim;
        r.k = static_cast<int>(inst.lms.k());
        r.v = sol.v_star;
        r.gap = (oracle - sol.v_star).norm();
        r.step = step;
        r.hull = verdict.hull_distance;
        r.accepted = verdict.accepted;
        r.rejected_perturbed = !perturbed.accepted;
    });

    Csv csv(dir / "bench.csv", {"instance", "kind", "dim", "k", "v1", "v2", "v3", "oracle_gap", "grid_step",
                                "hull_distance", "accepted", "perturbed_rejected"});
    std::size_t within = 0, accepted = 0, rejected = 0;
    double worst_ratio = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Row& r = rows[i];
        std::vector<std::string> row{std::to_string(i), r.kind, std::to_string(r.dim), std::to_string(r.k)};
        for (int d = 0; d < 3; ++d) row.push_back(d < r.dim ? fmt(r.v[d]) : "");
        row.push_back(fmt(r.gap));
        row.push_back(fmt(r.step));
        row.push_back(fmt(r.hull));
        row.push_back(r.accepted ? "1" : "0");
        row.push_back(r.rejected_perturbed ? "1" : "0");
        csv.row(row);
        within += r.gap <= 2.0 * r.step;
        accepted += r.accepted;
        rejected += r.rejected_perturbed;
        worst_ratio = std::max(worst_ratio, r.gap / r.step);
    }
    RunResult res;
    res.outputs = {"bench.csv"};
    res.summary = {{"instances", count},
                   {"within_two_steps", within},
                   {"worst_gap_over_step", worst_ratio},
                   {"certified", accepted},
                   {"perturbed_rejected", rejected}};
    return res;
}

}  // namespace

std::vector<FixtureInfo> fixture_catalog() {
    return {
        {"zero", "phi_0 = 0", "fixture.dim"},
        {"constant", "phi_0 = c", "fixture.dim, fixture.value"},
        {"linear", "phi_0 = a . y", "fixture.slope"},
        {"neg_abs", "phi_0 = -|y_1| + drift * y_1 (standing or drifting shock)", "fixture.dim, fixture.drift"},
        {"neg_power", "phi_0 = -(4/3)|y_1|^(3/2) (preshock at the origin)", "fixture.dim"},
        {"cosine", "phi_0 = amplitude * sum_k cos y_k", "fixture.dim, fixture.amplitude"},
        {"min_affine", "phi_0 = min_i (p_i . y + c_i) (prescribed limit momenta)",
         "fixture.slopes, fixture.offsets"},
    };
}

HamiltonianModel make_model(const ExperimentConfig& c) {
    const int dim = static_cast<int>(c.integer("fixture.dim"));
    const std::string kind = c.text("hamiltonian.kind");
    if (kind == "quadratic") return HamiltonianModel::quadratic(dim);
    if (kind == "power") return HamiltonianModel::power_law(dim, c.real("hamiltonian.exponent"));
    if (kind == "cosh") return HamiltonianModel::cosh_sum(dim);
    if (!c.has("hamiltonian.matrix")) throw ConfigError("hamiltonian.matrix", "anisotropic kind needs a matrix");
    const auto a = c.reals("hamiltonian.matrix");
    if (static_cast<int>(a.size()) != dim * dim)
        throw ConfigError("hamiltonian.matrix", "expected " + std::to_string(dim * dim) + " entries");
    Mat m(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) m(i, j) = a[static_cast<std::size_t>(i * dim + j)];
    return HamiltonianModel::anisotropic(m);
}

InitialCondition make_fixture(const ExperimentConfig& c) {
    const int dim = static_cast<int>(c.integer("fixture.dim"));
    const std::string name = c.text("fixture.name");
    if (name == "zero") return InitialCondition::zero(dim);
    if (name == "constant") return InitialCondition::constant(dim, c.real("fixture.value"));
    if (name == "neg_abs") return InitialCondition::neg_abs(dim, c.real("fixture.drift"));
    if (name == "neg_power") return InitialCondition::neg_power(dim);
    if (name == "cosine") return InitialCondition::cosine(dim, c.real("fixture.amplitude"));
    if (name == "linear") {
        if (!c.has("fixture.slope")) throw ConfigError("fixture.slope", "linear fixture needs a slope");
        const auto s = c.reals("fixture.slope");
        if (static_cast<int>(s.size()) != dim) throw ConfigError("fixture.slope", "slope must have fixture.dim entries");
        Vec a(dim);
        for (int k = 0; k < dim; ++k) a[k] = s[static_cast<std::size_t>(k)];
        return InitialCondition::linear(a);
    }
    if (!c.has("fixture.slopes")) throw ConfigError("fixture.slopes", "min_affine fixture needs slopes");
    const auto slopes = c.vectors("fixture.slopes");
    for (const auto& s : slopes)
        if (s.size() != dim) throw ConfigError("fixture.slopes", "slopes must have fixture.dim entries");
    std::vector<double> offsets(slopes.size(), 0.0);
    if (c.has("fixture.offsets")) offsets = c.reals("fixture.offsets");
    return InitialCondition::min_affine(slopes, offsets);
}

ShockInstance random_instance(std::mt19937_64& rng, int kind_index, int dim, int k) {
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    static constexpr double kExponents[] = {1.5, 2.5, 4.0};
    auto model = [&]() {
        switch (kind_index % 4) {
            case 0: return HamiltonianModel::quadratic(dim);
            case 1: {
                Mat b(dim, dim);
                for (int i = 0; i < dim; ++i)
                    for (int j = 0; j < dim; ++j) b(i, j) = unit(rng);
                Mat a = b * b.transpose();
                a += 0.5 * Mat::Identity(dim, dim);
                return HamiltonianModel::anisotropic(a);
            }
            case 2: return HamiltonianModel::power_law(dim, kExponents[(kind_index / 4) % 3]);
            default: return HamiltonianModel::cosh_sum(dim);
        }
    }();
    std::vector<Vec> momenta;
    while (static_cast<int>(momenta.size()) < k) {
        Vec p(dim);
        for (int d = 0; d < dim; ++d) p[d] = 2.0 * unit(rng);
        bool distinct = true;
        for (const auto& q : momenta) distinct = distinct && (q - p).norm() > 0.05;
        if (distinct) momenta.push_back(p);
    }
    return {model, limit_set_from_momenta(model, momenta)};
}

Vec grid_minimize_lhat(const LimitMomentumSet& lms, const HamiltonianModel& model, double step) {
    using Index = std::vector<long long>;
    const int dim = lms.dim();
    Vec lo = lms.entries.front().velocity, hi = lo;
    for (const auto& e : lms.entries) {
        lo = lo.cwiseMin(e.velocity);
        hi = hi.cwiseMax(e.velocity);
    }
    const Vec pad = (0.5 * (hi - lo)).array() + 10.0 * step;
    lo -= pad;
    hi += pad;

    auto point = [&](const Index& node) {
        Vec v(dim);
        for (int d = 0; d < dim; ++d) v[d] = static_cast<double>(node[d]) * step;
        return v;
    };
    // Value and one subgradient grad L(v) - p_j, j attaining the max.
    auto evaluate = [&](const Vec& v, Vec& g) {
        std::size_t arg = 0;
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < lms.k(); ++i) {
            const double a = lms.entries[i].energy - lms.entries[i].momentum.dot(v);
            if (a > best) {
                best = a;
                arg = i;
            }
        }
        g = model.lagrangian_gradient(v) - lms.entries[arg].momentum;
        return model.lagrangian(v) + best;
    };
    struct Scan {
        Index best;
        double best_value = std::numeric_limits<double>::infinity();
        std::vector<double> values;
        std::vector<Vec> grads;
    };
    // Visits first + i * stride for i < n on every axis; axis 0 varies fastest.
    auto scan = [&](const Index& first, long long stride, const Index& n, bool keep) {
        Scan out;
        Index idx(dim, 0), node(dim);
        Vec g(dim);
        for (;;) {
            for (int d = 0; d < dim; ++d) node[d] = first[d] + idx[d] * stride;
            const double f = evaluate(point(node), g);
            if (f < out.best_value) {
                out.best_value = f;
                out.best = node;
            }
            if (keep) {
                out.values.push_back(f);
                out.grads.push_back(g);
            }
            int d = 0;
            while (d < dim && ++idx[d] == n[d]) idx[d++] = 0;
            if (d == dim) break;
        }
        return out;
    };

    // Every level lives on the lattice step * Z^d, so the answer is the exact
    // lattice minimizer inside the bracketing box.
    const long long target = dim == 1 ? 4000 : dim == 2 ? 160 : 40;
    for (int attempt = 0; attempt < 12; ++attempt) {
        Index first(dim), last(dim);
        for (int d = 0; d < dim; ++d) {
            first[d] = static_cast<long long>(std::floor(lo[d] / step));
            last[d] = static_cast<long long>(std::ceil(hi[d] / step));
        }
        const Index box_first = first, box_last = last;
        auto on_box_edge = [&](const Index& node) {
            for (int d = 0; d < dim; ++d)
                if (node[d] <= box_first[d] || node[d] >= box_last[d]) return true;
            return false;
        };
        long long previous_stride = std::numeric_limits<long long>::max();
        for (;;) {
            long long stride = 1;
            for (int d = 0; d < dim; ++d) {
                last[d] = std::max(last[d], first[d] + 1);
                stride = std::max(stride, (last[d] - first[d] + target - 1) / target);
            }
            // Guarantee progress when the bracket fails to shrink.
            if (stride >= previous_stride) stride = std::max<long long>(previous_stride / 2, 1);
            previous_stride = stride;
            Index n(dim);
            for (int d = 0; d < dim; ++d) {
                n[d] = (last[d] - first[d] + stride - 1) / stride + 1;
                last[d] = first[d] + (n[d] - 1) * stride;
            }
            const Scan sc = scan(first, stride, n, stride > 1);
            if (on_box_edge(sc.best)) break;
            if (stride == 1) return point(sc.best);

            // Convexity: on a cell, f >= f(c) + g_c . (u - c) for each corner c.
            // Keep the cells whose best such lower bound does not exceed the
            // coarse minimum, which bounds the lattice minimum from above.
            const double h = static_cast<double>(stride) * step;
            Index new_first(dim, std::numeric_limits<long long>::max());
            Index new_last(dim, std::numeric_limits<long long>::min());
            Index cell(dim, 0);
            for (;;) {
                double lower = -std::numeric_limits<double>::infinity();
                for (int c = 0; c < (1 << dim); ++c) {
                    std::size_t flat = 0, mul = 1;
                    double bound = 0.0;
                    for (int d = 0; d < dim; ++d) {
                        const int bit = (c >> d) & 1;
                        flat += static_cast<std::size_t>(cell[d] + bit) * mul;
                        mul *= static_cast<std::size_t>(n[d]);
                    }
                    const Vec& g = sc.grads[flat];
                    for (int d = 0; d < dim; ++d) {
                        const double toward = ((c >> d) & 1) ? -1.0 : 1.0;  // direction into the cell
                        bound += std::min(0.0, toward * g[d] * h);
                    }
                    lower = std::max(lower, sc.values[flat] + bound);
                }
                if (lower <= sc.best_value + 1e-12 * (1.0 + std::abs(sc.best_value)))
                    for (int d = 0; d < dim; ++d) {
                        new_first[d] = std::min(new_first[d], first[d] + cell[d] * stride);
                        new_last[d] = std::max(new_last[d], first[d] + (cell[d] + 1) * stride);
                    }
                int d = 0;
                while (d < dim && ++cell[d] == n[d] - 1) cell[d++] = 0;
                if (d == dim) break;
            }
            first = new_first;
            last = new_last;
        }
        const Vec mid = 0.5 * (lo + hi), half = hi - lo;
        lo = mid - half;
        hi = mid + half;
    }
    throw NumericalFailure("oracle", "grid search did not bracket the minimum");
}

RunResult run_experiment(const ExperimentConfig& config, const fs::path& out_override) {
    const fs::path dir = out_override.empty() ? fs::path(config.text("output.dir")) : out_override;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("output.dir", "cannot create " + dir.string() + ": " + ec.message());

    const auto start = std::chrono::steady_clock::now();
    const std::string kind = config.experiment();
    RunResult result;
    if (kind == "solve") result = run_solve(config, dir);
    else if (kind == "particles") result = run_particles(config, dir);
    else if (kind == "viscous-compare") result = run_viscous_compare(config, dir);
    else if (kind == "anomaly") result = run_anomaly(config, dir);
    else if (kind == "sde") result = run_sde(config, dir);
    else result = run_bench(config, dir);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    json manifest = {{"version", kVersion},
                     {"experiment", kind},
                     {"config", config.resolved()},
                     {"given", config.given()},
                     {"threads", worker_count()},
                     {"wall_time_s", wall},
                     {"outputs", result.outputs},
                     {"summary", result.summary}};
    std::ofstream(dir / "manifest.json") << manifest.dump(2) << '\n';
    result.outputs.push_back("manifest.json");
    return result;
}

}  // namespace shockflow
