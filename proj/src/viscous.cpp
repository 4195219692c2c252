#include "shockflow/viscous.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "shockflow/errors.hpp"
#include "shockflow/hull.hpp"

namespace shockflow {

namespace {

constexpr double kPi = std::numbers::pi;

double wrap(double x) {
    double w = std::fmod(x + kPi, 2.0 * kPi);
    if (w < 0) w += 2.0 * kPi;
    return w - kPi;
}

std::size_t node_count(int dim, int n) {
    std::size_t c = 1;
    for (int k = 0; k < dim; ++k) c *= static_cast<std::size_t>(n);
    return c;
}

// Offset of the neighbour one step along `axis` (periodic), for row-major storage.
struct Stencil {
    int dim, n;
    std::size_t stride(int axis) const { return axis == dim - 1 ? 1 : static_cast<std::size_t>(n); }
    int coord(std::size_t flat, int axis) const {
        return static_cast<int>((flat / stride(axis)) % static_cast<std::size_t>(n));
    }
    std::size_t shift(std::size_t flat, int axis, int by) const {
        const int c = coord(flat, axis);
        const int moved = ((c + by) % n + n) % n;
        return flat + (static_cast<std::ptrdiff_t>(moved) - c) * static_cast<std::ptrdiff_t>(stride(axis));
    }
};

// Corner nodes and multilinear weights for a point.
struct Cell {
    std::size_t nodes[4];
    double weights[4];
    int count;
};

Cell locate_cell(const GridField& f, const Vec& x) {
    int lo[2] = {0, 0}, hi[2] = {0, 0};
    double fr[2] = {0.0, 0.0};
    for (int k = 0; k < f.dim; ++k) {
        const double s = (wrap(x[k]) + kPi) / f.h;
        int i0 = static_cast<int>(std::floor(s));
        fr[k] = s - i0;
        i0 = ((i0 % f.n) + f.n) % f.n;
        lo[k] = i0;
        hi[k] = (i0 + 1) % f.n;
    }
    Cell c{};
    if (f.dim == 1) {
        c.count = 2;
        c.nodes[0] = lo[0];
        c.nodes[1] = hi[0];
        c.weights[0] = 1.0 - fr[0];
        c.weights[1] = fr[0];
    } else {
        c.count = 4;
        const auto n = static_cast<std::size_t>(f.n);
        c.nodes[0] = lo[0] * n + lo[1];
        c.nodes[1] = lo[0] * n + hi[1];
        c.nodes[2] = hi[0] * n + lo[1];
        c.nodes[3] = hi[0] * n + hi[1];
        c.weights[0] = (1 - fr[0]) * (1 - fr[1]);
        c.weights[1] = (1 - fr[0]) * fr[1];
        c.weights[2] = fr[0] * (1 - fr[1]);
        c.weights[3] = fr[0] * fr[1];
    }
    return c;
}

Vec node_gradient(const GridField& f, std::size_t flat) {
    const Stencil st{f.dim, f.n};
    Vec g(f.dim);
    for (int k = 0; k < f.dim; ++k)
        g[k] = (f.psi[st.shift(flat, k, 1)] - f.psi[st.shift(flat, k, -1)]) / (2.0 * f.h) + f.slope[k];
    return g;
}

double node_laplacian(const GridField& f, std::size_t flat) {
    const Stencil st{f.dim, f.n};
    double lap = 0.0;
    for (int k = 0; k < f.dim; ++k)
        lap += f.psi[st.shift(flat, k, 1)] - 2.0 * f.psi[flat] + f.psi[st.shift(flat, k, -1)];
    return lap / (f.h * f.h);
}

}  // namespace

double GridField::node_coord(int i) const noexcept { return -kPi + i * h; }

Vec GridField::node_position(std::size_t flat) const {
    const Stencil st{dim, n};
    Vec x(dim);
    for (int k = 0; k < dim; ++k) x[k] = node_coord(st.coord(flat, k));
    return x;
}

double GridField::node_value(std::size_t flat) const { return psi[flat] + slope.dot(node_position(flat)); }

double GridField::value(const Vec& x) const {
    const Cell c = locate_cell(*this, x);
    double v = 0.0;
    for (int i = 0; i < c.count; ++i) v += c.weights[i] * psi[c.nodes[i]];
    return v + slope.dot(x);
}

Vec GridField::gradient(const Vec& x) const {
    const Cell c = locate_cell(*this, x);
    Vec g = Vec::Zero(dim);
    for (int i = 0; i < c.count; ++i) g += c.weights[i] * node_gradient(*this, c.nodes[i]);
    return g;
}

double GridField::laplacian(const Vec& x) const {
    const Cell c = locate_cell(*this, x);
    double v = 0.0;
    for (int i = 0; i < c.count; ++i) v += c.weights[i] * node_laplacian(*this, c.nodes[i]);
    return v;
}

double GridField::time_rate(const Vec& x) const {
    const Cell c = locate_cell(*this, x);
    double v = 0.0;
    for (int i = 0; i < c.count; ++i) v += c.weights[i] * rate[c.nodes[i]];
    return v;
}

void ViscousSeries::locate(double t, std::size_t& k, double& w, bool& extrapolated) const {
    extrapolated = false;
    if (t <= frames.front().t) {
        k = 0;
        w = 0.0;
        return;
    }
    if (t >= frames.back().t) {
        k = frames.size() - 1;
        w = 0.0;
        extrapolated = t > frames.back().t + 1e-12 * (1.0 + std::abs(t));
        return;
    }
    const auto it = std::upper_bound(frames.begin(), frames.end(), t,
                                     [](double s, const GridField& f) { return s < f.t; });
    k = static_cast<std::size_t>(it - frames.begin()) - 1;
    w = (t - frames[k].t) / (frames[k + 1].t - frames[k].t);
}

Vec ViscousSeries::gradient(double t, const Vec& x, bool* extrapolated) const {
    std::size_t k;
    double w;
    bool ex;
    locate(t, k, w, ex);
    if (extrapolated) *extrapolated = ex;
    Vec g = frames[k].gradient(x);
    if (w > 0) g = (1.0 - w) * g + w * frames[k + 1].gradient(x);
    return g;
}

double ViscousSeries::value(double t, const Vec& x) const {
    std::size_t k;
    double w;
    bool ex;
    locate(t, k, w, ex);
    double v = frames[k].value(x);
    if (w > 0) v = (1.0 - w) * v + w * frames[k + 1].value(x);
    return v;
}

double viscous_stability_bound(const InitialCondition& ic, const HamiltonianModel& model, double mu, int n) {
    const double h = 2.0 * kPi / n;
    const double vmax = std::max(model.max_speed(ic.lipschitz()), 1e-12);
    return 0.25 * std::min(h * h / (2.0 * ic.dim() * mu), h / vmax);
}

ViscousSeries solve_viscous(const InitialCondition& ic, const HamiltonianModel& model, double mu, double T,
                            int n, const ViscousOptions& options) {
    const int dim = ic.dim();
    if (dim < 1 || dim > 2) throw ConfigError("fixture.dim", "viscous grids support d = 1 or 2");
    if (model.dim() != dim) throw ConfigError("hamiltonian.dim", "Hamiltonian and fixture dimensions differ");
    if (!(mu > 0)) throw ConfigError("viscous.mu", "viscosity mu must be positive");
    if (n < 8) throw ConfigError("viscous.N", "grid needs at least 8 nodes per axis");
    if (!(T > 0)) throw ConfigError("viscous.T", "horizon must be positive");
    if (!ic.periodizable()) throw ConfigError("fixture.name", ic.name() + " has no periodic form");

    const double bound = viscous_stability_bound(ic, model, mu, n);
    double dt = options.dt;
    if (dt < 0) throw ConfigError("viscous.dt", "time step must be nonnegative");
    if (dt == 0) dt = bound;
    if (dt > bound * (1.0 + 1e-12))
        throw ConfigError("viscous.dt", "dt = " + std::to_string(dt) + " exceeds the stability bound " +
                                            std::to_string(bound));
    if (T / dt > 1e9)
        throw ConfigError("viscous.T", "horizon needs more than 1e9 stable steps (dt bound " + std::to_string(bound) + ")");
    const auto steps = static_cast<std::size_t>(std::ceil(T / dt - 1e-9));
    dt = T / static_cast<double>(steps);

    double frame_dt = options.frame_dt > 0 ? options.frame_dt : T / (dim == 1 ? 1000.0 : 50.0);
    const auto stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(frame_dt / dt)));

    GridField field;
    field.dim = dim;
    field.n = n;
    field.h = 2.0 * kPi / n;
    field.mu = mu;
    field.slope = ic.background_slope();
    const std::size_t count = node_count(dim, n);
    field.psi.resize(count);
    for (std::size_t i = 0; i < count; ++i) field.psi[i] = ic.periodic_part(field.node_position(i));

    ViscousSeries series;
    series.mu = mu;
    series.dt = dt;
    series.steps = steps;

    const Stencil st{dim, n};
    const double h = field.h;
    const double lf_relief = 2.0 * mu / h;  // central differencing is monotone below this speed
    std::vector<double> next(count);
    Vec dplus(dim), dminus(dim), corner(dim);

    for (std::size_t step = 0;; ++step) {
        bool finite = true;
        for (std::size_t i = 0; i < count; ++i) {
            double lap = 0.0;
            for (int k = 0; k < dim; ++k) {
                const double up = field.psi[st.shift(i, k, 1)];
                const double dn = field.psi[st.shift(i, k, -1)];
                dplus[k] = (up - field.psi[i]) / h + field.slope[k];
                dminus[k] = (field.psi[i] - dn) / h + field.slope[k];
                lap += up - 2.0 * field.psi[i] + dn;
            }
            lap /= h * h;
            const Vec mean = 0.5 * (dplus + dminus);
            double ham = model.hamiltonian(mean);
            // Local wave speed per axis from the corners of the one-sided gradient box.
            Vec alpha = Vec::Zero(dim);
            for (int mask = 0; mask < (1 << dim); ++mask) {
                for (int j = 0; j < dim; ++j) corner[j] = (mask >> j) & 1 ? dplus[j] : dminus[j];
                alpha = alpha.cwiseMax(model.gradient(corner).cwiseAbs());
            }
            for (int k = 0; k < dim; ++k)
                ham -= 0.5 * std::max(0.0, alpha[k] - lf_relief) * (dplus[k] - dminus[k]);
            next[i] = field.psi[i] + dt * (mu * lap - ham);
            finite = finite && std::isfinite(next[i]);
        }
        if (!finite)
            throw NumericalFailure("viscous.step", "non-finite value at step " + std::to_string(step + 1));

        if (step % stride == 0 || step == steps) {
            GridField frame = field;
            frame.t = step == steps ? T : static_cast<double>(step) * dt;
            frame.rate.resize(count);
            for (std::size_t i = 0; i < count; ++i) frame.rate[i] = (next[i] - field.psi[i]) / dt;
            series.frames.push_back(std::move(frame));
        }
        if (step == steps) break;
        field.psi.swap(next);
    }
    return series;
}

RegularizedPath integrate_regularized_flow(const ViscousSeries& series, const HamiltonianModel& model,
                                           const Vec& seed, double dt, double T) {
    if (!(dt > 0)) throw ConfigError("flow.dt", "time step must be positive");
    if (T < 0) T = series.t_end();
    const auto steps = static_cast<std::size_t>(std::llround(T / dt));
    RegularizedPath out;
    auto& traj = out.trajectory;
    traj.seed = seed;
    Vec x = seed;
    for (std::size_t n = 0;; ++n) {
        const double t = static_cast<double>(n) * dt;
        traj.times.push_back(t);
        traj.positions.push_back(x);
        traj.on_shock.push_back(0);
        if (n == steps) break;
        bool ex = false;
        const Vec v = model.gradient(series.gradient(t, x, &ex));
        out.extrapolated = out.extrapolated || ex;
        x += dt * v;
        for (int k = 0; k < x.size(); ++k) x[k] = wrap(x[k]);
    }
    return out;
}

AnomalySeries anomaly_along(const ViscousSeries& series, const HamiltonianModel& model,
                            const ParticleTrajectory& trajectory) {
    AnomalySeries out;
    for (std::size_t s = 0; s < trajectory.times.size(); ++s) {
        const double t = trajectory.times[s];
        if (t > series.t_end() + 1e-12) break;
        std::size_t k;
        double w;
        bool ex;
        series.locate(t, k, w, ex);
        const Vec& x = trajectory.positions[s];
        auto sample = [&](const GridField& f) {
            const double visc = f.mu * f.laplacian(x);
            const double res = f.time_rate(x) + model.hamiltonian(f.gradient(x));
            return std::pair{visc, res};
        };
        auto [visc, res] = sample(series.frames[k]);
        if (w > 0) {
            const auto [v2, r2] = sample(series.frames[k + 1]);
            visc = (1.0 - w) * visc + w * v2;
            res = (1.0 - w) * res + w * r2;
        }
        out.times.push_back(t);
        out.viscous_term.push_back(visc);
        out.residual.push_back(res);
    }
    return out;
}

double plateau(const std::vector<double>& times, const std::vector<double>& values, double t_from) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < times.size(); ++i)
        if (times[i] >= t_from) {
            sum += values[i];
            ++count;
        }
    if (count == 0) throw NumericalFailure("viscous.plateau", "no samples after t = " + std::to_string(t_from));
    return sum / static_cast<double>(count);
}

std::vector<double> gradient_limit_check(const std::vector<ViscousSeries>& ladder, const LimitMomentumSet& lms) {
    std::vector<Vec> momenta;
    for (const auto& e : lms.entries) momenta.push_back(e.momentum);
    std::vector<double> out;
    for (const auto& series : ladder)
        out.push_back(project_onto_hull(momenta, series.gradient(lms.t, lms.x)).distance);
    return out;
}

}  // namespace shockflow
