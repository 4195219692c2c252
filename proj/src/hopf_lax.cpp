#include "shockflow/hopf_lax.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include <boost/math/tools/minima.hpp>

#include "shockflow/errors.hpp"

namespace shockflow {

namespace {

constexpr double kPi = std::numbers::pi;
// neg_power has unbounded slope; its Lipschitz bound is taken over |y| <= 2 pi.
constexpr double kPowerDomainRadius = 2.0 * kPi;

double wrap_periodic(double x) {
    double w = std::fmod(x + kPi, 2.0 * kPi);
    if (w < 0) w += 2.0 * kPi;
    return w - kPi;
}

double sign(double x) { return (x > 0) - (x < 0); }

}  // namespace

InitialCondition InitialCondition::zero(int dim) {
    InitialCondition ic(IcForm::zero, dim);
    ic.slopes_ = {Vec::Zero(dim)};
    ic.offsets_ = {0.0};
    return ic;
}

InitialCondition InitialCondition::constant(int dim, double value) {
    InitialCondition ic(IcForm::constant, dim);
    ic.scalar_ = value;
    ic.slopes_ = {Vec::Zero(dim)};
    ic.offsets_ = {value};
    return ic;
}

InitialCondition InitialCondition::linear(const Vec& slope) {
    InitialCondition ic(IcForm::linear, static_cast<int>(slope.size()));
    ic.slopes_ = {slope};
    ic.offsets_ = {0.0};
    ic.lipschitz_ = slope.norm();
    return ic;
}

InitialCondition InitialCondition::neg_abs(int dim, double drift) {
    InitialCondition ic(IcForm::neg_abs, dim);
    ic.scalar_ = drift;
    ic.lipschitz_ = 1.0 + std::abs(drift);
    return ic;
}

InitialCondition InitialCondition::neg_power(int dim) {
    InitialCondition ic(IcForm::neg_power, dim);
    ic.lipschitz_ = 2.0 * std::sqrt(kPowerDomainRadius);
    return ic;
}

InitialCondition InitialCondition::cosine(int dim, double amplitude) {
    InitialCondition ic(IcForm::cosine, dim);
    ic.scalar_ = amplitude;
    ic.lipschitz_ = std::abs(amplitude) * std::sqrt(static_cast<double>(dim));
    return ic;
}

InitialCondition InitialCondition::min_affine(std::vector<Vec> slopes, std::vector<double> offsets) {
    if (slopes.empty()) throw ConfigError("fixture.slopes", "min_affine needs at least one branch");
    if (slopes.size() != offsets.size())
        throw ConfigError("fixture.offsets", "one offset per slope required");
    const int dim = static_cast<int>(slopes.front().size());
    InitialCondition ic(IcForm::min_affine, dim);
    for (const auto& s : slopes) {
        if (s.size() != dim) throw ConfigError("fixture.slopes", "inconsistent slope dimensions");
        ic.lipschitz_ = std::max(ic.lipschitz_, s.norm());
    }
    ic.slopes_ = std::move(slopes);
    ic.offsets_ = std::move(offsets);
    return ic;
}

InitialCondition InitialCondition::sampled(const Vec& lower, const Vec& upper, std::vector<int> counts,
                                           std::vector<double> values) {
    const int dim = static_cast<int>(lower.size());
    if (upper.size() != dim || static_cast<int>(counts.size()) != dim)
        throw ConfigError("fixture.box", "box and counts must share the dimension");
    std::size_t total = 1;
    for (int k = 0; k < dim; ++k) {
        if (counts[k] < 2) throw ConfigError("fixture.counts", "need at least 2 samples per axis");
        if (!(upper[k] > lower[k])) throw ConfigError("fixture.box", "empty interval");
        total *= static_cast<std::size_t>(counts[k]);
    }
    if (values.size() != total) throw ConfigError("fixture.values", "table size mismatch");

    InitialCondition ic(IcForm::sampled, dim);
    ic.lower_ = lower;
    ic.upper_ = upper;
    ic.counts_ = std::move(counts);
    ic.values_ = std::move(values);

    // Largest axis difference quotient, combined into a Euclidean bound.
    std::vector<int> stride(dim, 1);
    for (int k = dim - 2; k >= 0; --k) stride[k] = stride[k + 1] * ic.counts_[k + 1];
    double sum_sq = 0.0;
    for (int k = 0; k < dim; ++k) {
        const double h = (upper[k] - lower[k]) / (ic.counts_[k] - 1);
        double best = 0.0;
        for (std::size_t idx = 0; idx < total; ++idx) {
            const int ik = static_cast<int>(idx / stride[k]) % ic.counts_[k];
            if (ik + 1 >= ic.counts_[k]) continue;
            best = std::max(best, std::abs(ic.values_[idx + stride[k]] - ic.values_[idx]) / h);
        }
        sum_sq += best * best;
    }
    ic.lipschitz_ = std::sqrt(sum_sq);
    return ic;
}

std::string InitialCondition::name() const {
    switch (form_) {
        case IcForm::zero: return "zero";
        case IcForm::constant: return "constant";
        case IcForm::linear: return "linear";
        case IcForm::neg_abs: return "neg_abs";
        case IcForm::neg_power: return "neg_power";
        case IcForm::cosine: return "cosine";
        case IcForm::min_affine: return "min_affine";
        case IcForm::sampled: return "sampled";
    }
    return "unknown";
}

bool InitialCondition::is_affine_family() const noexcept {
    return form_ == IcForm::zero || form_ == IcForm::constant || form_ == IcForm::linear ||
           form_ == IcForm::min_affine;
}

double InitialCondition::operator()(const Vec& y) const {
    switch (form_) {
        case IcForm::zero:
        case IcForm::constant:
        case IcForm::linear:
        case IcForm::min_affine: {
            double best = slopes_[0].dot(y) + offsets_[0];
            for (std::size_t i = 1; i < slopes_.size(); ++i)
                best = std::min(best, slopes_[i].dot(y) + offsets_[i]);
            return best;
        }
        case IcForm::neg_abs: return -std::abs(y[0]) + scalar_ * y[0];
        case IcForm::neg_power: return -(4.0 / 3.0) * std::pow(std::abs(y[0]), 1.5);
        case IcForm::cosine: return scalar_ * y.array().cos().sum();
        case IcForm::sampled: {
            const int corners = 1 << dim_;
            std::vector<int> stride(dim_, 1);
            for (int k = dim_ - 2; k >= 0; --k) stride[k] = stride[k + 1] * counts_[k + 1];
            int base[3] = {0, 0, 0};
            double frac[3] = {0, 0, 0};
            for (int k = 0; k < dim_; ++k) {
                const double h = (upper_[k] - lower_[k]) / (counts_[k] - 1);
                const double s = (std::clamp(y[k], lower_[k], upper_[k]) - lower_[k]) / h;
                int i = std::min(static_cast<int>(std::floor(s)), counts_[k] - 2);
                base[k] = i;
                frac[k] = s - i;
            }
            double acc = 0.0;
            for (int c = 0; c < corners; ++c) {
                double w = 1.0;
                int idx = 0;
                for (int k = 0; k < dim_; ++k) {
                    const int bit = (c >> k) & 1;
                    w *= bit ? frac[k] : 1.0 - frac[k];
                    idx += (base[k] + bit) * stride[k];
                }
                if (w != 0.0) acc += w * values_[idx];
            }
            return acc;
        }
    }
    return 0.0;
}

std::optional<Vec> InitialCondition::gradient(const Vec& y) const {
    Vec g = Vec::Zero(dim_);
    switch (form_) {
        case IcForm::zero:
        case IcForm::constant: return g;
        case IcForm::linear: return slopes_[0];
        case IcForm::min_affine: {
            std::size_t arg = 0;
            double best = slopes_[0].dot(y) + offsets_[0];
            int ties = 1;
            for (std::size_t i = 1; i < slopes_.size(); ++i) {
                const double v = slopes_[i].dot(y) + offsets_[i];
                if (v < best) {
                    best = v;
                    arg = i;
                    ties = 1;
                } else if (v == best && slopes_[i] != slopes_[arg]) {
                    ++ties;
                }
            }
            if (ties > 1) return std::nullopt;
            return slopes_[arg];
        }
        case IcForm::neg_abs:
            if (y[0] == 0.0) return std::nullopt;
            g[0] = -sign(y[0]) + scalar_;
            return g;
        case IcForm::neg_power:
            g[0] = -2.0 * sign(y[0]) * std::sqrt(std::abs(y[0]));
            return g;
        case IcForm::cosine: return Vec(-scalar_ * y.array().sin().matrix());
        case IcForm::sampled: return std::nullopt;
    }
    return std::nullopt;
}

bool InitialCondition::periodizable() const noexcept {
    switch (form_) {
        case IcForm::zero:
        case IcForm::constant:
        case IcForm::linear:
        case IcForm::neg_abs:
        case IcForm::neg_power:
        case IcForm::cosine: return true;
        default: return false;
    }
}

Vec InitialCondition::background_slope() const {
    Vec s = Vec::Zero(dim_);
    if (form_ == IcForm::linear) s = slopes_[0];
    if (form_ == IcForm::neg_abs) s[0] = scalar_;
    return s;
}

double InitialCondition::periodic_part(const Vec& x) const {
    switch (form_) {
        case IcForm::zero: return 0.0;
        case IcForm::constant: return scalar_;
        case IcForm::linear: return 0.0;
        case IcForm::neg_abs: return -std::abs(wrap_periodic(x[0]));
        case IcForm::neg_power: return -(4.0 / 3.0) * std::pow(std::abs(wrap_periodic(x[0])), 1.5);
        case IcForm::cosine: return (*this)(x);
        default: throw ConfigError("fixture", name() + " cannot be periodized on [-pi, pi]");
    }
}

namespace {

struct Candidate {
    Vec velocity;
    double value;
};

ValueResult solve_affine(const InitialCondition& ic, const HamiltonianModel& model, double t,
                         const Vec& x, const HopfLaxOptions& options) {
    const auto& slopes = ic.affine_slopes();
    const auto& offsets = ic.affine_offsets();
    std::vector<Candidate> cands;
    for (std::size_t i = 0; i < slopes.size(); ++i) {
        const double value = slopes[i].dot(x) + offsets[i] - t * model.hamiltonian(slopes[i]);
        cands.push_back({model.gradient(slopes[i]), value});
    }
    std::sort(cands.begin(), cands.end(),
              [](const Candidate& a, const Candidate& b) { return a.value < b.value; });

    ValueResult out;
    out.t = t;
    out.x = x;
    out.value = cands.front().value;
    const double vtol = options.value_rel_tol * (1.0 + std::abs(out.value));
    double vmax = 0.0;
    for (const auto& c : cands) vmax = std::max(vmax, c.velocity.norm());
    out.search_radius = t * vmax * (1.0 + options.speed_margin);
    const double ctol =
        options.cluster_tol >= 0 ? options.cluster_tol : 1e-4 * 2.0 * out.search_radius;
    for (const auto& c : cands) {
        if (c.value > out.value + vtol) break;
        const Vec y = x - t * c.velocity;
        bool fresh = true;
        for (const auto& prev : out.minimizers)
            if ((prev - y).norm() < ctol) fresh = false;
        if (!fresh) continue;
        out.minimizers.push_back(y);
        out.velocities.push_back(c.velocity);
        out.objective.push_back(c.value);
    }
    return out;
}

// Compass search with step doubling on success; for d >= 2 polish.
Candidate compass_polish(const std::function<double(const Vec&)>& f, Candidate start, double step,
                         double bound) {
    const int d = static_cast<int>(start.velocity.size());
    Vec v = start.velocity;
    double fv = start.value;
    const double floor_step = 1e-11 * (1.0 + v.norm());
    int guard = 0;
    while (step > floor_step && guard++ < 20000) {
        bool moved = false;
        for (int k = 0; k < d && !moved; ++k) {
            for (double s : {+1.0, -1.0}) {
                Vec trial = v;
                trial[k] = std::clamp(trial[k] + s * step, -bound, bound);
                const double ft = f(trial);
                if (ft < fv) {
                    v = trial;
                    fv = ft;
                    moved = true;
                    break;
                }
            }
        }
        if (!moved) step *= 0.5;
    }
    return {v, fv};
}

ValueResult solve_numeric(const InitialCondition& ic, const HamiltonianModel& model, double t,
                          const Vec& x, const HopfLaxOptions& options) {
    const int d = ic.dim();
    int n = options.scan_points;
    if (n <= 0) n = d == 1 ? 1001 : (d == 2 ? 61 : 21);
    if (n % 2 == 0) ++n;

    auto objective = [&](const Vec& v) {
        return ic(Vec(x - t * v)) + t * model.lagrangian(v);
    };

    double bound = std::max(model.max_speed(ic.lipschitz()) * (1.0 + options.speed_margin), 1e-6);

    for (int attempt = 0; attempt < 2; ++attempt, bound *= 4.0) {
        const double h = 2.0 * bound / (n - 1);
        std::size_t total = 1;
        for (int k = 0; k < d; ++k) total *= static_cast<std::size_t>(n);
        std::vector<double> vals(total);
        std::vector<int> stride(d, 1);
        for (int k = d - 2; k >= 0; --k) stride[k] = stride[k + 1] * n;

        auto node = [&](std::size_t idx) {
            Vec v(d);
            for (int k = 0; k < d; ++k) v[k] = -bound + h * ((idx / stride[k]) % n);
            return v;
        };
        for (std::size_t idx = 0; idx < total; ++idx) vals[idx] = objective(node(idx));

        // Discrete local minima over the full 3^d neighbourhood.
        std::vector<Candidate> cands;
        const int neigh = d == 1 ? 3 : (d == 2 ? 9 : 27);
        for (std::size_t idx = 0; idx < total; ++idx) {
            bool is_min = true;
            for (int c = 0; c < neigh && is_min; ++c) {
                int offset = 0;
                bool inside = true;
                int cc = c;
                bool self = true;
                for (int k = 0; k < d; ++k) {
                    const int o = cc % 3 - 1;
                    cc /= 3;
                    if (o != 0) self = false;
                    const int ik = static_cast<int>((idx / stride[k]) % n) + o;
                    if (ik < 0 || ik >= n) inside = false;
                    offset += o * stride[k];
                }
                if (self || !inside) continue;
                if (vals[idx + offset] < vals[idx]) is_min = false;
            }
            if (is_min) cands.push_back({node(idx), vals[idx]});
        }
        std::sort(cands.begin(), cands.end(),
                  [](const Candidate& a, const Candidate& b) { return a.value < b.value; });
        if (cands.size() > 24) cands.resize(24);

        for (auto& c : cands) {
            if (d == 1) {
                auto f1 = [&](double s) { Vec v(1); v[0] = s; return objective(v); };
                const double lo = std::max(-bound, c.velocity[0] - h);
                const double hi = std::min(bound, c.velocity[0] + h);
                auto r = boost::math::tools::brent_find_minima(f1, lo, hi, 26);
                if (r.second < c.value) c = {Vec::Constant(1, r.first), r.second};
            } else {
                c = compass_polish(objective, c, 0.5 * h, bound);
            }
        }
        std::sort(cands.begin(), cands.end(),
                  [](const Candidate& a, const Candidate& b) { return a.value < b.value; });

        const Candidate& best = cands.front();
        if (best.velocity.cwiseAbs().maxCoeff() > bound - 1.5 * h) continue;  // truncated

        ValueResult out;
        out.t = t;
        out.x = x;
        out.value = best.value;
        out.search_radius = t * bound;
        const double vtol = options.value_rel_tol * (1.0 + std::abs(best.value));
        const double ctol =
            options.cluster_tol >= 0 ? options.cluster_tol : 1e-4 * 2.0 * out.search_radius;
        for (const auto& c : cands) {
            if (c.value > best.value + vtol) break;
            const Vec y = x - t * c.velocity;
            bool fresh = true;
            for (const auto& prev : out.minimizers)
                if ((prev - y).norm() < ctol) fresh = false;
            if (!fresh) continue;
            out.minimizers.push_back(y);
            out.velocities.push_back(c.velocity);
            out.objective.push_back(c.value);
        }
        return out;
    }
    throw NumericalFailure("hopf_lax.search_box",
                           "minimum attained on the search box boundary after widening");
}

}  // namespace

ValueResult solve_value(const InitialCondition& ic, const HamiltonianModel& model, double t,
                        const Vec& x, const HopfLaxOptions& options) {
    if (!(t > 0.0)) throw std::invalid_argument("solve_value requires t > 0");
    if (x.size() != ic.dim() || model.dim() != ic.dim())
        throw std::invalid_argument("dimension mismatch between point, fixture and Hamiltonian");
    if (ic.is_affine_family()) return solve_affine(ic, model, t, x, options);
    return solve_numeric(ic, model, t, x, options);
}

std::vector<Vec> minimizer_set(const InitialCondition& ic, const HamiltonianModel& model, double t,
                               const Vec& x, double cluster_tol) {
    HopfLaxOptions options;
    options.cluster_tol = cluster_tol;
    return solve_value(ic, model, t, x, options).minimizers;
}

double evaluate_phi(const InitialCondition& ic, const HamiltonianModel& model, double t,
                    const Vec& x, const HopfLaxOptions& options) {
    if (t == 0.0) return ic(x);
    return solve_value(ic, model, t, x, options).value;
}

double action_inequality_check(const InitialCondition& ic, const HamiltonianModel& model,
                               const std::vector<double>& times, const std::vector<Vec>& curve,
                               const HopfLaxOptions& options) {
    if (times.size() < 2 || times.size() != curve.size())
        throw std::invalid_argument("curve needs at least two samples with matching times");
    double action = 0.0;
    for (std::size_t i = 0; i + 1 < times.size(); ++i) {
        const double dt = times[i + 1] - times[i];
        if (!(dt > 0)) throw std::invalid_argument("curve times must increase");
        action += dt * model.lagrangian(Vec((curve[i + 1] - curve[i]) / dt));
    }
    return evaluate_phi(ic, model, times.front(), curve.front(), options) + action -
           evaluate_phi(ic, model, times.back(), curve.back(), options);
}

}  // namespace shockflow
