#include "shockflow/superdiff.hpp"

#include <stdexcept>

namespace shockflow {

LimitMomentumSet limit_data(const InitialCondition& ic, const HamiltonianModel& model, double t,
                            const Vec& x, const SuperdiffOptions& options) {
    const ValueResult vr = solve_value(ic, model, t, x, options.hopf_lax);
    LimitMomentumSet lms;
    lms.t = t;
    lms.x = x;
    for (std::size_t i = 0; i < vr.minimizers.size(); ++i) {
        const Vec& y = vr.minimizers[i];
        Vec v = vr.velocities[i];
        // At a minimizer grad phi_0(y) = grad L(v). When phi_0 is differentiable
        // there, its gradient is far more accurate than the inverted
        // difference quotient (x - y) / t.
        Vec p = model.lagrangian_gradient(v);
        if (auto g = ic.gradient(y)) {
            const Vec vg = model.gradient(*g);
            if ((vg - v).norm() <= 1e-4 * (1.0 + v.norm())) {
                p = *g;
                v = vg;
            }
        }
        bool fresh = true;
        for (const auto& e : lms.entries)
            if ((e.momentum - p).norm() < options.momentum_cluster_tol) fresh = false;
        if (!fresh) continue;
        lms.entries.push_back({p, model.hamiltonian(p), v, y});
    }
    return lms;
}

LimitMomentumSet limit_set_from_momenta(const HamiltonianModel& model, const std::vector<Vec>& momenta) {
    if (momenta.empty()) throw std::invalid_argument("at least one momentum required");
    LimitMomentumSet lms;
    lms.x = Vec::Zero(model.dim());
    for (const auto& p : momenta) {
        if (p.size() != model.dim()) throw std::invalid_argument("momentum dimension mismatch");
        lms.entries.push_back({p, model.hamiltonian(p), model.gradient(p), Vec()});
    }
    return lms;
}

bool is_shock(const LimitMomentumSet& lms) noexcept { return lms.k() >= 2; }

std::vector<SuperVertex> superdifferential_vertices(const LimitMomentumSet& lms) {
    std::vector<SuperVertex> out;
    out.reserve(lms.k());
    for (const auto& e : lms.entries) out.push_back({-e.energy, e.momentum});
    return out;
}

}  // namespace shockflow
