#include <doctest.h>

#include "shockflow/hopf_lax.hpp"
#include "shockflow/superdiff.hpp"
#include "support.hpp"

using namespace shockflow;
using sft::vec;

namespace {

const auto quad1 = HamiltonianModel::quadratic(1);

std::vector<LimitEntry> sorted_entries(const LimitMomentumSet& lms) {
    auto e = lms.entries;
    std::sort(e.begin(), e.end(), [](const auto& a, const auto& b) { return a.momentum(0) < b.momentum(0); });
    return e;
}

}  // namespace

TEST_CASE("preshock limit data") {
    const auto lms = limit_data(InitialCondition::neg_power(1), quad1, 0.1, vec({0}));
    REQUIRE(lms.k() == 2);
    const auto e = sorted_entries(lms);
    CHECK(std::abs(e[0].momentum(0) + 0.4) < 1e-3);
    CHECK(std::abs(e[1].momentum(0) - 0.4) < 1e-3);
    for (const auto& entry : e) {
        CHECK(std::abs(entry.energy - 0.08) < 1e-4);
        CHECK((entry.velocity - entry.momentum).norm() < 1e-10);
    }
    CHECK(is_shock(lms));

    const auto verts = superdifferential_vertices(lms);
    REQUIRE(verts.size() == 2);
    for (const auto& v : verts) {
        CHECK(std::abs(v.neg_energy + 0.08) < 1e-4);
        CHECK(std::abs(std::abs(v.momentum(0)) - 0.4) < 1e-3);
    }
}

TEST_CASE("smooth point has a single entry") {
    const auto lms = limit_data(InitialCondition::linear(vec({0.7})), quad1, 0.5, vec({0.2}));
    REQUIRE(lms.k() == 1);
    CHECK(!is_shock(lms));
    CHECK(std::abs(lms.entries[0].momentum(0) - 0.7) < 1e-8);
    CHECK(superdifferential_vertices(lms).size() == 1);
}

TEST_CASE("negative absolute value shock") {
    const auto lms = limit_data(InitialCondition::neg_abs(1), quad1, 0.5, vec({0}));
    REQUIRE(lms.k() == 2);
    const auto e = sorted_entries(lms);
    CHECK(std::abs(e[0].momentum(0) + 1) < 1e-6);
    CHECK(std::abs(e[1].momentum(0) - 1) < 1e-6);
    CHECK(std::abs(e[0].energy - 0.5) < 1e-6);
    CHECK(std::abs(e[1].velocity(0) - 1) < 1e-6);
    for (const auto& v : superdifferential_vertices(lms)) CHECK(std::abs(v.neg_energy + 0.5) < 1e-6);
}

TEST_CASE("preshock momenta collapse at tiny times") {
    SuperdiffOptions opts;
    opts.momentum_cluster_tol = 1e-2;
    const auto lms = limit_data(InitialCondition::neg_power(1), quad1, 1e-4, vec({0}), opts);
    CHECK(!is_shock(lms));
    CHECK(std::abs(lms.entries[0].momentum(0)) < 1e-2);
}

TEST_CASE("entries keep the legendre pairing and separation") {
    for (const auto& model : sft::all_models(1)) {
        const auto lms = limit_data(InitialCondition::neg_abs(1, 0.2), model, 0.7, vec({0.0}));
        for (std::size_t i = 0; i < lms.k(); ++i) {
            const auto& e = lms.entries[i];
            CHECK((e.velocity - velocity_of_momentum(model, e.momentum)).norm() < 1e-10);
            CHECK(std::abs(e.energy - model.hamiltonian(e.momentum)) < 1e-12);
            for (std::size_t j = i + 1; j < lms.k(); ++j)
                CHECK((e.momentum - lms.entries[j].momentum).norm() >= 1e-3);
        }
    }
}

TEST_CASE("momentum approaches a branch from a smooth side") {
    // cos y develops a shock at x = 0 after t = 1
    const auto ic = InitialCondition::cosine(1, 1.0);
    const double t = 2.0;
    const auto shock = limit_data(ic, quad1, t, vec({0}));
    REQUIRE(shock.k() == 2);
    for (double side : {-1.0, 1.0}) {
        for (double dx : {1e-1, 1e-2, 1e-3, 1e-4}) {
            const auto lms = limit_data(ic, quad1, t, vec({side * dx}));
            REQUIRE(lms.k() == 1);
            double nearest = 1e9;
            for (const auto& e : shock.entries) nearest = std::min(nearest, (lms.entries[0].momentum - e.momentum).norm());
            INFO("dx=", dx);
            CHECK(nearest <= 10 * dx);
        }
    }
}

TEST_CASE("vertices satisfy the supergradient inequality") {
    const auto ic = InitialCondition::cosine(1, 1.0);
    const double t = 2.0;
    const auto lms = limit_data(ic, quad1, t, vec({0}));
    const double phi0 = evaluate_phi(ic, quad1, t, vec({0}));
    std::vector<double> ratios;
    for (double r : {1e-1, 1e-2, 1e-3}) {
        double worst = 0.0;
        for (int a = -4; a <= 4; ++a) {
            for (int b = -4; b <= 4; ++b) {
                const double tau = r * a / 4.0, xi = r * b / 4.0;
                if (a == 0 && b == 0) continue;
                const double lhs = evaluate_phi(ic, quad1, t + tau, vec({xi})) - phi0;
                for (const auto& e : lms.entries) {
                    const double excess = lhs - (-e.energy * tau + e.momentum(0) * xi);
                    worst = std::max(worst, excess / (std::abs(tau) + std::abs(xi)));
                }
            }
        }
        ratios.push_back(worst);
    }
    INFO(ratios[0], " ", ratios[1], " ", ratios[2]);
    CHECK(ratios[1] < ratios[0] + 1e-9);
    CHECK(ratios[2] < ratios[1] + 1e-9);
    CHECK(ratios[2] < 5e-3);
}

TEST_CASE("limit set from explicit momenta") {
    const auto model = HamiltonianModel::power_law(2, 4.0);
    const auto lms = limit_set_from_momenta(model, {vec({1, 0}), vec({-1, 0}), vec({0, 1.5})});
    REQUIRE(lms.k() == 3);
    for (const auto& e : lms.entries) {
        CHECK(std::abs(e.energy - model.hamiltonian(e.momentum)) < 1e-14);
        CHECK((e.velocity - model.gradient(e.momentum)).norm() < 1e-14);
    }
    CHECK_THROWS(limit_set_from_momenta(model, {}));
}
