#include <doctest.h>

#include "shockflow/admissible.hpp"
#include "shockflow/errors.hpp"
#include "shockflow/flow.hpp"
#include "shockflow/hopf_lax.hpp"
#include "support.hpp"

using namespace shockflow;
using sft::vec;

namespace {

const auto quad1 = HamiltonianModel::quadratic(1);

struct Fixture {
    const char* name;
    InitialCondition ic;
    std::vector<Vec> seeds;
};

std::vector<Fixture> shipped_fixtures() {
    return {
        {"neg_abs", InitialCondition::neg_abs(1), {vec({0.5}), vec({-0.3}), vec({0.9}), vec({-1.2})}},
        {"neg_abs drift", InitialCondition::neg_abs(1, 0.2), {vec({0.5}), vec({-0.3}), vec({0.8})}},
        {"cosine", InitialCondition::cosine(1, 1.0), {vec({0.4}), vec({-0.6}), vec({1.5})}},
        {"neg_power", InitialCondition::neg_power(1), {vec({0.1}), vec({-0.2})}},
    };
}

}  // namespace

TEST_CASE("forward velocity examples") {
    const auto lin = InitialCondition::linear(vec({0.6}));
    for (const auto& model : sft::all_models(1))
        CHECK((forward_velocity(lin, model, 0.4, vec({0.1})) - model.gradient(vec({0.6}))).norm() < 1e-7);
    for (double t : {0.1, 0.5, 2.0}) CHECK(std::abs(forward_velocity(InitialCondition::neg_abs(1), quad1, t, vec({0}))(0)) < 1e-9);
    CHECK(std::abs(forward_velocity(InitialCondition::neg_power(1), quad1, 0.1, vec({0}))(0)) < 1e-8);
}

TEST_CASE("linear datum moves along straight lines") {
    for (const auto& model : sft::all_models(2)) {
        const Vec a = vec({0.5, -0.25});
        const auto trajs = integrate_flow(InitialCondition::linear(a), model, {vec({0.1, 0.2}), vec({-1, 0.5})}, 1.0, 0.01);
        const Vec speed = model.gradient(a);
        for (const auto& tr : trajs) {
            for (std::size_t i = 0; i < tr.times.size(); ++i)
                CHECK((tr.positions[i] - (tr.seed + tr.times[i] * speed)).norm() < 1e-9);
            CHECK(!tr.shock_entry);
            CHECK(!tr.merged_into);
        }
    }
}

TEST_CASE("characteristics run into the standing shock") {
    const double dt = 1e-3;
    const auto trajs = integrate_flow(InitialCondition::neg_abs(1), quad1, {vec({0.5}), vec({-0.3})}, 1.0, dt);
    REQUIRE(trajs.size() == 2);
    double worst = 0.0;
    for (std::size_t i = 0; i < trajs[0].times.size(); ++i)
        worst = std::max(worst, std::abs(trajs[0].positions[i](0) - std::max(0.5 - trajs[0].times[i], 0.0)));
    CHECK(worst < 5 * dt);
    REQUIRE(trajs[0].shock_entry);
    CHECK(std::abs(*trajs[0].shock_entry - 0.5) < 3 * dt);
    REQUIRE(trajs[1].shock_entry);
    CHECK(std::abs(*trajs[1].shock_entry - 0.3) < 3 * dt);
    CHECK(!trajs[0].merged_into);
    REQUIRE(trajs[1].merged_into);
    CHECK(*trajs[1].merged_into == 0);
    CHECK(*trajs[1].merge_time <= 0.55);
}

TEST_CASE("coalescence detection") {
    SUBCASE("smooth characteristics stay apart") {
        const auto trajs = integrate_flow(InitialCondition::linear(vec({1.0})), quad1, {vec({0}), vec({0.5})}, 1.0, 0.01);
        auto copy = trajs;
        CHECK(detect_coalescence(copy, 0.02).classes.size() == 2);
    }
    SUBCASE("planar sheet merges across it but not along it") {
        const auto quad2 = HamiltonianModel::quadratic(2);
        auto trajs = integrate_flow(InitialCondition::neg_abs(2), quad2,
                                    {vec({0.5, 0}), vec({-0.3, 0}), vec({0.5, 1})}, 1.0, 1e-3);
        const auto part = detect_coalescence(trajs, 2e-3 * flow_speed_bound(InitialCondition::neg_abs(2), quad2));
        REQUIRE(part.classes.size() == 2);
        CHECK(part.classes[0] == std::vector<int>{0, 1});
        CHECK(part.classes[1] == std::vector<int>{2});
        CHECK(std::abs(trajs[2].positions.back()(1) - 1.0) < 1e-9);
    }
}

TEST_CASE("shipped fixtures: no escape, growing classes, admissible forward velocity") {
    const double dt = 2e-3;
    for (const auto& f : shipped_fixtures()) {
        INFO(f.name);
        const double T = 2.0;
        const auto trajs = integrate_flow(f.ic, quad1, f.seeds, T, dt);
        for (const auto& tr : trajs) {
            if (!tr.shock_entry) continue;
            for (std::size_t i = 0; i < tr.times.size(); ++i)
                if (tr.times[i] > *tr.shock_entry + 1e-12) CHECK(tr.on_shock[i]);
        }
        const double tol = 2 * dt * flow_speed_bound(f.ic, quad1);
        std::vector<std::vector<int>> prev;
        for (std::size_t s = 0; s < trajs[0].times.size(); s += 50) {
            const auto classes = coalescence_classes_at(trajs, tol, s);
            for (const auto& old_cls : prev) {
                bool contained = false;
                for (const auto& cls : classes)
                    contained |= std::includes(cls.begin(), cls.end(), old_cls.begin(), old_cls.end());
                CHECK(contained);
            }
            prev = classes;
        }
        for (const auto& tr : trajs) {
            for (std::size_t i = 25; i < tr.times.size(); i += 100) {
                const double t = tr.times[i];
                const Vec x = tr.positions[i];
                const auto lms = limit_data(f.ic, quad1, t, x);
                const auto verdict = check_admissibility(lms, quad1, forward_velocity(f.ic, quad1, t, x));
                CHECK(verdict.accepted);
            }
        }
    }
}

TEST_CASE("surplus action grows at the rate lhat(v*) along a moving shock") {
    const auto ic = InitialCondition::neg_abs(1, 0.2);
    const double dt = 1e-3;
    const auto trajs = integrate_flow(ic, quad1, {vec({0.5})}, 1.5, dt);
    const auto& tr = trajs[0];
    REQUIRE(tr.shock_entry);
    int checked = 0;
    for (std::size_t i = 0; i + 1 < tr.times.size(); i += 37) {
        if (tr.times[i] < *tr.shock_entry + 0.05) continue;
        const double t = tr.times[i], t2 = tr.times[i + 1];
        const Vec v = (tr.positions[i + 1] - tr.positions[i]) / (t2 - t);
        const double surplus = (evaluate_phi(ic, quad1, t, tr.positions[i]) + (t2 - t) * quad1.lagrangian(v) -
                                evaluate_phi(ic, quad1, t2, tr.positions[i + 1])) /
                               (t2 - t);
        const auto lms = limit_data(ic, quad1, t, tr.positions[i]);
        const auto sol = admissible_velocity(lms, quad1);
        CHECK(std::abs(sol.v_star(0) - 0.2) < 1e-6);
        CHECK(std::abs(surplus - lhat(lms, quad1, sol.v_star)) <= 5 * dt);
        ++checked;
    }
    CHECK(checked > 10);
}

TEST_CASE("forward differences converge as the step halves") {
    // seed 0.5 under -|y| + 0.2 y moves at -0.8 until it meets the shock x = 0.2 t at t = 0.5
    const auto ic = InitialCondition::neg_abs(1, 0.2);
    for (double dt : {4e-3, 2e-3, 1e-3}) {
        const auto tr = integrate_flow(ic, quad1, {vec({0.5})}, 1.0, dt)[0];
        double worst_fd = 0.0, worst_path = 0.0;
        for (std::size_t i = 0; i + 1 < tr.times.size(); ++i) {
            const double t = tr.times[i];
            const double exact = t < 0.5 ? 0.5 - 0.8 * t : 0.2 * t;
            worst_path = std::max(worst_path, std::abs(tr.positions[i](0) - exact));
            if (std::abs(t - 0.5) < 3 * dt) continue;
            const double fd = (tr.positions[i + 1](0) - tr.positions[i](0)) / dt;
            worst_fd = std::max(worst_fd, std::abs(fd - forward_velocity(ic, quad1, t, tr.positions[i])(0)));
        }
        INFO("dt=", dt, " path=", worst_path, " fd=", worst_fd);
        CHECK(worst_path <= 2 * dt);
        CHECK(worst_fd <= 1e-6);
    }
}

TEST_CASE("invalid flow parameters") {
    const auto ic = InitialCondition::neg_abs(1);
    try {
        integrate_flow(ic, quad1, {vec({0.5})}, 1.0, 0.0);
        FAIL("zero step accepted");
    } catch (const ConfigError& e) {
        CHECK(e.key() == "flow.dt");
    }
    CHECK_THROWS_AS(integrate_flow(ic, quad1, {vec({0.5})}, -1.0, 1e-3), ConfigError);
}
