#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "shockflow/config.hpp"
#include "shockflow/errors.hpp"
#include "shockflow/experiments.hpp"
#include "support.hpp"

using namespace shockflow;

namespace {

std::string key_of_error(const std::string& text) {
    try {
        ExperimentConfig::from_string(text);
    } catch (const ConfigError& e) {
        return e.key();
    }
    return "none";
}

std::string first_line(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    return line;
}

std::filesystem::path scratch(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("shockflow_test_" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

}  // namespace

TEST_CASE("flat keys, sections and comments") {
    const auto c = ExperimentConfig::from_string(
        "# anomaly run\n"
        "experiment = anomaly\n"
        "viscous.mu = 0.02   # inline comment\n"
        "[hamiltonian]\n"
        "kind = power\n"
        "exponent = 4\n"
        "[flow]\n"
        "seeds = 0.5; -0.3\n");
    CHECK(c.experiment() == "anomaly");
    CHECK(c.real("viscous.mu") == 0.02);
    CHECK(c.text("hamiltonian.kind") == "power");
    CHECK(c.real("hamiltonian.exponent") == 4.0);
    const auto seeds = c.vectors("flow.seeds");
    REQUIRE(seeds.size() == 2);
    CHECK(seeds[1](0) == -0.3);
    CHECK(c.real("viscous.T") == 1.0);  // default
    CHECK(c.reals("viscous.mu_ladder") == std::vector<double>{0.08, 0.04, 0.02, 0.01});
    CHECK(c.resolved().at("viscous.N") == "2048");
    CHECK(c.given().count("viscous.N") == 0);
}

TEST_CASE("validation names the offending key") {
    CHECK(key_of_error("experiment = anomaly\nviscous.mu = -0.01\n") == "viscous.mu");
    CHECK(key_of_error("experiment = anomaly\nviscous.nu = 0.01\n") == "viscous.nu");
    CHECK(key_of_error("experiment = dance\n") == "experiment");
    CHECK(key_of_error("viscous.mu = 0.01\n") == "experiment");
    CHECK(key_of_error("experiment = solve\nviscous.N = 12.5\n") == "viscous.N");
    CHECK(key_of_error("experiment = solve\nflow.dt = fast\n") == "flow.dt");
    CHECK(key_of_error("experiment = solve\nhamiltonian.kind = cubic\n") == "hamiltonian.kind");
    CHECK(key_of_error("experiment = solve\nflow.seeds = 1,2,3,4\n") == "flow.seeds");
    CHECK_THROWS_AS(ExperimentConfig::from_file("/nonexistent/run.cfg"), ConfigError);
}

TEST_CASE("model and fixture construction") {
    auto c = ExperimentConfig::from_string(
        "experiment = solve\nfixture.name = min_affine\nfixture.dim = 2\n"
        "fixture.slopes = 1,0; 0,1\nfixture.offsets = 0,0.5\nhamiltonian.kind = anisotropic\n"
        "hamiltonian.matrix = 2,0.5,0.5,1\n");
    const auto model = make_model(c);
    CHECK(model.kind() == HamiltonianKind::anisotropic);
    CHECK(model.dim() == 2);
    const auto ic = make_fixture(c);
    CHECK(ic.form() == IcForm::min_affine);
    CHECK(ic(sft::vec({1.0, 0.0})) == 0.5);

    c = ExperimentConfig::from_string("experiment = solve\nhamiltonian.kind = anisotropic\nfixture.dim = 2\n");
    try {
        make_model(c);
        FAIL("missing matrix accepted");
    } catch (const ConfigError& e) {
        CHECK(e.key() == "hamiltonian.matrix");
    }
    CHECK(fixture_catalog().size() >= 7);
}

TEST_CASE("solve experiment writes fields and a manifest") {
    const auto out = scratch("solve");
    const auto c = ExperimentConfig::from_string(
        "experiment = solve\nfixture.name = neg_abs\nsolve.times = 0.5,1\nsolve.points = 21\n");
    const auto r = run_experiment(c, out);
    CHECK(first_line(out / "field.csv") == "t,x1,phi");
    CHECK(std::filesystem::exists(out / "shocks.csv"));
    std::ifstream in(out / "manifest.json");
    const auto m = nlohmann::json::parse(in);
    CHECK(m["experiment"] == "solve");
    CHECK(m["version"] == kVersion);
    CHECK(m["config"]["solve.points"] == "21");
    CHECK(m.contains("wall_time_s"));
    CHECK(!r.outputs.empty());
}

TEST_CASE("particles experiment links merged trajectories") {
    const auto out = scratch("particles");
    const auto c = ExperimentConfig::from_string("experiment = particles\nflow.T = 0.8\nflow.dt = 2e-3\n");
    const auto r = run_experiment(c, out);
    CHECK(first_line(out / "trajectories.csv") == "traj_id,t,x1,on_shock,merged_into");
    CHECK(r.summary["classes"].size() == 1);
    CHECK(r.summary["shock_reversions"] == 0);
}

TEST_CASE("bench experiment on a handful of instances") {
    const auto out = scratch("bench");
    const auto c = ExperimentConfig::from_string("experiment = admissible-bench\nbench.instances = 12\n");
    const auto r = run_experiment(c, out);
    CHECK(r.summary["certified"] == 12);
    CHECK(first_line(out / "bench.csv").rfind("instance,kind,dim,k", 0) == 0);
}
