#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "shockflow/admissible.hpp"
#include "shockflow/config.hpp"
#include "shockflow/errors.hpp"
#include "shockflow/experiments.hpp"
#include "shockflow/flow.hpp"
#include "shockflow/hopf_lax.hpp"
#include "shockflow/stochastic.hpp"
#include "shockflow/superdiff.hpp"
#include "shockflow/viscous.hpp"

namespace py = pybind11;
using namespace shockflow;

namespace {

// Eigen vectors cross the boundary as 1-D numpy arrays; plain Eigen::VectorXd
// avoids relying on the caster for the fixed-capacity Vec type.
Eigen::VectorXd out(const Vec& v) { return Eigen::VectorXd(v); }
Vec in(const Eigen::VectorXd& v) { return Vec(v); }

std::vector<Eigen::VectorXd> out(const std::vector<Vec>& vs) {
    std::vector<Eigen::VectorXd> r;
    for (const auto& v : vs) r.push_back(out(v));
    return r;
}

std::vector<Vec> in(const std::vector<Eigen::VectorXd>& vs) {
    std::vector<Vec> r;
    for (const auto& v : vs) r.push_back(in(v));
    return r;
}

py::dict entry_dict(const LimitEntry& e) {
    py::dict d;
    d["momentum"] = out(e.momentum);
    d["energy"] = e.energy;
    d["velocity"] = out(e.velocity);
    return d;
}

}  // namespace

PYBIND11_MODULE(_shockflow, m) {
    m.doc() = "Shock dynamics of Hamilton-Jacobi equations: admissible velocities and coalescing flows.";
    m.attr("__version__") = kVersion;

    static py::exception<ConfigError> config_error(m, "ConfigError", PyExc_ValueError);
    static py::exception<NumericalFailure> numerical_failure(m, "NumericalFailure", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ConfigError& e) {
            config_error(e.what());
        } catch (const NumericalFailure& e) {
            numerical_failure(e.what());
        }
    });

    py::class_<HamiltonianModel>(m, "HamiltonianModel")
        .def_static("quadratic", &HamiltonianModel::quadratic, py::arg("dim"))
        .def_static("anisotropic", [](const Eigen::MatrixXd& a) { return HamiltonianModel::anisotropic(Mat(a)); },
                    py::arg("matrix"))
        .def_static("power_law", &HamiltonianModel::power_law, py::arg("dim"), py::arg("exponent"))
        .def_static("cosh_sum", &HamiltonianModel::cosh_sum, py::arg("dim"))
        .def_property_readonly("dim", &HamiltonianModel::dim)
        .def("describe", &HamiltonianModel::describe)
        .def("hamiltonian", [](const HamiltonianModel& h, const Eigen::VectorXd& p) { return h.hamiltonian(in(p)); })
        .def("gradient", [](const HamiltonianModel& h, const Eigen::VectorXd& p) { return out(h.gradient(in(p))); })
        .def("lagrangian", [](const HamiltonianModel& h, const Eigen::VectorXd& v) { return h.lagrangian(in(v)); })
        .def("lagrangian_gradient",
             [](const HamiltonianModel& h, const Eigen::VectorXd& v) { return out(h.lagrangian_gradient(in(v))); })
        .def("__repr__", [](const HamiltonianModel& h) { return "<HamiltonianModel " + h.describe() + ">"; });

    py::class_<InitialCondition>(m, "InitialCondition")
        .def_static("zero", &InitialCondition::zero, py::arg("dim"))
        .def_static("constant", &InitialCondition::constant, py::arg("dim"), py::arg("value"))
        .def_static("linear", [](const Eigen::VectorXd& a) { return InitialCondition::linear(in(a)); }, py::arg("slope"))
        .def_static("neg_abs", &InitialCondition::neg_abs, py::arg("dim"), py::arg("drift") = 0.0)
        .def_static("neg_power", &InitialCondition::neg_power, py::arg("dim"))
        .def_static("cosine", &InitialCondition::cosine, py::arg("dim"), py::arg("amplitude"))
        .def_static("min_affine",
                    [](const std::vector<Eigen::VectorXd>& slopes, std::vector<double> offsets) {
                        return InitialCondition::min_affine(in(slopes), std::move(offsets));
                    },
                    py::arg("slopes"), py::arg("offsets"))
        .def_property_readonly("dim", &InitialCondition::dim)
        .def_property_readonly("name", &InitialCondition::name)
        .def("__call__", [](const InitialCondition& ic, const Eigen::VectorXd& y) { return ic(in(y)); });

    m.def("lagrangian", [](const HamiltonianModel& h, const Eigen::VectorXd& v) { return lagrangian_of(h, in(v)); });
    m.def("velocity_of_momentum",
          [](const HamiltonianModel& h, const Eigen::VectorXd& p) { return out(velocity_of_momentum(h, in(p))); });
    m.def("momentum_of_velocity",
          [](const HamiltonianModel& h, const Eigen::VectorXd& v) { return out(momentum_of_velocity(h, in(v))); });
    m.def("young_gap", [](const HamiltonianModel& h, const Eigen::VectorXd& p, const Eigen::VectorXd& v) {
        return young_gap(h, in(p), in(v));
    });
    m.def("bregman_divergence", [](const HamiltonianModel& h, const Eigen::VectorXd& v, const Eigen::VectorXd& w) {
        return bregman_divergence(h, in(v), in(w));
    });

    m.def(
        "solve_value",
        [](const InitialCondition& ic, const HamiltonianModel& h, double t, const Eigen::VectorXd& x) {
            const auto r = solve_value(ic, h, t, in(x));
            py::dict d;
            d["value"] = r.value;
            d["minimizers"] = out(r.minimizers);
            d["velocities"] = out(r.velocities);
            return d;
        },
        py::arg("ic"), py::arg("model"), py::arg("t"), py::arg("x"));
    m.def(
        "evaluate_phi",
        [](const InitialCondition& ic, const HamiltonianModel& h, double t, const Eigen::VectorXd& x) {
            return evaluate_phi(ic, h, t, in(x));
        },
        py::arg("ic"), py::arg("model"), py::arg("t"), py::arg("x"));

    py::class_<LimitMomentumSet>(m, "LimitMomentumSet")
        .def_property_readonly("k", &LimitMomentumSet::k)
        .def_property_readonly("entries",
                               [](const LimitMomentumSet& l) {
                                   py::list r;
                                   for (const auto& e : l.entries) r.append(entry_dict(e));
                                   return r;
                               })
        .def("is_shock", [](const LimitMomentumSet& l) { return is_shock(l); });

    m.def(
        "limit_data",
        [](const InitialCondition& ic, const HamiltonianModel& h, double t, const Eigen::VectorXd& x,
           double cluster_tol) {
            SuperdiffOptions o;
            o.momentum_cluster_tol = cluster_tol;
            return limit_data(ic, h, t, in(x), o);
        },
        py::arg("ic"), py::arg("model"), py::arg("t"), py::arg("x"), py::arg("cluster_tol") = 1e-3);
    m.def(
        "limit_set_from_momenta",
        [](const HamiltonianModel& h, const std::vector<Eigen::VectorXd>& ps) { return limit_set_from_momenta(h, in(ps)); },
        py::arg("model"), py::arg("momenta"));

    py::class_<AdmissibleSolution>(m, "AdmissibleSolution")
        .def_property_readonly("v_star", [](const AdmissibleSolution& s) { return out(s.v_star); })
        .def_property_readonly("p_star", [](const AdmissibleSolution& s) { return out(s.p_star); })
        .def_readonly("H_star", &AdmissibleSolution::H_star)
        .def_readonly("active_set", &AdmissibleSolution::active_set)
        .def_readonly("weights", &AdmissibleSolution::weights)
        .def_readonly("anomaly", &AdmissibleSolution::anomaly)
        .def_readonly("hull_distance", &AdmissibleSolution::hull_distance);

    m.def("admissible_velocity", [](const LimitMomentumSet& l, const HamiltonianModel& h) { return admissible_velocity(l, h); },
          py::arg("lms"), py::arg("model"));
    m.def("lhat", [](const LimitMomentumSet& l, const HamiltonianModel& h, const Eigen::VectorXd& v) {
        return lhat(l, h, in(v));
    });
    m.def("active_set", [](const LimitMomentumSet& l, const HamiltonianModel& h, const Eigen::VectorXd& v, double tol) {
        return active_set(l, h, in(v), tol);
    }, py::arg("lms"), py::arg("model"), py::arg("v"), py::arg("tol") = 1e-9);
    m.def(
        "check_admissibility",
        [](const LimitMomentumSet& l, const HamiltonianModel& h, const Eigen::VectorXd& v) {
            const auto r = check_admissibility(l, h, in(v));
            py::dict d;
            d["accepted"] = r.accepted;
            d["hull_distance"] = r.hull_distance;
            d["active_set"] = r.active_set;
            d["weights"] = r.weights;
            return d;
        },
        py::arg("lms"), py::arg("model"), py::arg("v"));
    m.def("classify_shock", [](const LimitMomentumSet& l, const HamiltonianModel& h, const AdmissibleSolution& s) {
        return to_string(classify_shock(l, h, s));
    });
    m.def("self_consistent_velocities", [](const LimitMomentumSet& l, const HamiltonianModel& h) {
        py::list r;
        for (const auto& s : self_consistent_velocity(l, h)) {
            py::dict d;
            d["v_dagger"] = out(s.v_dagger);
            d["active_set"] = s.active_set;
            d["shares"] = s.shares;
            r.append(d);
        }
        return r;
    });

    m.def(
        "integrate_flow",
        [](const InitialCondition& ic, const HamiltonianModel& h, const std::vector<Eigen::VectorXd>& seeds, double T,
           double dt) {
            py::list r;
            for (const auto& tr : integrate_flow(ic, h, in(seeds), T, dt)) {
                py::dict d;
                d["id"] = tr.id;
                d["times"] = tr.times;
                d["positions"] = out(tr.positions);
                std::vector<bool> on(tr.on_shock.begin(), tr.on_shock.end());
                d["on_shock"] = on;
                d["shock_entry"] = tr.shock_entry;
                d["merged_into"] = tr.merged_into;
                d["merge_time"] = tr.merge_time;
                r.append(d);
            }
            return r;
        },
        py::arg("ic"), py::arg("model"), py::arg("seeds"), py::arg("T"), py::arg("dt") = 1e-3);

    m.def(
        "_run_experiment",
        [](const std::filesystem::path& config, const std::filesystem::path& out_dir) {
            const auto c = ExperimentConfig::from_file(config);
            return run_experiment(c, out_dir).summary.dump();
        },
        py::arg("config"), py::arg("output_dir") = std::filesystem::path{});
    m.def("fixture_names", [] {
        std::vector<std::string> r;
        for (const auto& f : fixture_catalog()) r.push_back(f.name);
        return r;
    });
}
