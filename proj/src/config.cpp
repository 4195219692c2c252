#include "shockflow/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "shockflow/errors.hpp"

namespace shockflow {

namespace {

constexpr double kInf = 1e300;

std::string brief(double x) {
    std::ostringstream os;
    os << x;
    return os.str();
}

std::string num(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

double parse_real(const std::string& key, const std::string& text) {
    const std::string s = boost::trim_copy(text);
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw ConfigError(key, "expected a number, got '" + text + "'");
    }
    if (used != s.size()) throw ConfigError(key, "expected a number, got '" + text + "'");
    if (!std::isfinite(v)) throw ConfigError(key, "value must be finite");
    return v;
}

}  // namespace

const std::vector<KeySpec>& config_schema() {
    static const std::vector<KeySpec> schema = [] {
        using K = KeyType;
        const std::string pi = num(std::numbers::pi);
        return std::vector<KeySpec>{
            {"experiment", K::choice, "", 0, 0,
             {"solve", "particles", "viscous-compare", "anomaly", "sde", "admissible-bench"},
             "experiment to run"},
            {"output.dir", K::text, "out", 0, 0, {}, "output directory"},
            {"rng_seed", K::integer, "1", 0, 9e18, {}, "random seed"},

            {"fixture.name", K::choice, "neg_abs", 0, 0,
             {"zero", "constant", "linear", "neg_abs", "neg_power", "cosine", "min_affine"}, "initial datum"},
            {"fixture.dim", K::integer, "1", 1, 3, {}, "space dimension"},
            {"fixture.value", K::real, "0", -kInf, kInf, {}, "constant datum value"},
            {"fixture.slope", K::real_list, "", -kInf, kInf, {}, "linear datum slope"},
            {"fixture.drift", K::real, "0", -10, 10, {}, "tilt added to neg_abs"},
            {"fixture.amplitude", K::real, "1", -100, 100, {}, "cosine amplitude"},
            {"fixture.slopes", K::vector_list, "", -kInf, kInf, {}, "min_affine slopes p_i"},
            {"fixture.offsets", K::real_list, "", -kInf, kInf, {}, "min_affine offsets c_i"},

            {"hamiltonian.kind", K::choice, "quadratic", 0, 0, {"quadratic", "anisotropic", "power", "cosh"},
             "Hamiltonian family"},
            {"hamiltonian.exponent", K::real, "2", 1.0 + 1e-9, 100, {}, "power-law exponent a > 1"},
            {"hamiltonian.matrix", K::real_list, "", -kInf, kInf, {}, "SPD matrix, row-major"},

            {"hopf_lax.value_rel_tol", K::real, "1e-7", 1e-15, 1e-2, {}, "minimizer value tolerance"},
            {"hopf_lax.scan_points", K::integer, "0", 0, 1e6, {}, "coarse scan points per axis"},
            {"superdiff.momentum_cluster_tol", K::real, "1e-3", 1e-12, 1, {}, "momentum dedup tolerance"},
            {"admissible.tie_tol", K::real, "1e-9", 0, 1e-3, {}, "active-set band"},
            {"admissible.certify_tol", K::real, "1e-8", 1e-14, 1e-3, {}, "certification hull distance"},

            {"solve.times", K::real_list, "0.5", 1e-12, 1e6, {}, "evaluation times"},
            {"solve.x_min", K::real, "-" + pi, -1e3, 1e3, {}, "lower corner of evaluation box"},
            {"solve.x_max", K::real, pi, -1e3, 1e3, {}, "upper corner of evaluation box"},
            {"solve.points", K::integer, "101", 2, 1e5, {}, "points per axis"},

            {"flow.T", K::real, "1", 1e-12, 1e4, {}, "flow horizon"},
            {"flow.dt", K::real, "1e-3", 1e-9, 0.1, {}, "Euler step"},
            {"flow.seeds", K::vector_list, "0.5;-0.3", -1e3, 1e3, {}, "initial positions"},
            {"flow.merge_tol", K::real, "-1", -1, 1e3, {}, "merge tolerance, < 0 means 2 dt V_max"},

            {"viscous.mu", K::real, "0.01", 1e-12, 1e3, {}, "viscosity"},
            {"viscous.mu_ladder", K::real_list, "0.08,0.04,0.02,0.01", 1e-12, 1e3, {}, "viscosity ladder"},
            {"viscous.N", K::integer, "2048", 8, 65536, {}, "grid nodes per axis"},
            {"viscous.T", K::real, "1", 1e-12, 1e4, {}, "horizon"},
            {"viscous.dt", K::real, "0", 0, 1, {}, "time step, 0 picks the stability bound"},
            {"viscous.frame_dt", K::real, "0", 0, 1e4, {}, "spacing of stored frames"},
            {"viscous.seed", K::vector_list, "0.5", -1e3, 1e3, {}, "regularized flow seed"},
            {"viscous.window", K::real, "1", 1e-6, 1e3, {}, "half-width of the measurement window"},
            {"viscous.flow_dt", K::real, "1e-3", 1e-9, 0.1, {}, "step of the regularized and inviscid flows"},

            {"anomaly.point", K::vector_list, "0", -1e3, 1e3, {}, "seed of the shock trajectory"},
            {"anomaly.plateau_from", K::real, "0.5", 0, 1e4, {}, "plateau averaging start time"},

            {"sde.epsilon", K::real, "0.05", 0, 1e3, {}, "noise amplitude"},
            {"sde.epsilon_ladder", K::real_list, "", 0, 1e3, {}, "noise ladder (overrides sde.epsilon)"},
            {"sde.n_paths", K::integer, "400", 1, 1e7, {}, "ensemble size"},
            {"sde.dt", K::real, "1e-3", 1e-9, 1e-3, {}, "Euler-Maruyama step"},
            {"sde.t0", K::real, "0", 0, 1e4, {}, "start time"},
            {"sde.T", K::real, "1", 1e-9, 1e4, {}, "end time"},
            {"sde.seed_point", K::vector_list, "0", -1e3, 1e3, {}, "start position of every path"},
            {"sde.stored_paths", K::integer, "16", 0, 1e5, {}, "paths written in full"},

            {"bench.instances", K::integer, "200", 1, 1e6, {}, "random instances"},
            {"bench.max_dim", K::integer, "3", 1, 3, {}, "largest dimension"},
            {"bench.max_k", K::integer, "6", 2, 8, {}, "largest branch count"},
            {"bench.grid_step_1d", K::real, "1e-3", 1e-7, 1, {}, "oracle grid step in 1D"},
            {"bench.grid_step", K::real, "5e-3", 1e-7, 1, {}, "oracle grid step in 2D and 3D"},
        };
    }();
    return schema;
}

ExperimentConfig ExperimentConfig::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot read " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return from_string(ss.str());
}

ExperimentConfig ExperimentConfig::from_string(const std::string& text) {
    // '#' comments are accepted alongside the INI ';' style.
    std::string cleaned;
    std::istringstream lines(text);
    for (std::string line; std::getline(lines, line);) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        cleaned += line + "\n";
    }
    boost::property_tree::ptree tree;
    std::istringstream in(cleaned);
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError("config", "line " + std::to_string(e.line()) + ": " + e.message());
    }
    std::map<std::string, std::string> entries;
    for (const auto& [name, node] : tree) {
        if (node.empty()) {
            entries[name] = boost::trim_copy(node.data());
            continue;
        }
        for (const auto& [sub, leaf] : node) entries[name + "." + sub] = boost::trim_copy(leaf.data());
    }
    return from_map(entries);
}

ExperimentConfig ExperimentConfig::from_map(const std::map<std::string, std::string>& entries) {
    ExperimentConfig cfg;
    cfg.given_ = entries;
    cfg.validate();
    return cfg;
}

const KeySpec& ExperimentConfig::spec(const std::string& key) const {
    const auto& schema = config_schema();
    const auto it = std::find_if(schema.begin(), schema.end(), [&](const KeySpec& s) { return s.key == key; });
    if (it == schema.end()) throw ConfigError(key, "unknown key");
    return *it;
}

void ExperimentConfig::validate() const {
    for (const auto& [key, value] : given_) {
        const KeySpec& s = spec(key);
        auto in_range = [&](double v) {
            if (v < s.lo || v > s.hi)
                throw ConfigError(key, "value " + brief(v) + " outside [" + brief(s.lo) + ", " + brief(s.hi) + "]");
        };
        switch (s.type) {
            case KeyType::real: in_range(parse_real(key, value)); break;
            case KeyType::integer: {
                const double v = parse_real(key, value);
                if (v != std::floor(v)) throw ConfigError(key, "expected an integer, got '" + value + "'");
                in_range(v);
                break;
            }
            case KeyType::choice:
                if (std::find(s.choices.begin(), s.choices.end(), value) == s.choices.end())
                    throw ConfigError(key, "'" + value + "' is not one of " + boost::join(s.choices, ", "));
                break;
            case KeyType::real_list:
                for (double v : parse_reals(key, value)) in_range(v);
                break;
            case KeyType::vector_list:
                for (const Vec& v : vectors(key))
                    for (double x : v) in_range(x);
                break;
            case KeyType::text:
                if (value.empty()) throw ConfigError(key, "value must not be empty");
                break;
        }
    }
    if (!has("experiment")) throw ConfigError("experiment", "missing required key");
}

bool ExperimentConfig::has(const std::string& key) const {
    if (given_.count(key)) return true;
    return !spec(key).default_value.empty();
}

std::string ExperimentConfig::raw(const std::string& key) const {
    const auto it = given_.find(key);
    if (it != given_.end()) return it->second;
    const KeySpec& s = spec(key);
    if (s.default_value.empty()) throw ConfigError(key, "missing required key");
    return s.default_value;
}

double ExperimentConfig::real(const std::string& key) const { return parse_real(key, raw(key)); }

long long ExperimentConfig::integer(const std::string& key) const {
    return static_cast<long long>(parse_real(key, raw(key)));
}

std::string ExperimentConfig::text(const std::string& key) const { return raw(key); }

std::vector<double> ExperimentConfig::reals(const std::string& key) const { return parse_reals(key, raw(key)); }

std::vector<Vec> ExperimentConfig::vectors(const std::string& key) const {
    std::vector<std::string> parts;
    const std::string value = raw(key);
    boost::split(parts, value, boost::is_any_of(";"));
    std::vector<Vec> out;
    for (const auto& part : parts) {
        const auto comps = parse_reals(key, part);
        if (comps.empty() || comps.size() > 3) throw ConfigError(key, "vectors need 1 to 3 components");
        Vec v(static_cast<int>(comps.size()));
        for (std::size_t i = 0; i < comps.size(); ++i) v[static_cast<int>(i)] = comps[i];
        out.push_back(v);
    }
    return out;
}

std::map<std::string, std::string> ExperimentConfig::resolved() const {
    std::map<std::string, std::string> out;
    for (const auto& s : config_schema())
        if (!s.default_value.empty()) out[s.key] = s.default_value;
    for (const auto& [k, v] : given_) out[k] = v;
    return out;
}

std::vector<double> parse_reals(const std::string& key, const std::string& text) {
    std::vector<std::string> parts;
    const std::string trimmed = boost::trim_copy(text);
    if (trimmed.empty()) return {};
    boost::split(parts, trimmed, boost::is_any_of(","));
    std::vector<double> out;
    for (const auto& p : parts) out.push_back(parse_real(key, p));
    return out;
}

}  // namespace shockflow
