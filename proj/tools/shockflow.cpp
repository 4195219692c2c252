#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "shockflow/config.hpp"
#include "shockflow/errors.hpp"
#include "shockflow/experiments.hpp"

namespace {

enum Exit { kOk = 0, kConfig = 2, kNumerical = 3 };

template <typename Fn>
int guarded(Fn&& fn) {
    try {
        fn();
        return kOk;
    } catch (const shockflow::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const shockflow::NumericalFailure& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kNumerical;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: internal: " << e.what() << '\n';
        return kNumerical;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Admissible particle flows for convex Hamilton-Jacobi equations"};
    app.require_subcommand(1);
    app.set_version_flag("--version", shockflow::kVersion);

    std::string config_path;
    std::string out_dir;
    auto* run = app.add_subcommand("run", "run the experiment described by a config file");
    run->add_option("config", config_path, "key = value config file")->required();
    run->add_option("-o,--output", out_dir, "override output.dir");

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "check a config file without running it");
    validate->add_option("config", validate_path, "key = value config file")->required();

    auto* list = app.add_subcommand("list-fixtures", "list initial data and config keys");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfig;
    }

    if (*run) {
        return guarded([&] {
            const auto cfg = shockflow::ExperimentConfig::from_file(config_path);
            const auto result = shockflow::run_experiment(cfg, out_dir);
            std::cout << cfg.experiment() << ": wrote";
            for (const auto& f : result.outputs) std::cout << ' ' << f;
            std::cout << '\n' << result.summary.dump(2) << '\n';
        });
    }
    if (*validate) {
        return guarded([&] {
            const auto cfg = shockflow::ExperimentConfig::from_file(validate_path);
            // Building the model and fixture catches cross-key errors as well.
            shockflow::make_model(cfg);
            shockflow::make_fixture(cfg);
            std::cout << "ok: " << cfg.experiment() << '\n';
        });
    }
    if (*list) {
        std::cout << "fixtures:\n";
        for (const auto& f : shockflow::fixture_catalog())
            std::cout << "  " << f.name << "  " << f.description << "  [" << f.parameters << "]\n";
        std::cout << "config keys:\n";
        for (const auto& s : shockflow::config_schema())
            std::cout << "  " << s.key << (s.default_value.empty() ? "" : " = " + s.default_value) << "  # "
                      << s.help << '\n';
    }
    return kOk;
}
