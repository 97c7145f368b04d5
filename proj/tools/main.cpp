#include <chrono>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sbayes/experiment.hpp"
#include "sbayes/parallel.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Spike-and-slab and empirical Bayes experiments"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    std::uint64_t seed = 0;
    long reps = 0;
    std::string out;
    unsigned workers = 0;
    bool check_only = false;

    for (const std::string& kind : sbayes::experiment_kinds()) {
        CLI::App* sub = app.add_subcommand(kind, "run the " + kind + " experiment");
        sub->add_option("--config", config_path, "key = value configuration file");
        sub->add_option("--set", overrides, "override a parameter, key=value (repeatable)");
        sub->add_option("--seed", seed, "64-bit seed");
        sub->add_option("--reps", reps, "Monte Carlo replicates");
        sub->add_option("--out", out, "output path prefix for <out>.csv and <out>.json");
        sub->add_option("--workers", workers, "worker threads (does not change outputs)");
        sub->add_flag("--validate", check_only, "validate the configuration and exit");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    sbayes::ExperimentConfig config;
    config.kind = app.get_subcommands().front()->get_name();
    config.workers = sbayes::default_workers();
    CLI::App* sub = app.get_subcommands().front();
    try {
        if (!config_path.empty()) sbayes::load_config_file(config, config_path);
        for (const std::string& o : overrides) sbayes::apply_override(config, o);
        if (config.kind != sub->get_name())
            throw sbayes::ConfigError("kind", "configuration is for '" + config.kind + "', not '" + sub->get_name() + "'");
        if (sub->count("--seed")) config.seed = seed;
        if (sub->count("--reps")) config.replicates = reps;
        if (sub->count("--out")) config.out = out;
        if (sub->count("--workers")) config.workers = workers;
        if (config.replicates < 1) throw sbayes::ConfigError("reps", "expected a positive integer");
        if (config.workers < 1) throw sbayes::ConfigError("workers", "expected a positive integer");

        const sbayes::ValidationReport report = sbayes::validate(config);
        for (const std::string& w : report.warnings) std::cerr << "warning: " << w << '\n';
        if (!report.ok()) {
            for (const auto& e : report.errors) std::cerr << "config error: " << e.field << ": " << e.message << '\n';
            return kExitConfig;
        }
        if (check_only) return 0;

        const auto start = std::chrono::steady_clock::now();
        const sbayes::ExperimentResult result = sbayes::run(config);
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        sbayes::write_outputs(config, result, wall);
        std::cout << sbayes::to_csv(result.table);
        return 0;
    } catch (const sbayes::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        const std::string path = config.out + ".diagnostic.json";
        nlohmann::ordered_json diag;
        diag["experiment"] = config.kind;
        diag["seed"] = config.seed;
        diag["error"] = e.what();
        nlohmann::ordered_json params = nlohmann::ordered_json::object();
        for (const auto& [k, v] : config.params) params[k] = v;
        diag["config"] = params;
        std::ofstream(path) << diag.dump(2) << '\n';
        std::cerr << "numerical failure: " << e.what() << "\ndiagnostic state: " << path << '\n';
        return kExitNumerical;
    }
}
