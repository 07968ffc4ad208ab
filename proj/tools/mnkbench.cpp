// mnkbench: MNK-landscape experiment driver.
#include "mnk/error.hpp"
#include "mnk/experiment.hpp"
#include "mnk/io.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>

int main(int argc, char** argv) {
    CLI::App app{"MNK-landscape workbench: instances, exact Pareto sets, mBOA / NSGA-III campaigns and reports"};
    app.require_subcommand(1);

    std::string config_path;
    int jobs = 1;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> output;
    app.add_option("--config", config_path, "experiment configuration (JSON)")->check(CLI::ExistingFile);
    app.add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--seed", seed, "master seed (overrides the config)");
    app.add_option("--output", output, "output directory (overrides the config)");

    auto* gen = app.add_subcommand("gen", "generate the instance grid");
    auto* enumerate = app.add_subcommand("enumerate", "enumerate exact Pareto sets");
    auto* features = app.add_subcommand("features", "write reports/features.csv");
    auto* run = app.add_subcommand("run", "run an optimizer campaign (resumable)");
    std::string algorithm;
    run->add_option("algorithm", algorithm, "mboa or nsga3")->required()->check(CLI::IsMember({"mboa", "nsga3"}));
    auto* ert = app.add_subcommand("ert", "write reports/ert.csv");
    auto* regress = app.add_subcommand("regress", "write reports/regression.json and plot data");
    auto* pmf = app.add_subcommand("pmf-view", "write reports/pmf_view/<instance>.csv");
    auto* report = app.add_subcommand("report", "features, ert, regress and pmf-view");
    auto* all = app.add_subcommand("all", "gen, enumerate, both campaigns and report");
    auto* show = app.add_subcommand("config", "print the effective configuration");

    CLI11_PARSE(app, argc, argv);

    try {
        mnk::ExperimentConfig config;
        if (!config_path.empty()) config = mnk::config_from_json(mnk::read_file(config_path));
        if (seed) config.master_seed = *seed;
        if (output) config.output_dir = *output;
        mnk::Experiment experiment(config, jobs);

        if (*gen) std::cout << "generated " << experiment.gen() << " instances\n";
        else if (*enumerate) std::cout << "enumerated " << experiment.enumerate() << " instances\n";
        else if (*features) experiment.features();
        else if (*run) std::cout << algorithm << ": completed " << experiment.run(algorithm) << " runs\n";
        else if (*ert) experiment.ert();
        else if (*regress) experiment.regress();
        else if (*pmf) std::cout << "wrote " << experiment.pmf_view() << " pmf views\n";
        else if (*report) experiment.report();
        else if (*all) experiment.all();
        else if (*show) std::cout << mnk::config_to_json(experiment.config());
    } catch (const mnk::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
