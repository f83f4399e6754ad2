// Scenario-driven front end: one subcommand per task, JSON config in,
// JSON summary and CSV tables out.

#include <cstdint>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "beliefmkt/scenario.hpp"

int main(int argc, char** argv) {
    CLI::App app{"belief aggregation, parimutuel equilibria, and "
                 "implementability checks"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    bool strict = false;
    int workers = 1;

    for (const std::string& task : beliefmkt::kTasks) {
        CLI::App* sub = app.add_subcommand(task, "run the " + task + " task");
        sub->add_option("--config", config_path, "path to the JSON config")
            ->required();
        sub->add_option("--seed", [&seed](const CLI::results_t& res) {
                seed = std::stoull(res.front());
                return true;
            },
            "override the config seed");
        sub->add_option("--out", [&out_dir](const CLI::results_t& res) {
                out_dir = res.front();
                return true;
            },
            "output directory (default from the config)");
        sub->add_flag("--strict", strict,
                      "exit 4 when an axiom check fails");
        sub->add_option("--workers", workers,
                        "worker threads for independent instances")
            ->check(CLI::PositiveNumber);
    }

    CLI11_PARSE(app, argc, argv);
    const std::string task = app.get_subcommands().front()->get_name();
    return beliefmkt::run_scenario_file(config_path, task, seed, out_dir,
                                        strict, workers);
}
