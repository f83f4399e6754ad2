#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "beliefmkt/aggregation.hpp"
#include "beliefmkt/core.hpp"
#include "beliefmkt/portfolio.hpp"

namespace beliefmkt {

/// A fully validated run description, parsed from a JSON config file.
/// The schema is documented in the README; every field has a default
/// except the task, the state/agent counts where truths are implicit, and
/// the seed whenever the task draws randomness.
struct Scenario {
    int schema_version = 1;
    std::string name = "scenario";
    std::string task;
    std::size_t states = 2;
    std::size_t agents = 2;
    std::optional<BeliefProfile> truths;  // absent => seeded random draw
    AggregationRule rule = AggregationRule::linear_pool();
    std::optional<MarketSpec> market;     // absent => uniform prices, w = 1
    UtilityIndex utility = UtilityIndex::log_utility();
    Tolerance tolerance;
    std::optional<std::uint64_t> seed;
    int samples = 100;
    int lambdas_per_sample = 3;
    int resolution = 50;
    int sweep_points = 101;
    int max_rounds = 10000;
    std::uint64_t k_max = 1000000;
    std::vector<std::string> axioms;  // empty => the full default battery
    bool condition_mu = false;
    std::string output_dir = "out";

    MarketSpec effective_market() const;
};

extern const std::vector<std::string> kTasks;

/// Parses and validates a config. On any problem the returned Scenario is
/// unusable and `violations` lists every issue found, one message each.
std::optional<Scenario> parse_scenario(const std::string& json_text,
                                       std::vector<std::string>& violations);

struct RunArtifacts {
    int exit_code = 0;
    std::string summary_json;  // deterministic, floats at 17 digits
    std::vector<std::pair<std::string, std::string>> csv_files;
    std::vector<std::string> messages;  // human-readable progress lines
};

/// Executes the scenario's task in memory. strict turns axiom failures
/// into exit code 4; workers > 1 fans independent instances out over
/// threads without changing any output byte.
RunArtifacts run_scenario(const Scenario& scenario, bool strict = false,
                          int workers = 1);

/// File-level entry point used by the CLI: loads the config, applies the
/// overrides, runs the task, and writes summary.json plus the CSV tables
/// under the output directory. Returns the process exit code (0 ok,
/// 2 validation, 3 non-convergence, 4 axiom failure under strict).
int run_scenario_file(const std::string& config_path, const std::string& task,
                      std::optional<std::uint64_t> seed_override,
                      const std::optional<std::string>& out_override,
                      bool strict, int workers);

}  // namespace beliefmkt
