#include "beliefmkt/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <thread>

#include "beliefmkt/axioms.hpp"
#include "beliefmkt/mechanism.hpp"
#include "beliefmkt/parimutuel.hpp"
#include "beliefmkt/random.hpp"
#include "beliefmkt/revelation.hpp"

#include "json.hpp"

namespace beliefmkt {

using ordered_json = nlohmann::ordered_json;

const std::vector<std::string> kTasks = {
    "aggregate",       "equilibrium",   "parimutuel",
    "axioms",          "mechanism-audit", "example1-sweep",
};

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------
// Deterministic output formatting: every float is printed with 17
// significant digits so values round-trip exactly and reruns are
// byte-identical.

std::string fmt17(double v) {
    if (std::isnan(v)) return "nan";
    if (v == kInf) return "inf";
    if (v == -kInf) return "-inf";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

ordered_json json_number(double v) {
    if (std::isfinite(v)) return v;
    return fmt17(v);  // JSON has no inf/nan literals
}

ordered_json json_vector(const std::vector<double>& v) {
    ordered_json arr = ordered_json::array();
    for (double x : v) arr.push_back(json_number(x));
    return arr;
}

ordered_json json_belief(const Belief& b) { return json_vector(b.probs()); }

ordered_json json_profile(const BeliefProfile& p) {
    ordered_json arr = ordered_json::array();
    for (const Belief& b : p) arr.push_back(json_belief(b));
    return arr;
}

void dump17(const ordered_json& j, std::string& out, int indent) {
    const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    const std::string pad_in(static_cast<std::size_t>(indent + 1) * 2, ' ');
    switch (j.type()) {
        case ordered_json::value_t::object: {
            if (j.empty()) { out += "{}"; return; }
            out += "{\n";
            std::size_t k = 0;
            for (auto it = j.begin(); it != j.end(); ++it, ++k) {
                out += pad_in;
                out += ordered_json(it.key()).dump();
                out += ": ";
                dump17(it.value(), out, indent + 1);
                if (k + 1 < j.size()) out += ",";
                out += "\n";
            }
            out += pad + "}";
            return;
        }
        case ordered_json::value_t::array: {
            if (j.empty()) { out += "[]"; return; }
            out += "[";
            for (std::size_t k = 0; k < j.size(); ++k) {
                dump17(j[k], out, indent);
                if (k + 1 < j.size()) out += ", ";
            }
            out += "]";
            return;
        }
        case ordered_json::value_t::number_float:
            out += fmt17(j.get<double>());
            return;
        default:
            out += j.dump();
            return;
    }
}

std::string dump17(const ordered_json& j) {
    std::string out;
    dump17(j, out, 0);
    out += "\n";
    return out;
}

class CsvBuilder {
  public:
    explicit CsvBuilder(std::string header) { rows_ = header + "\n"; }

    void row(std::initializer_list<std::string> cells) {
        bool first = true;
        for (const std::string& c : cells) {
            if (!first) rows_ += ",";
            rows_ += c;
            first = false;
        }
        rows_ += "\n";
    }

    std::string str() && { return std::move(rows_); }

  private:
    std::string rows_;
};

std::string cell(double v) { return fmt17(v); }
std::string cell(std::size_t v) { return std::to_string(v); }

// ---------------------------------------------------------------------
// Worker pool: instance i writes only slot i, so output order and bytes
// do not depend on the worker count.

void parallel_for(std::size_t count, int workers,
                  const std::function<void(std::size_t)>& fn) {
    if (workers <= 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    const int active = std::min<int>(workers, static_cast<int>(count));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(active));
    for (int w = 0; w < active; ++w)
        pool.emplace_back([&, w] {
            for (std::size_t i = static_cast<std::size_t>(w); i < count;
                 i += static_cast<std::size_t>(active))
                fn(i);
        });
    for (std::thread& t : pool) t.join();
}

// ---------------------------------------------------------------------
// Config parsing. Violations accumulate so a malformed config reports
// everything wrong with it at once.

class ConfigReader {
  public:
    ConfigReader(const ordered_json& j, std::vector<std::string>& violations)
        : j_(j), violations_(violations) {}

    template <typename T>
    std::optional<T> get(const std::string& key) {
        if (!j_.contains(key)) return std::nullopt;
        try {
            return j_.at(key).get<T>();
        } catch (const std::exception&) {
            violations_.push_back("field '" + key + "' has the wrong type");
            return std::nullopt;
        }
    }

    bool contains(const std::string& key) const { return j_.contains(key); }
    const ordered_json& raw(const std::string& key) const { return j_.at(key); }
    void violation(std::string msg) { violations_.push_back(std::move(msg)); }

  private:
    const ordered_json& j_;
    std::vector<std::string>& violations_;
};

std::optional<AggregationRule> parse_rule(const ordered_json& spec,
                                          std::vector<std::string>& violations) {
    if (!spec.is_object() || !spec.contains("kind") ||
        !spec.at("kind").is_string()) {
        violations.push_back("rule must be an object with a string 'kind'");
        return std::nullopt;
    }
    const std::string kind = spec.at("kind").get<std::string>();
    try {
        if (kind == "linear-pool") {
            if (spec.contains("weights"))
                return AggregationRule::linear_pool(
                    spec.at("weights").get<std::vector<double>>());
            return AggregationRule::linear_pool();
        }
        if (kind == "geometric-median") return AggregationRule::geometric_median();
        if (kind == "parimutuel-price") return AggregationRule::parimutuel_price();
        if (kind == "phantom-median") return AggregationRule::phantom_median_2state();
        if (kind == "dictatorship")
            return AggregationRule::dictatorship(
                spec.value("agent", std::size_t{0}));
        if (kind == "constant") {
            if (!spec.contains("belief")) {
                violations.push_back("constant rule needs a 'belief' array");
                return std::nullopt;
            }
            return AggregationRule::constant(
                make_belief(spec.at("belief").get<std::vector<double>>()));
        }
    } catch (const std::exception& e) {
        violations.push_back(std::string("rule: ") + e.what());
        return std::nullopt;
    }
    violations.push_back("unknown rule kind '" + kind + "'");
    return std::nullopt;
}

std::optional<UtilityIndex> parse_utility(const ordered_json& spec,
                                          std::vector<std::string>& violations) {
    if (!spec.is_object() || !spec.contains("kind") ||
        !spec.at("kind").is_string()) {
        violations.push_back("utility must be an object with a string 'kind'");
        return std::nullopt;
    }
    const std::string kind = spec.at("kind").get<std::string>();
    try {
        if (kind == "log") return UtilityIndex::log_utility();
        if (kind == "crra") {
            if (!spec.contains("gamma")) {
                violations.push_back("crra utility needs 'gamma'");
                return std::nullopt;
            }
            return UtilityIndex::crra(spec.at("gamma").get<double>());
        }
    } catch (const std::exception& e) {
        violations.push_back(std::string("utility: ") + e.what());
        return std::nullopt;
    }
    violations.push_back("unknown utility kind '" + kind + "'");
    return std::nullopt;
}

}  // namespace

MarketSpec Scenario::effective_market() const {
    if (market) return *market;
    return MarketSpec::uniform(states, 1.0);
}

std::optional<Scenario> parse_scenario(const std::string& json_text,
                                       std::vector<std::string>& violations) {
    ordered_json j;
    try {
        j = ordered_json::parse(json_text);
    } catch (const std::exception& e) {
        violations.push_back(std::string("config does not parse as JSON: ") +
                             e.what());
        return std::nullopt;
    }
    if (!j.is_object()) {
        violations.push_back("config root must be a JSON object");
        return std::nullopt;
    }

    Scenario sc;
    ConfigReader reader(j, violations);

    if (auto v = reader.get<int>("schema_version")) {
        sc.schema_version = *v;
        if (*v != 1)
            reader.violation("unsupported schema_version " + std::to_string(*v));
    }
    if (auto v = reader.get<std::string>("name")) sc.name = *v;
    if (auto v = reader.get<std::string>("task")) sc.task = *v;
    if (!sc.task.empty() &&
        std::find(kTasks.begin(), kTasks.end(), sc.task) == kTasks.end())
        reader.violation("unknown task '" + sc.task + "'");

    if (auto v = reader.get<int>("states")) {
        if (*v < 2) reader.violation("states must be >= 2");
        else sc.states = static_cast<std::size_t>(*v);
    }
    if (auto v = reader.get<int>("agents")) {
        if (*v < 1) reader.violation("agents must be >= 1");
        else sc.agents = static_cast<std::size_t>(*v);
    }

    if (reader.contains("truths") && !reader.raw("truths").is_string()) {
        try {
            std::vector<Belief> beliefs;
            for (const auto& row : reader.raw("truths"))
                beliefs.push_back(make_belief(row.get<std::vector<double>>()));
            sc.truths = BeliefProfile(std::move(beliefs));
            if (sc.truths->dim() != sc.states &&
                reader.contains("states"))
                reader.violation("truths dimension disagrees with 'states'");
            sc.states = sc.truths->dim();
            if (reader.contains("agents") && sc.truths->size() != sc.agents)
                reader.violation("truths row count disagrees with 'agents'");
            sc.agents = sc.truths->size();
        } catch (const std::exception& e) {
            reader.violation(std::string("truths: ") + e.what());
        }
    } else if (reader.contains("truths") &&
               reader.raw("truths").get<std::string>() != "random") {
        reader.violation("truths must be an array of beliefs or \"random\"");
    }

    if (reader.contains("rule")) {
        if (auto r = parse_rule(reader.raw("rule"), violations)) sc.rule = *r;
    }
    if (reader.contains("utility")) {
        if (auto u = parse_utility(reader.raw("utility"), violations))
            sc.utility = *u;
    }
    if (reader.contains("market")) {
        try {
            MarketSpec m;
            m.prices = reader.raw("market").at("prices").get<std::vector<double>>();
            m.wealth = reader.raw("market").value("wealth", 1.0);
            m.validate();
            if (m.dim() != sc.states)
                reader.violation("market prices disagree with 'states'");
            sc.market = std::move(m);
        } catch (const std::exception& e) {
            reader.violation(std::string("market: ") + e.what());
        }
    }
    if (reader.contains("tolerance")) {
        try {
            const auto& t = reader.raw("tolerance");
            sc.tolerance.abs_tol = t.value("abs_tol", sc.tolerance.abs_tol);
            sc.tolerance.rel_tol = t.value("rel_tol", sc.tolerance.rel_tol);
            sc.tolerance.max_iter = t.value("max_iter", sc.tolerance.max_iter);
            sc.tolerance.validate();
        } catch (const std::exception& e) {
            reader.violation(std::string("tolerance: ") + e.what());
        }
    }
    if (auto v = reader.get<std::uint64_t>("seed")) sc.seed = *v;
    if (auto v = reader.get<int>("samples")) {
        if (*v < 1) reader.violation("samples must be >= 1");
        else sc.samples = *v;
    }
    if (auto v = reader.get<int>("lambdas_per_sample")) {
        if (*v < 1) reader.violation("lambdas_per_sample must be >= 1");
        else sc.lambdas_per_sample = *v;
    }
    if (auto v = reader.get<int>("resolution")) {
        if (*v < 1) reader.violation("resolution must be >= 1");
        else sc.resolution = *v;
    }
    if (auto v = reader.get<int>("sweep_points")) {
        if (*v < 2) reader.violation("sweep_points must be >= 2");
        else sc.sweep_points = *v;
    }
    if (auto v = reader.get<int>("max_rounds")) {
        if (*v < 1) reader.violation("max_rounds must be >= 1");
        else sc.max_rounds = *v;
    }
    if (auto v = reader.get<std::uint64_t>("k_max")) sc.k_max = *v;
    if (auto v = reader.get<std::vector<std::string>>("axioms"))
        sc.axioms = *v;
    if (auto v = reader.get<bool>("condition_mu")) sc.condition_mu = *v;
    if (auto v = reader.get<std::string>("output_dir")) sc.output_dir = *v;

    // Cross-field checks.
    if (sc.task.empty()) reader.violation("a task is required");
    const bool randomized =
        !sc.truths.has_value() || sc.task == "axioms" ||
        sc.task == "mechanism-audit";
    if (randomized && sc.task != "example1-sweep" && !sc.seed)
        reader.violation("a seed is mandatory for randomized tasks");
    if (sc.task == "example1-sweep" && sc.states != 2)
        reader.violation("example1-sweep is a two-state task");
    if (sc.truths && sc.market && sc.truths->dim() != sc.market->dim())
        reader.violation("truths and market disagree on the state count");
    for (const std::string& a : sc.axioms) {
        static const std::vector<std::string> known = {
            "recursive-invariance", "monotonicity", "no-veto-power",
            "strategy-proofness", "condition-mu"};
        if (std::find(known.begin(), known.end(), a) == known.end())
            reader.violation("unknown axiom '" + a + "'");
    }

    if (!violations.empty()) return std::nullopt;
    return sc;
}

namespace {

BeliefProfile resolve_truths(const Scenario& sc, Rng& rng) {
    if (sc.truths) return *sc.truths;
    return random_profile(rng, sc.agents, sc.states);
}

ordered_json scenario_header(const Scenario& sc) {
    ordered_json j;
    j["schema_version"] = sc.schema_version;
    j["name"] = sc.name;
    j["task"] = sc.task;
    if (sc.seed) j["seed"] = *sc.seed;
    j["rule"] = sc.rule.name();
    return j;
}

ordered_json counterexample_json(const Counterexample& ce) {
    ordered_json j;
    j["clause"] = ce.clause;
    j["profile"] = json_profile(ce.profile);
    if (ce.second_profile) j["second_profile"] = json_profile(*ce.second_profile);
    if (!ce.lambdas.empty()) j["lambdas"] = json_vector(ce.lambdas);
    if (ce.agent) j["agent"] = *ce.agent;
    if (ce.aggregate_before) j["aggregate_before"] = json_belief(*ce.aggregate_before);
    if (ce.aggregate_after) j["aggregate_after"] = json_belief(*ce.aggregate_after);
    j["gap"] = json_number(ce.gap);
    return j;
}

RunArtifacts run_aggregate(const Scenario& sc) {
    RunArtifacts art;
    Rng rng(sc.seed.value_or(0));
    const BeliefProfile truths = resolve_truths(sc, rng);
    const Belief agg = aggregate(sc.rule, truths, sc.tolerance);

    ordered_json j = scenario_header(sc);
    j["truths"] = json_profile(truths);
    j["aggregate"] = json_belief(agg);
    art.summary_json = dump17(j);

    CsvBuilder truths_csv("agent,state,belief");
    for (std::size_t i = 0; i < truths.size(); ++i)
        for (std::size_t s = 0; s < truths.dim(); ++s)
            truths_csv.row({cell(i), cell(s), cell(truths[i][s])});
    CsvBuilder agg_csv("state,aggregate");
    for (std::size_t s = 0; s < agg.dim(); ++s)
        agg_csv.row({cell(s), cell(agg[s])});
    art.csv_files.emplace_back("truths.csv", std::move(truths_csv).str());
    art.csv_files.emplace_back("aggregate.csv", std::move(agg_csv).str());
    art.messages.push_back("aggregate computed for " +
                           std::to_string(truths.size()) + " agents");
    return art;
}

RunArtifacts run_parimutuel(const Scenario& sc) {
    RunArtifacts art;
    Rng rng(sc.seed.value_or(0));
    const BeliefProfile truths = resolve_truths(sc, rng);
    const ParimutuelEquilibrium eq = solve_parimutuel(truths, sc.tolerance);

    ordered_json j = scenario_header(sc);
    j["truths"] = json_profile(truths);
    j["price"] = json_belief(eq.price);
    j["multipliers"] = json_vector(eq.multipliers);
    j["foc_residual"] = json_number(eq.foc_residual);
    j["iterations"] = eq.iterations;
    art.summary_json = dump17(j);

    CsvBuilder price_csv("state,price");
    for (std::size_t s = 0; s < eq.price.dim(); ++s)
        price_csv.row({cell(s), cell(eq.price[s])});
    CsvBuilder alloc_csv("agent,state,allocation,multiplier");
    for (std::size_t i = 0; i < truths.size(); ++i)
        for (std::size_t s = 0; s < truths.dim(); ++s)
            alloc_csv.row({cell(i), cell(s), cell(eq.allocation[i][s]),
                           cell(eq.multipliers[i])});
    art.csv_files.emplace_back("price.csv", std::move(price_csv).str());
    art.csv_files.emplace_back("allocation.csv", std::move(alloc_csv).str());
    art.messages.push_back("parimutuel solved in " +
                           std::to_string(eq.iterations) + " iterations");
    return art;
}

RunArtifacts run_equilibrium(const Scenario& sc) {
    RunArtifacts art;
    Rng rng(sc.seed.value_or(0));
    const BeliefProfile truths = resolve_truths(sc, rng);
    const MarketSpec market = sc.effective_market();
    const GameSpec spec{truths, sc.rule, market, sc.utility};
    const DynamicsResult dyn =
        br_dynamics(spec, truths, sc.max_rounds, sc.tolerance);
    const NashReport nash = verify_nash(spec, dyn.reports, sc.tolerance);

    ordered_json j = scenario_header(sc);
    j["truths"] = json_profile(truths);
    j["reports"] = json_profile(dyn.reports);
    j["aggregate"] = json_belief(dyn.aggregate);
    j["converged"] = dyn.converged;
    j["rounds"] = dyn.rounds;
    j["max_best_response_gap"] = json_number(nash.max_gap());

    // The market-side image of the same equilibrium, when the game matches
    // the parimutuel setup (symmetric pool, log utility, uniform market).
    bool uniform = std::all_of(market.prices.begin(), market.prices.end(),
                               [](double p) { return p == 1.0; });
    if (sc.rule.weights().empty() &&
        sc.utility.kind() == UtilityIndex::Kind::Log && uniform &&
        market.wealth == 1.0) {
        const MarketNash mapped = nash_from_parimutuel(truths, sc.tolerance);
        j["parimutuel_price"] = json_belief(mapped.equilibrium.price);
        j["price_vs_dynamics_gap"] =
            json_number(linf_distance(mapped.equilibrium.price, dyn.aggregate));
    }
    art.summary_json = dump17(j);

    CsvBuilder reports_csv("agent,state,truth,report");
    for (std::size_t i = 0; i < truths.size(); ++i)
        for (std::size_t s = 0; s < truths.dim(); ++s)
            reports_csv.row({cell(i), cell(s), cell(truths[i][s]),
                             cell(dyn.reports[i][s])});
    art.csv_files.emplace_back("reports.csv", std::move(reports_csv).str());
    if (!dyn.converged) {
        art.messages.push_back("best-response dynamics did not converge");
        art.exit_code = 3;
    }
    return art;
}

RunArtifacts run_axioms(const Scenario& sc, bool strict) {
    RunArtifacts art;
    Rng rng(sc.seed.value_or(0));
    const MarketSpec market = sc.effective_market();

    const bool needs_odd = sc.rule.kind() == AggregationRule::Kind::GeometricMedian;
    const std::size_t n = needs_odd && sc.agents % 2 == 0 ? sc.agents + 1
                                                          : sc.agents;

    std::vector<RiSample> ri_samples;
    for (int k = 0; k < sc.samples; ++k) {
        RiSample sample{random_profile(rng, n, sc.states), {}};
        for (int l = 0; l < sc.lambdas_per_sample; ++l)
            sample.lambda_vectors.push_back(random_lambdas(rng, n));
        ri_samples.push_back(std::move(sample));
    }
    std::vector<NvpSample> nvp_samples;
    for (int k = 0; k < sc.samples; ++k)
        nvp_samples.push_back(NvpSample{
            random_belief(rng, sc.states), random_belief(rng, sc.states),
            std::max<std::size_t>(n, 3),
            static_cast<std::size_t>(rng() % std::max<std::size_t>(n, 3))});
    std::vector<BeliefProfile> sp_profiles;
    for (int k = 0; k < std::max(1, sc.samples / 10); ++k)
        sp_profiles.push_back(random_interior_profile(rng, n, sc.states));
    const std::vector<Belief> deviations =
        simplex_grid(static_cast<int>(sc.states), sc.resolution);

    std::vector<std::string> battery = sc.axioms;
    if (battery.empty())
        battery = {"recursive-invariance", "monotonicity", "no-veto-power",
                   "strategy-proofness"};
    if (sc.condition_mu &&
        std::find(battery.begin(), battery.end(), "condition-mu") ==
            battery.end())
        battery.push_back("condition-mu");

    std::vector<AxiomReport> reports;
    for (const std::string& axiom : battery) {
        if (axiom == "recursive-invariance")
            reports.push_back(check_recursive_invariance(sc.rule, ri_samples,
                                                         sc.tolerance));
        else if (axiom == "monotonicity")
            reports.push_back(check_monotonicity(sc.rule, ri_samples, market,
                                                 sc.utility, sc.tolerance));
        else if (axiom == "no-veto-power")
            reports.push_back(check_no_veto_power(sc.rule, nvp_samples,
                                                  sc.tolerance));
        else if (axiom == "strategy-proofness")
            reports.push_back(check_strategy_proofness(sc.rule, sp_profiles,
                                                       deviations, market,
                                                       sc.utility,
                                                       sc.tolerance));
        else if (axiom == "condition-mu") {
            std::vector<MuSample> mu_samples;
            for (int k = 0; k < std::max(1, sc.samples / 10); ++k) {
                BeliefProfile p = random_profile(rng, n, sc.states);
                mu_samples.push_back(MuSample{p, p});
                const Belief f = aggregate(sc.rule, p, sc.tolerance);
                std::vector<Belief> moved;
                const std::vector<double> lambdas = random_lambdas(rng, n);
                for (std::size_t i = 0; i < n; ++i)
                    moved.push_back(mix(p[i], f, lambdas[i]));
                mu_samples.push_back(
                    MuSample{p, BeliefProfile(std::move(moved))});
            }
            reports.push_back(check_condition_mu(
                sc.rule, simplex_grid(static_cast<int>(sc.states), sc.resolution),
                linear_pool_opportunity_map(sc.resolution, sc.tolerance),
                mu_samples, market, sc.utility, sc.tolerance));
        }
    }

    ordered_json j = scenario_header(sc);
    ordered_json arr = ordered_json::array();
    bool any_fail = false;
    for (const AxiomReport& rep : reports) {
        ordered_json r;
        r["axiom"] = rep.axiom;
        r["verdict"] = verdict_name(rep.verdict);
        r["samples_checked"] = rep.samples_checked;
        r["notes"] = rep.notes;
        if (rep.counterexample)
            r["counterexample"] = counterexample_json(*rep.counterexample);
        arr.push_back(std::move(r));
        any_fail = any_fail || rep.verdict == Verdict::Fail;
    }
    j["axioms"] = std::move(arr);
    art.summary_json = dump17(j);

    CsvBuilder csv("axiom,verdict,samples_checked,notes");
    for (const AxiomReport& rep : reports)
        csv.row({rep.axiom, verdict_name(rep.verdict),
                 cell(rep.samples_checked), "\"" + rep.notes + "\""});
    art.csv_files.emplace_back("axioms.csv", std::move(csv).str());

    for (const AxiomReport& rep : reports)
        art.messages.push_back(rep.axiom + ": " + verdict_name(rep.verdict));
    if (any_fail && strict) art.exit_code = 4;
    return art;
}

RunArtifacts run_mechanism_audit(const Scenario& sc, int workers) {
    RunArtifacts art;
    Rng rng(sc.seed.value_or(0));
    const MarketSpec market = sc.effective_market();
    const std::size_t n = std::max<std::size_t>(sc.agents, 3);

    std::vector<BeliefProfile> profiles;
    for (int k = 0; k < sc.samples; ++k)
        profiles.push_back(random_interior_profile(rng, n, sc.states));

    std::vector<AuditResult> results(profiles.size(),
                                     AuditResult{0.0, 0, std::nullopt, 0,
                                                 false, Belief({0.5, 0.5})});
    parallel_for(profiles.size(), workers, [&](std::size_t k) {
        results[k] = audit_truthful_equilibrium(profiles[k], sc.rule, market,
                                                sc.utility, sc.resolution,
                                                sc.k_max, sc.tolerance);
    });

    double max_gain = 0.0;
    std::size_t total_deviations = 0;
    for (const AuditResult& r : results) {
        max_gain = std::max(max_gain, r.max_gain);
        total_deviations += r.deviations_checked;
    }

    ordered_json j = scenario_header(sc);
    j["profiles"] = profiles.size();
    j["resolution"] = sc.resolution;
    j["k_max"] = sc.k_max;
    j["max_gain"] = json_number(max_gain);
    j["deviations_checked"] = total_deviations;
    art.summary_json = dump17(j);

    CsvBuilder csv("profile,max_gain,deviations_checked,grid_too_coarse");
    for (std::size_t k = 0; k < results.size(); ++k)
        csv.row({cell(k), cell(results[k].max_gain),
                 cell(results[k].deviations_checked),
                 results[k].grid_too_coarse ? "true" : "false"});
    art.csv_files.emplace_back("audit.csv", std::move(csv).str());
    art.messages.push_back("max deviation gain " + fmt17(max_gain) + " over " +
                           std::to_string(total_deviations) + " deviations");
    return art;
}

RunArtifacts run_example1_sweep(const Scenario& sc, int workers) {
    RunArtifacts art;
    const int points = sc.sweep_points;
    const std::size_t cells =
        static_cast<std::size_t>(points) * static_cast<std::size_t>(points);

    struct Cell { double p_a, p_b, aggregate, median; };
    std::vector<Cell> rows(cells);
    const MarketSpec market = MarketSpec::uniform(2, 1.0);
    parallel_for(cells, workers, [&](std::size_t idx) {
        const int ia = static_cast<int>(idx) / points;
        const int ib = static_cast<int>(idx) % points;
        const double p_a = static_cast<double>(ia) / (points - 1);
        const double p_b = static_cast<double>(ib) / (points - 1);
        const BeliefProfile truths(
            {Belief({p_a, 1.0 - p_a}), Belief({p_b, 1.0 - p_b})});
        const GameSpec spec{truths, AggregationRule::linear_pool(), market,
                            UtilityIndex::log_utility()};
        const DynamicsResult dyn =
            br_dynamics(spec, truths, sc.max_rounds, sc.tolerance);
        rows[idx] = Cell{p_a, p_b, dyn.aggregate[0],
                         example1_aggregate(p_a, p_b)};
    });

    double max_diff = 0.0;
    CsvBuilder csv("p_a,p_b,aggregate,median,abs_diff");
    for (const Cell& c : rows) {
        const double diff = std::abs(c.aggregate - c.median);
        max_diff = std::max(max_diff, diff);
        csv.row({cell(c.p_a), cell(c.p_b), cell(c.aggregate), cell(c.median),
                 cell(diff)});
    }

    ordered_json j = scenario_header(sc);
    j["sweep_points"] = points;
    j["cells"] = cells;
    j["max_abs_diff"] = json_number(max_diff);
    art.summary_json = dump17(j);
    art.csv_files.emplace_back("sweep.csv", std::move(csv).str());
    art.messages.push_back("equilibrium aggregate vs phantom median: max gap " +
                           fmt17(max_diff));
    return art;
}

}  // namespace

RunArtifacts run_scenario(const Scenario& sc, bool strict, int workers) {
    if (sc.task == "aggregate") return run_aggregate(sc);
    if (sc.task == "parimutuel") return run_parimutuel(sc);
    if (sc.task == "equilibrium") return run_equilibrium(sc);
    if (sc.task == "axioms") return run_axioms(sc, strict);
    if (sc.task == "mechanism-audit") return run_mechanism_audit(sc, workers);
    if (sc.task == "example1-sweep") return run_example1_sweep(sc, workers);
    throw Error(errc::invalid_argument, "unknown task '" + sc.task + "'");
}

int run_scenario_file(const std::string& config_path, const std::string& task,
                      std::optional<std::uint64_t> seed_override,
                      const std::optional<std::string>& out_override,
                      bool strict, int workers) {
    std::ifstream in(config_path);
    if (!in) {
        std::fprintf(stderr, "error: cannot read config '%s'\n",
                     config_path.c_str());
        return 2;
    }
    std::stringstream buffer;
    buffer << in.rdbuf();

    std::vector<std::string> violations;
    std::optional<Scenario> parsed = parse_scenario(buffer.str(), violations);
    if (parsed) {
        if (!task.empty()) {
            if (!parsed->task.empty() && parsed->task != task)
                violations.push_back("config task '" + parsed->task +
                                     "' disagrees with the subcommand '" +
                                     task + "'");
            parsed->task = task;
        }
        if (seed_override) parsed->seed = *seed_override;
        const bool randomized = !parsed->truths.has_value() ||
                                parsed->task == "axioms" ||
                                parsed->task == "mechanism-audit";
        if (randomized && !parsed->seed)
            violations.push_back("a seed is mandatory for randomized tasks");
    }
    if (!violations.empty() || !parsed) {
        std::fprintf(stderr, "config '%s' is invalid:\n", config_path.c_str());
        for (const std::string& v : violations)
            std::fprintf(stderr, "  - %s\n", v.c_str());
        return 2;
    }

    RunArtifacts art;
    try {
        art = run_scenario(*parsed, strict, workers);
    } catch (const Error& e) {
        std::fprintf(stderr, "error (%s): %s\n", errc_name(e.code()), e.what());
        return e.code() == errc::no_convergence ? 3 : 2;
    }

    const std::filesystem::path out_dir =
        out_override ? *out_override : parsed->output_dir;
    std::error_code fs_err;
    std::filesystem::create_directories(out_dir, fs_err);
    if (fs_err) {
        std::fprintf(stderr, "error: cannot create output dir '%s': %s\n",
                     out_dir.string().c_str(), fs_err.message().c_str());
        return 2;
    }
    {
        std::ofstream summary(out_dir / "summary.json", std::ios::binary);
        summary << art.summary_json;
    }
    for (const auto& [name, content] : art.csv_files) {
        std::ofstream csv(out_dir / name, std::ios::binary);
        csv << content;
    }
    for (const std::string& msg : art.messages)
        std::printf("%s\n", msg.c_str());
    std::printf("wrote %s\n", (out_dir / "summary.json").string().c_str());
    return art.exit_code;
}

}  // namespace beliefmkt
