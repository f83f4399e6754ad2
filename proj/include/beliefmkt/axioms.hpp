#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "beliefmkt/aggregation.hpp"
#include "beliefmkt/core.hpp"
#include "beliefmkt/portfolio.hpp"

namespace beliefmkt {

enum class Verdict { Pass, Fail, Inconclusive };

const char* verdict_name(Verdict v);

/// Everything needed to replay a violation deterministically.
struct Counterexample {
    BeliefProfile profile;
    std::optional<BeliefProfile> second_profile;  // mixed/deviated profile
    std::vector<double> lambdas;                  // segment weights, if any
    std::optional<std::size_t> agent;
    std::optional<Belief> aggregate_before;
    std::optional<Belief> aggregate_after;
    double gap = 0.0;
    std::string clause;
};

struct AxiomReport {
    std::string axiom;
    Verdict verdict = Verdict::Pass;
    std::optional<Counterexample> counterexample;
    std::size_t samples_checked = 0;
    std::string notes;  // e.g. "no violation found at resolution 100"
};

/// One invariance/monotonicity test case: a profile plus a batch of
/// mixing-weight vectors to try against it.
struct RiSample {
    BeliefProfile profile;
    std::vector<std::vector<double>> lambda_vectors;
};

/// Recursive Invariance: mixing every agent's belief any fraction of the
/// way toward the aggregate must leave the aggregate unchanged (within
/// match_tol).
AxiomReport check_recursive_invariance(const AggregationRule& rule,
                                       const std::vector<RiSample>& samples,
                                       const Tolerance& tol = {},
                                       double match_tol = 1e-5);

/// True iff the lower contour set of p_i at f_p is contained in that of
/// p_tilde, decided by the segment criterion: p_tilde must lie on the
/// segment [p_i, f_p] (within tol.abs_tol). q_base must equal f_p; it is
/// the aggregate at which both contour sets are taken.
bool lower_contour_subset(const Belief& q_base, const Belief& p_i,
                          const Belief& p_tilde, const Belief& f_p,
                          const MarketSpec& market, const UtilityIndex& utility,
                          const Tolerance& tol = {});

struct ContourSampleResult {
    bool subset_holds = true;
    std::optional<Belief> violating_q;
    double margin = 0.0;  // EU(p_tilde, q) - EU(p_tilde, f_p) at the violator
    std::size_t points_checked = 0;
};

/// Brute-force cross-validation of lower_contour_subset: sweeps a simplex
/// grid for q with EU(p_i, q) <= EU(p_i, f_p) and flags any q where
/// EU(p_tilde, q) > EU(p_tilde, f_p) beyond a small safety margin.
ContourSampleResult lower_contour_subset_sampled(
    const Belief& q_base, const Belief& p_i, const Belief& p_tilde,
    const Belief& f_p, const MarketSpec& market, const UtilityIndex& utility,
    int resolution, const Tolerance& tol = {});

/// Monotonicity, tested through its Recursive Invariance equivalent:
/// profiles are deformed by segment moves toward the aggregate (which
/// provably grow every agent's lower contour set), and the aggregate must
/// not move. A handful of the segment moves are cross-validated against
/// the sampled contour-inclusion oracle; a disagreement there means the
/// segment criterion itself broke and yields Inconclusive.
AxiomReport check_monotonicity(const AggregationRule& rule,
                               const std::vector<RiSample>& samples,
                               const MarketSpec& market,
                               const UtilityIndex& utility,
                               const Tolerance& tol = {},
                               double match_tol = 1e-5,
                               std::size_t contour_checks = 5,
                               int contour_resolution = 200);

struct NvpSample {
    Belief shared;
    Belief deviant;
    std::size_t n_agents = 3;
    std::size_t deviant_index = 0;
};

/// No Veto Power: when all agents, or all but one, share a belief, the
/// rule must return it. Tests the unanimous case and the one-dissenter
/// case for each sample.
AxiomReport check_no_veto_power(const AggregationRule& rule,
                                const std::vector<NvpSample>& samples,
                                const Tolerance& tol = {},
                                double match_tol = 1e-6);

/// Strategy-proofness probe: no sampled unilateral deviation may raise
/// the deviator's expected utility by more than improve_tol. A Pass is
/// sample-relative and says so in the notes.
AxiomReport check_strategy_proofness(const AggregationRule& rule,
                                     const std::vector<BeliefProfile>& profiles,
                                     const std::vector<Belief>& deviation_grid,
                                     const MarketSpec& market,
                                     const UtilityIndex& utility,
                                     const Tolerance& tol = {},
                                     double improve_tol = 1e-7);

/// Indices into K of the near-maximal elements under EU(p, .), within an
/// absolute band of the maximum.
std::vector<std::size_t> max_elements(const std::vector<Belief>& K,
                                      const Belief& p,
                                      const MarketSpec& market,
                                      const UtilityIndex& utility, double band,
                                      const Tolerance& tol = {});

/// Opportunity sets C_i(p) for the Moore-Repullo condition, one finite
/// set of aggregates per (profile, agent).
using OpportunityMap =
    std::function<std::vector<Belief>(const BeliefProfile&, std::size_t)>;

/// The opportunity map of the symmetric linear pool at its equilibrium
/// reports: C_i(p) = { (g + sum_{j != i} rho_j(p)) / n : g on the simplex
/// grid }, with rho_j(p) the parimutuel-backed equilibrium reports.
OpportunityMap linear_pool_opportunity_map(int resolution,
                                           const Tolerance& tol = {});

struct MuSample {
    BeliefProfile p;
    BeliefProfile p_tilde;
};

/// Condition mu over sampled profile pairs: the base requirement
/// f(p) in M(C_i(p), p_i), and clauses (i)-(iii). Maximality uses an
/// EU band of tol.abs_tol; conclusions compare aggregates within
/// match_tol. The report's clause field says which part failed.
AxiomReport check_condition_mu(const AggregationRule& rule,
                               const std::vector<Belief>& base_set,
                               const OpportunityMap& opportunity,
                               const std::vector<MuSample>& samples,
                               const MarketSpec& market,
                               const UtilityIndex& utility,
                               const Tolerance& tol = {},
                               double match_tol = 1e-5);

}  // namespace beliefmkt
