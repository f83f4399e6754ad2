#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "beliefmkt/aggregation.hpp"
#include "beliefmkt/core.hpp"
#include "beliefmkt/portfolio.hpp"

namespace beliefmkt {

/// One agent's message in the canonical game form: a full announced
/// profile plus a nonnegative integer for the tie-break game.
struct Message {
    BeliefProfile announced;
    std::uint64_t integer = 0;
};

enum class FiredRule { Rule1, Rule2Accepted, Rule2Rejected, Rule3 };

const char* fired_rule_name(FiredRule r);

struct OutcomeTrace {
    Belief aggregate;
    FiredRule fired = FiredRule::Rule1;
    std::optional<std::size_t> winner;     // Rule 3 only
    std::optional<std::size_t> dissenter;  // Rule 2 only
};

/// Outcome function of the canonical game form, for at least three
/// agents. Rule 1: unanimous announcements evaluate the rule at the
/// announced profile. Rule 2: a single dissenter gets their announced
/// profile's aggregate if the consensus profile's belief for them weakly
/// prefers the consensus aggregate (i.e. the deviation only ever moves
/// down their contour), otherwise the consensus stands. Rule 3: the
/// highest integer wins, ties to the lowest agent index, and the winner's
/// announced profile is evaluated.
OutcomeTrace outcome_g(const std::vector<Message>& messages,
                       const AggregationRule& rule, const MarketSpec& market,
                       const UtilityIndex& utility, const Tolerance& tol = {});

struct AuditResult {
    double max_gain = 0.0;
    std::size_t worst_agent = 0;
    std::optional<Message> worst_deviation;
    std::size_t deviations_checked = 0;
    bool grid_too_coarse = false;
    Belief truthful_outcome;
};

/// Checks that the all-truthful consensus messages form a Nash
/// equilibrium of the game form: scans unilateral deviations to announced
/// profiles built from single-slot simplex-grid substitutions (plus
/// integer-only deviations up to k_max) and reports the largest payoff
/// gain found. Requires a surjective rule and n >= 3.
AuditResult audit_truthful_equilibrium(
    const BeliefProfile& truths, const AggregationRule& rule,
    const MarketSpec& market, const UtilityIndex& utility, int resolution,
    std::uint64_t k_max, const Tolerance& tol = {},
    std::size_t min_deviations = 50);

}  // namespace beliefmkt
