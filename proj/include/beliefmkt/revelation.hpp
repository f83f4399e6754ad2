#pragma once

#include <vector>

#include "beliefmkt/aggregation.hpp"
#include "beliefmkt/core.hpp"
#include "beliefmkt/parimutuel.hpp"
#include "beliefmkt/portfolio.hpp"

namespace beliefmkt {

/// Reports are a belief profile under a different name: one reported
/// belief per agent, in agent order.
using ReportProfile = BeliefProfile;

/// The preference revelation game: agents hold `truths`, announce reports,
/// the rule aggregates them, and society solves the portfolio problem at
/// the aggregate. Payoffs are expected utilities under the truths.
struct GameSpec {
    BeliefProfile truths;
    AggregationRule rule;
    MarketSpec market;
    UtilityIndex utility;

    void validate() const;
};

/// Agent i's payoff at a report profile; may be -infinity when the
/// aggregate kills a state the agent believes in.
double payoff(const GameSpec& spec, const ReportProfile& reports,
              std::size_t i, const Tolerance& tol = {});

/// Agent i's best reply holding the other reports fixed. Requires a
/// linear pool with log utility. Two-state instances use the closed form
/// clamp((p_i - R)/w_i, 0, 1) in the state-1 coordinate; larger state
/// spaces run projected gradient ascent from the agent's truth on the
/// support face, converged when the unit-step gradient-projection norm
/// falls below tol.abs_tol.
Belief best_response(const GameSpec& spec, const ReportProfile& reports,
                     std::size_t i, const Tolerance& tol = {});

struct DynamicsResult {
    ReportProfile reports;
    Belief aggregate;
    bool converged = false;
    /// Full round-robin passes that moved some report by >= tol.abs_tol.
    int rounds = 0;
};

/// Round-robin best responses in agent index order until a full round
/// moves every report by less than tol.abs_tol.
DynamicsResult br_dynamics(const GameSpec& spec, const ReportProfile& start,
                           int max_rounds, const Tolerance& tol = {});

struct MarketNash {
    ReportProfile reports;
    Belief aggregate;  // equal-weight pool of the reports
    ParimutuelEquilibrium equilibrium;
};

/// Builds a Nash equilibrium of the symmetric-pool log-utility game from
/// the parimutuel equilibrium on the truths: report_is = n rho_s x_is.
/// The aggregate of the reports equals the market price.
MarketNash nash_from_parimutuel(const BeliefProfile& truths,
                                const Tolerance& tol = {});

struct NashReport {
    std::vector<double> gaps;          // payoff(best reply) - payoff(current)
    std::vector<double> support_gaps;  // |p_is - lambda_i agg_s| on support
    std::vector<double> dual_gaps;     // (p_is - lambda_i agg_s)_+ off support

    double max_gap() const;
    bool is_nash(double tol) const { return max_gap() <= tol; }
};

/// Per-agent best-response gaps plus the Nash first-order residuals at the
/// aggregate of the given reports.
NashReport verify_nash(const GameSpec& spec, const ReportProfile& reports,
                       const Tolerance& tol = {});

}  // namespace beliefmkt
