#pragma once

#include <vector>

#include "beliefmkt/core.hpp"

namespace beliefmkt {

/// Equal-wealth parimutuel equilibrium of the linear market: a price that
/// is a probability vector, an allocation of one unit per state, and the
/// per-agent bang-per-buck multipliers.
struct ParimutuelEquilibrium {
    Belief price;
    std::vector<std::vector<double>> allocation;  // n x |S|
    std::vector<double> multipliers;              // lambda_i > 0
    double foc_residual = 0.0;
    int iterations = 0;
};

/// First-order-condition residuals of a candidate equilibrium.
/// support_gap: max |p_is - lambda_i * rho_s| over states where agent i
/// holds more than the support threshold. dual_gap: max (p_is -
/// lambda_i * rho_s)_+ over all states. budget_gap and clearing_gap are
/// the equal-wealth budget and market-clearing violations.
struct FocReport {
    double support_gap = 0.0;
    double dual_gap = 0.0;
    double budget_gap = 0.0;
    double clearing_gap = 0.0;

    double max_residual() const;
    bool passes(double tol) const { return max_residual() <= tol; }
};

/// Allocations below this are treated as zero support when checking
/// complementary slackness.
constexpr double kSupportThreshold = 1e-6;

/// Solves the equal-wealth parimutuel market by damped proportional
/// response on bids: bid_is <- (1/n) * p_is x_is / (p_i . x_i), prices are
/// bid column sums, allocations are bid shares. Runs until successive
/// prices move less than tol.abs_tol in L-infinity and the FOC residual
/// reaches max(tol.abs_tol, 1e-6). Whenever the prices stall, bids that
/// are measurably below the agent's best bang-per-buck are zeroed, which
/// replaces the arbitrarily slow decay of nearly-marginal allocations.
/// Deterministic given inputs.
///
/// Throws dead_state if some state has zero mass under every belief (its
/// price would be 0 and the price vector would leave the simplex), and
/// no_convergence past tol.max_iter.
ParimutuelEquilibrium solve_parimutuel(const BeliefProfile& profile,
                                       const Tolerance& tol = {});

/// Same solver, recording the Eisenberg-Gale objective
/// sum_i (1/n) log(p_i . x_i) at every iterate.
ParimutuelEquilibrium solve_parimutuel_traced(
    const BeliefProfile& profile, const Tolerance& tol,
    std::vector<double>& objective_trace);

/// Two-state closed form: the median of the n agent probabilities of
/// state 1 pooled with the n-1 phantom values 1/n, ..., (n-1)/n.
double phantom_median_price(const std::vector<double>& probs_state1);

FocReport verify_foc(const ParimutuelEquilibrium& eq,
                     const BeliefProfile& profile,
                     double support_threshold = kSupportThreshold);

}  // namespace beliefmkt
