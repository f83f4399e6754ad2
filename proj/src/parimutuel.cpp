#include "beliefmkt/parimutuel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace beliefmkt {

double FocReport::max_residual() const {
    return std::max(std::max(support_gap, dual_gap),
                    std::max(budget_gap, clearing_gap));
}

namespace {

struct MarketState {
    std::vector<std::vector<double>> bids;  // n x S
    std::vector<double> prices;             // column sums
    std::vector<std::vector<double>> alloc; // bid shares
    std::vector<double> payoffs;            // p_i . x_i
};

void refresh(MarketState& st, const BeliefProfile& profile) {
    const std::size_t n = profile.size(), dim = profile.dim();
    std::fill(st.prices.begin(), st.prices.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t s = 0; s < dim; ++s) st.prices[s] += st.bids[i][s];
    for (std::size_t i = 0; i < n; ++i) {
        double value = 0.0;
        for (std::size_t s = 0; s < dim; ++s) {
            st.alloc[i][s] =
                st.prices[s] > 0.0 ? st.bids[i][s] / st.prices[s] : 0.0;
            value += profile[i][s] * st.alloc[i][s];
        }
        st.payoffs[i] = value;
    }
}

FocReport residuals_of(const std::vector<double>& prices,
                       const std::vector<std::vector<double>>& alloc,
                       const std::vector<double>& multipliers,
                       const BeliefProfile& profile,
                       double support_threshold) {
    const std::size_t n = profile.size(), dim = profile.dim();
    FocReport rep;
    const double budget = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        double spent = 0.0;
        for (std::size_t s = 0; s < dim; ++s) {
            const double slack = profile[i][s] - multipliers[i] * prices[s];
            if (alloc[i][s] > support_threshold)
                rep.support_gap = std::max(rep.support_gap, std::abs(slack));
            rep.dual_gap = std::max(rep.dual_gap, slack);
            spent += prices[s] * alloc[i][s];
        }
        rep.budget_gap = std::max(rep.budget_gap, std::abs(spent - budget));
    }
    rep.dual_gap = std::max(rep.dual_gap, 0.0);
    for (std::size_t s = 0; s < dim; ++s) {
        double supply = 0.0;
        for (std::size_t i = 0; i < n; ++i) supply += alloc[i][s];
        rep.clearing_gap = std::max(rep.clearing_gap, std::abs(supply - 1.0));
    }
    return rep;
}

std::vector<double> multipliers_of(const std::vector<double>& payoffs,
                                   std::size_t n) {
    // lambda_i = u_i / budget_i with budget 1/n.
    std::vector<double> lambdas(payoffs.size());
    for (std::size_t i = 0; i < payoffs.size(); ++i)
        lambdas[i] = payoffs[i] * static_cast<double>(n);
    return lambdas;
}

// Tolerances of the support-purification step. When the price dynamics
// stall, bids whose bang-per-buck falls measurably short of the agent's
// best (relative margin above kBanMargin) are zeroed; this sidesteps the
// arbitrarily slow geometric decay of nearly-marginal allocations. A
// banned state whose bang-per-buck later rises above the agent's
// multiplier is re-seeded, so a mistaken ban heals itself; a pair that
// needed healing once is never banned again (its apparent margin was
// stall noise, not a real gap).
constexpr double kBanMargin = 5e-7;
constexpr double kFocGoal = 1e-6;

ParimutuelEquilibrium solve_impl(const BeliefProfile& profile,
                                 const Tolerance& tol,
                                 std::vector<double>* objective_trace) {
    tol.validate();
    const std::size_t n = profile.size(), dim = profile.dim();
    for (std::size_t s = 0; s < dim; ++s) {
        bool alive = false;
        for (std::size_t i = 0; i < n; ++i)
            if (profile[i][s] > 0.0) { alive = true; break; }
        if (!alive)
            throw Error(errc::dead_state,
                        "state " + std::to_string(s) +
                            " has zero mass under every belief; its price "
                            "is 0 and the price vector is not a probability");
    }

    const double budget = 1.0 / static_cast<double>(n);
    MarketState st;
    st.bids.assign(n, std::vector<double>(dim, 0.0));
    st.prices.assign(dim, 0.0);
    st.alloc.assign(n, std::vector<double>(dim, 0.0));
    st.payoffs.assign(n, 0.0);
    // Seed bids proportional to beliefs; zero-belief states get and keep
    // zero bids, matching the slackness conditions.
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t s = 0; s < dim; ++s)
            st.bids[i][s] = budget * profile[i][s];
    refresh(st, profile);

    std::vector<std::vector<char>> banned(n, std::vector<char>(dim, 0));
    std::vector<std::vector<char>> protected_(n, std::vector<char>(dim, 0));
    auto renormalize_rows = [&] {
        for (std::size_t i = 0; i < n; ++i) {
            double row = 0.0;
            for (double b : st.bids[i]) row += b;
            if (row > 0.0)
                for (double& b : st.bids[i]) b *= budget / row;
        }
    };

    std::vector<double> prev_prices = st.prices;
    std::vector<double> prev_delta(dim, 0.0);
    std::vector<std::vector<double>> next_bids(n, std::vector<double>(dim));
    const double foc_goal = std::max(tol.abs_tol, kFocGoal);

    int it = 0;
    bool converged = false;
    while (it < tol.max_iter && !converged) {
        // Proportional response until the prices stall.
        bool stalled = false;
        for (; it < tol.max_iter && !stalled; ++it) {
            if (objective_trace) {
                double obj = 0.0;
                for (std::size_t i = 0; i < n; ++i)
                    obj += budget * std::log(st.payoffs[i]);
                objective_trace->push_back(obj);
            }
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t s = 0; s < dim; ++s)
                    next_bids[i][s] =
                        banned[i][s] || st.payoffs[i] <= 0.0
                            ? (banned[i][s] ? 0.0 : st.bids[i][s])
                            : budget * profile[i][s] * st.alloc[i][s] /
                                  st.payoffs[i];
            // Oscillation guard: when the price step reverses direction,
            // take the half-way bid update instead.
            std::vector<double> cand_prices(dim, 0.0);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t s = 0; s < dim; ++s)
                    cand_prices[s] += next_bids[i][s];
            double flip = 0.0;
            for (std::size_t s = 0; s < dim; ++s)
                flip += (cand_prices[s] - st.prices[s]) * prev_delta[s];
            if (flip < 0.0)
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t s = 0; s < dim; ++s)
                        next_bids[i][s] =
                            0.5 * (next_bids[i][s] + st.bids[i][s]);

            prev_prices = st.prices;
            st.bids.swap(next_bids);
            renormalize_rows();
            refresh(st, profile);
            double move = 0.0;
            for (std::size_t s = 0; s < dim; ++s) {
                prev_delta[s] = st.prices[s] - prev_prices[s];
                move = std::max(move, std::abs(prev_delta[s]));
            }
            stalled = move < tol.abs_tol;
        }
        if (!stalled) break;

        // Support purification at the stalled prices.
        const std::vector<double> lambdas = multipliers_of(st.payoffs, n);
        bool support_changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t s = 0; s < dim; ++s) {
                if (profile[i][s] <= 0.0 || st.prices[s] <= 0.0) continue;
                const double ratio =
                    profile[i][s] / (lambdas[i] * st.prices[s]);
                if (!banned[i][s] && !protected_[i][s] &&
                    st.bids[i][s] > 0.0 && ratio < 1.0 - kBanMargin) {
                    banned[i][s] = 1;
                    st.bids[i][s] = 0.0;
                    support_changed = true;
                } else if (banned[i][s] && ratio > 1.0 + kBanMargin) {
                    banned[i][s] = 0;
                    protected_[i][s] = 1;
                    st.bids[i][s] = 1e-3 * budget;
                    support_changed = true;
                }
            }
            // Never strand an agent without a live bid.
            double row = 0.0;
            for (double b : st.bids[i]) row += b;
            if (row <= 0.0) {
                std::size_t best = 0;
                double best_ratio = -1.0;
                for (std::size_t s = 0; s < dim; ++s) {
                    if (profile[i][s] <= 0.0 || st.prices[s] <= 0.0) continue;
                    const double ratio = profile[i][s] / st.prices[s];
                    if (ratio > best_ratio) {
                        best_ratio = ratio;
                        best = s;
                    }
                }
                banned[i][best] = 0;
                st.bids[i][best] = budget;
                support_changed = true;
            }
        }
        if (support_changed) {
            renormalize_rows();
            refresh(st, profile);
            continue;
        }

        const FocReport rep = residuals_of(st.prices, st.alloc, lambdas,
                                           profile, kSupportThreshold);
        if (rep.max_residual() <= foc_goal) {
            converged = true;
        } else {
            // Stalled, support stable, residuals above target: let the
            // dynamics keep grinding (the stall threshold is on a single
            // step, so progress can continue).
            prev_delta.assign(dim, 0.0);
            ++it;
        }
    }
    if (!converged)
        throw Error(errc::no_convergence,
                    "proportional response did not converge in " +
                        std::to_string(tol.max_iter) + " iterations");

    ParimutuelEquilibrium eq{Belief(st.prices), std::move(st.alloc),
                             multipliers_of(st.payoffs, n), 0.0, it};
    eq.foc_residual = verify_foc(eq, profile).max_residual();
    return eq;
}

}  // namespace

ParimutuelEquilibrium solve_parimutuel(const BeliefProfile& profile,
                                       const Tolerance& tol) {
    return solve_impl(profile, tol, nullptr);
}

ParimutuelEquilibrium solve_parimutuel_traced(
    const BeliefProfile& profile, const Tolerance& tol,
    std::vector<double>& objective_trace) {
    objective_trace.clear();
    return solve_impl(profile, tol, &objective_trace);
}

double phantom_median_price(const std::vector<double>& probs_state1) {
    const std::size_t n = probs_state1.size();
    if (n == 0)
        throw Error(errc::invalid_argument,
                    "phantom_median_price needs at least one agent");
    for (double p : probs_state1)
        if (!(p >= 0.0 && p <= 1.0))
            throw Error(errc::invalid_argument,
                        "agent probabilities must lie in [0,1]");
    std::vector<double> pool = probs_state1;
    pool.reserve(2 * n - 1);
    for (std::size_t k = 1; k < n; ++k)
        pool.push_back(static_cast<double>(k) / static_cast<double>(n));
    // Median of 2n-1 values: the n-th smallest.
    std::nth_element(pool.begin(), pool.begin() + (n - 1), pool.end());
    return pool[n - 1];
}

FocReport verify_foc(const ParimutuelEquilibrium& eq,
                     const BeliefProfile& profile, double support_threshold) {
    const std::size_t n = profile.size();
    if (eq.allocation.size() != n || eq.multipliers.size() != n ||
        eq.price.dim() != profile.dim())
        throw Error(errc::dimension_mismatch,
                    "equilibrium and profile shapes disagree");
    for (const auto& row : eq.allocation)
        if (row.size() != profile.dim())
            throw Error(errc::dimension_mismatch,
                        "allocation rows do not match the state count");
    return residuals_of(eq.price.probs(), eq.allocation, eq.multipliers,
                        profile, support_threshold);
}

}  // namespace beliefmkt
