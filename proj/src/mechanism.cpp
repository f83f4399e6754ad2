#include "beliefmkt/mechanism.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace beliefmkt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

const char* fired_rule_name(FiredRule r) {
    switch (r) {
        case FiredRule::Rule1: return "Rule1";
        case FiredRule::Rule2Accepted: return "Rule2Accepted";
        case FiredRule::Rule2Rejected: return "Rule2Rejected";
        case FiredRule::Rule3: return "Rule3";
    }
    return "Unknown";
}

OutcomeTrace outcome_g(const std::vector<Message>& messages,
                       const AggregationRule& rule, const MarketSpec& market,
                       const UtilityIndex& utility, const Tolerance& tol) {
    const std::size_t n = messages.size();
    if (n < 3)
        throw Error(errc::invalid_argument,
                    "the game form needs at least three agents");
    for (const Message& m : messages)
        if (m.announced.size() != n ||
            m.announced.dim() != messages.front().announced.dim())
            throw Error(errc::dimension_mismatch,
                        "announced profiles must all have shape n x |S|");

    const double band = tol.abs_tol;
    // Who agrees with whom, by announced profile.
    std::vector<std::size_t> dissenters;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t agree = 0;
        for (std::size_t j = 0; j < n; ++j)
            if (approx_equal(messages[i].announced, messages[j].announced,
                             band))
                ++agree;
        if (agree < n - 1) dissenters.push_back(i);
    }

    if (dissenters.empty()) {
        // Some agent agrees with everyone. If all n announcements match we
        // are in Rule 1; with n >= 3 an empty dissenter set forces that.
        return OutcomeTrace{aggregate(rule, messages.front().announced, tol),
                            FiredRule::Rule1, std::nullopt, std::nullopt};
    }

    if (dissenters.size() == 1) {
        const std::size_t i = dissenters.front();
        const std::size_t other = i == 0 ? 1 : 0;
        const BeliefProfile& consensus = messages[other].announced;
        const Belief f_consensus = aggregate(rule, consensus, tol);
        const Belief f_dissent = aggregate(rule, messages[i].announced, tol);
        // The deviation is granted when the consensus profile's belief for
        // the dissenter weakly prefers the consensus outcome, i.e. the
        // dissenter only ever reaches their lower contour set.
        const Preference pref = prefers(consensus[i], f_consensus, f_dissent,
                                        market, utility, tol);
        if (pref != Preference::Strict2)
            return OutcomeTrace{f_dissent, FiredRule::Rule2Accepted,
                                std::nullopt, i};
        return OutcomeTrace{f_consensus, FiredRule::Rule2Rejected,
                            std::nullopt, i};
    }

    std::size_t winner = 0;
    for (std::size_t i = 1; i < n; ++i)
        if (messages[i].integer > messages[winner].integer) winner = i;
    return OutcomeTrace{aggregate(rule, messages[winner].announced, tol),
                        FiredRule::Rule3, winner, std::nullopt};
}

AuditResult audit_truthful_equilibrium(
    const BeliefProfile& truths, const AggregationRule& rule,
    const MarketSpec& market, const UtilityIndex& utility, int resolution,
    std::uint64_t k_max, const Tolerance& tol, std::size_t min_deviations) {
    if (truths.size() < 3)
        throw Error(errc::invalid_argument,
                    "the audit needs at least three agents");
    if (!rule.surjective())
        throw Error(errc::invalid_argument,
                    "the canonical game form requires a surjective rule");

    const std::size_t n = truths.size(), dim = truths.dim();
    const Belief truthful_outcome = aggregate(rule, truths, tol);
    std::vector<double> honest(n);
    for (std::size_t i = 0; i < n; ++i)
        honest[i] = expected_utility(truths[i], truthful_outcome, market,
                                     utility, tol);

    AuditResult result{0.0, 0, std::nullopt, 0, false, truthful_outcome};

    const std::vector<Message> baseline(n, Message{truths, 1});
    auto consider = [&](std::size_t agent, Message deviation) {
        std::vector<Message> messages = baseline;
        messages[agent] = deviation;
        const OutcomeTrace trace =
            outcome_g(messages, rule, market, utility, tol);
        const double gained = expected_utility(truths[agent], trace.aggregate,
                                               market, utility, tol);
        const double gain =
            (gained == -kInf || honest[agent] == -kInf)
                ? (gained == honest[agent] ? 0.0 : (gained == -kInf ? -kInf
                                                                    : kInf))
                : gained - honest[agent];
        ++result.deviations_checked;
        if (gain > result.max_gain) {
            result.max_gain = gain;
            result.worst_agent = agent;
            result.worst_deviation = std::move(deviation);
        }
    };

    const std::vector<Belief> grid =
        simplex_grid(static_cast<int>(dim), resolution);
    for (std::size_t agent = 0; agent < n; ++agent) {
        // Integer-only deviations keep Rule 1 in force.
        consider(agent, Message{truths, 0});
        consider(agent, Message{truths, k_max});
        // Announced profiles one slot away from the truth.
        for (std::size_t slot = 0; slot < n; ++slot) {
            for (const Belief& g : grid) {
                if (approx_equal(g, truths[slot], tol.abs_tol)) continue;
                consider(agent, Message{truths.with(slot, g), k_max});
            }
        }
    }

    result.grid_too_coarse = result.deviations_checked < min_deviations;
    return result;
}

}  // namespace beliefmkt
