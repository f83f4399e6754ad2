#include "beliefmkt/portfolio.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace beliefmkt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_same_dim(std::size_t a, std::size_t b, const char* what) {
    if (a != b)
        throw Error(errc::dimension_mismatch,
                    std::string(what) + ": dimensions " + std::to_string(a) +
                        " vs " + std::to_string(b));
}

}  // namespace

MarketSpec MarketSpec::uniform(std::size_t dim, double wealth) {
    return MarketSpec{std::vector<double>(dim, 1.0), wealth};
}

void MarketSpec::validate() const {
    if (prices.size() < 2)
        throw Error(errc::dimension_too_small, "market needs at least 2 states");
    for (double p : prices)
        if (!(p > 0.0))
            throw Error(errc::invalid_argument, "all prices must be positive");
    if (!(wealth > 0.0))
        throw Error(errc::invalid_argument, "wealth must be positive");
}

UtilityIndex UtilityIndex::log_utility() {
    return UtilityIndex(Kind::Log, 0.0, nullptr, nullptr, nullptr);
}

UtilityIndex UtilityIndex::crra(double gamma) {
    if (!(gamma > 0.0) || gamma == 1.0)
        throw Error(errc::invalid_argument,
                    "CRRA needs gamma > 0 and gamma != 1; use log_utility for "
                    "gamma = 1");
    return UtilityIndex(Kind::Crra, gamma, nullptr, nullptr, nullptr);
}

UtilityIndex UtilityIndex::custom(Fn u, Fn du, Fn du_inverse) {
    if (!u || !du || !du_inverse)
        throw Error(errc::invalid_argument, "custom index needs u, u', (u')^-1");
    // Spot-check u' > 0 decreasing (so u'' < 0) and the Inada limits at the
    // extremes of the positive axis.
    const double spots[] = {1e-8, 1e-4, 1.0, 1e4, 1e8};
    double prev = kInf;
    for (double z : spots) {
        const double m = du(z);
        if (!(m > 0.0))
            throw Error(errc::invalid_argument,
                        "custom index has u'(z) <= 0 at z=" + std::to_string(z));
        if (!(m < prev))
            throw Error(errc::invalid_argument,
                        "custom index has non-decreasing u' (u'' >= 0?)");
        prev = m;
    }
    if (!(du(1e-8) >= 1e2))
        throw Error(errc::invalid_argument,
                    "custom index fails the Inada spot-check at z=1e-8");
    if (!(du(1e8) <= 1e-2))
        throw Error(errc::invalid_argument,
                    "custom index fails the Inada spot-check at z=1e8");
    for (double z : {0.1, 1.0, 10.0}) {
        const double back = du_inverse(du(z));
        if (!(std::abs(back - z) <= 1e-6 * z))
            throw Error(errc::invalid_argument,
                        "custom (u')^-1 does not invert u' near z=" +
                            std::to_string(z));
    }
    return UtilityIndex(Kind::Custom, 0.0, std::move(u), std::move(du),
                        std::move(du_inverse));
}

double UtilityIndex::value(double z) const {
    switch (kind_) {
        case Kind::Log:
            return z > 0.0 ? std::log(z) : -kInf;
        case Kind::Crra:
            if (z <= 0.0) return gamma_ > 1.0 ? -kInf : -1.0 / (1.0 - gamma_);
            return (std::pow(z, 1.0 - gamma_) - 1.0) / (1.0 - gamma_);
        case Kind::Custom:
            return u_(z);
    }
    return 0.0;
}

double UtilityIndex::marginal(double z) const {
    switch (kind_) {
        case Kind::Log:
            return 1.0 / z;
        case Kind::Crra:
            return std::pow(z, -gamma_);
        case Kind::Custom:
            return du_(z);
    }
    return 0.0;
}

double UtilityIndex::marginal_inverse(double m) const {
    switch (kind_) {
        case Kind::Log:
            return 1.0 / m;
        case Kind::Crra:
            return std::pow(m, -1.0 / gamma_);
        case Kind::Custom:
            return du_inv_(m);
    }
    return 0.0;
}

namespace {

// Demand at multiplier lambda: x_s = (u')^{-1}(lambda * price_s / q_s) on the
// support of q, zero elsewhere. Spending is strictly decreasing in lambda.
std::vector<double> demand_at(double lambda, const Belief& q,
                              const MarketSpec& market,
                              const UtilityIndex& utility) {
    std::vector<double> x(q.dim(), 0.0);
    for (std::size_t s = 0; s < q.dim(); ++s)
        if (q[s] > 0.0)
            x[s] = utility.marginal_inverse(lambda * market.prices[s] / q[s]);
    return x;
}

double spending(const std::vector<double>& x, const MarketSpec& market) {
    double total = 0.0;
    for (std::size_t s = 0; s < x.size(); ++s)
        total += market.prices[s] * x[s];
    return total;
}

}  // namespace

Portfolio optimal_portfolio(const Belief& q, const MarketSpec& market,
                            const UtilityIndex& utility, const Tolerance& tol) {
    market.validate();
    tol.validate();
    require_same_dim(q.dim(), market.dim(), "optimal_portfolio");

    std::vector<double> x(q.dim(), 0.0);
    if (utility.kind() == UtilityIndex::Kind::Log) {
        for (std::size_t s = 0; s < q.dim(); ++s)
            x[s] = market.wealth * q[s] / market.prices[s];
        return Portfolio{std::move(x)};
    }

    // Monotone bisection on the multiplier. Bracket [eps, 1/eps] with
    // eps = 1e-12, doubling outward if the root escapes it.
    double lo = 1e-12, hi = 1e12;
    int guard = 0;
    while (spending(demand_at(lo, q, market, utility), market) <
           market.wealth) {
        lo *= 0.5;
        if (++guard > 600)
            throw Error(errc::no_convergence,
                        "optimal_portfolio could not bracket the multiplier "
                        "from below");
    }
    guard = 0;
    while (spending(demand_at(hi, q, market, utility), market) >
           market.wealth) {
        hi *= 2.0;
        if (++guard > 600)
            throw Error(errc::no_convergence,
                        "optimal_portfolio could not bracket the multiplier "
                        "from above");
    }
    const int iters = std::min(tol.max_iter, 200);
    for (int it = 0; it < iters && hi - lo > 1e-16 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (spending(demand_at(mid, q, market, utility), market) >=
            market.wealth)
            lo = mid;
        else
            hi = mid;
    }
    x = demand_at(0.5 * (lo + hi), q, market, utility);
    const double spent = spending(x, market);
    if (!(spent > 0.0) ||
        std::abs(spent - market.wealth) >
            std::max(1e-6, tol.rel_tol * 1e3) * market.wealth)
        throw Error(errc::no_convergence,
                    "bisection did not meet the budget within tolerance");
    // Exact budget: scale the bisection output onto the hyperplane.
    const double scale = market.wealth / spent;
    for (double& h : x) h *= scale;
    return Portfolio{std::move(x)};
}

UtilityAct utility_act(const Belief& q, const MarketSpec& market,
                       const UtilityIndex& utility, const Tolerance& tol) {
    Portfolio x = optimal_portfolio(q, market, utility, tol);
    std::vector<double> utilities(x.holdings.size());
    for (std::size_t s = 0; s < x.holdings.size(); ++s)
        utilities[s] = utility.value(x.holdings[s]);
    return UtilityAct{std::move(utilities)};
}

double expected_utility(const Belief& p, const Belief& q,
                        const MarketSpec& market, const UtilityIndex& utility,
                        const Tolerance& tol) {
    require_same_dim(p.dim(), q.dim(), "expected_utility");
    const UtilityAct act = utility_act(q, market, utility, tol);
    double total = 0.0;
    for (std::size_t s = 0; s < p.dim(); ++s) {
        if (p[s] == 0.0) continue;  // 0 * log(0) = 0 convention
        if (act.utilities[s] == -kInf) return -kInf;
        total += p[s] * act.utilities[s];
    }
    return total;
}

Preference prefers(const Belief& p, const Belief& q1, const Belief& q2,
                   const MarketSpec& market, const UtilityIndex& utility,
                   const Tolerance& tol) {
    const double u1 = expected_utility(p, q1, market, utility, tol);
    const double u2 = expected_utility(p, q2, market, utility, tol);
    if (u1 == -kInf && u2 == -kInf) return Preference::Indifferent;
    if (u1 == -kInf) return Preference::Strict2;
    if (u2 == -kInf) return Preference::Strict1;
    if (u1 > u2 + tol.abs_tol) return Preference::Strict1;
    if (u2 > u1 + tol.abs_tol) return Preference::Strict2;
    return Preference::Indifferent;
}

Belief belief_from_portfolio(const Portfolio& x, const MarketSpec& market,
                             const UtilityIndex& utility) {
    market.validate();
    require_same_dim(x.holdings.size(), market.dim(), "belief_from_portfolio");
    double spent = 0.0;
    for (std::size_t s = 0; s < x.holdings.size(); ++s) {
        if (!(x.holdings[s] > 0.0))
            throw Error(errc::boundary_portfolio,
                        "belief_from_portfolio needs an interior portfolio; "
                        "holding " +
                            std::to_string(s) + " is zero");
        spent += market.prices[s] * x.holdings[s];
    }
    if (std::abs(spent - market.wealth) > 1e-6 * market.wealth)
        throw Error(errc::invalid_argument,
                    "portfolio violates the budget hyperplane");
    std::vector<double> probs(x.holdings.size());
    for (std::size_t s = 0; s < probs.size(); ++s)
        probs[s] = market.prices[s] / utility.marginal(x.holdings[s]);
    return make_belief(std::move(probs));
}

}  // namespace beliefmkt
