#pragma once

#include <functional>
#include <vector>

#include "beliefmkt/core.hpp"

namespace beliefmkt {

/// Arrow-security prices and social wealth defining the linear budget set
/// { x >= 0 : prices . x = wealth }.
struct MarketSpec {
    std::vector<double> prices;
    double wealth = 1.0;

    static MarketSpec uniform(std::size_t dim, double wealth = 1.0);

    std::size_t dim() const { return prices.size(); }
    void validate() const;
};

/// Concave vNM index with derivative and inverse-derivative access.
/// Built-ins: log and CRRA (gamma > 0, gamma != 1). Custom indices supply
/// the three callables and are spot-checked for monotonicity, concavity,
/// and the Inada limits at z = 1e-8 and z = 1e8.
class UtilityIndex {
  public:
    enum class Kind { Log, Crra, Custom };
    using Fn = std::function<double(double)>;

    static UtilityIndex log_utility();
    static UtilityIndex crra(double gamma);
    static UtilityIndex custom(Fn u, Fn du, Fn du_inverse);

    Kind kind() const { return kind_; }
    double gamma() const { return gamma_; }

    /// u(z). At z = 0 returns -infinity when the index diverges there
    /// (log, CRRA with gamma > 1).
    double value(double z) const;
    /// u'(z), z > 0.
    double marginal(double z) const;
    /// (u')^{-1}(m), m > 0.
    double marginal_inverse(double m) const;

  private:
    UtilityIndex(Kind kind, double gamma, Fn u, Fn du, Fn du_inv)
        : kind_(kind), gamma_(gamma), u_(std::move(u)), du_(std::move(du)),
          du_inv_(std::move(du_inv)) {}

    Kind kind_;
    double gamma_ = 0.0;
    Fn u_, du_, du_inv_;
};

/// Units of consumption per state; lies on the budget hyperplane.
struct Portfolio {
    std::vector<double> holdings;
};

/// State-indexed utilities of a portfolio. Entries may be -infinity only
/// where a holding is zero under a diverging index.
struct UtilityAct {
    std::vector<double> utilities;
};

enum class Preference { Strict1, Strict2, Indifferent };

/// Socially optimal portfolio for aggregate belief q: maximizes
/// sum_s q_s u(x_s) over the budget set. Log has the closed form
/// x_s = wealth * q_s / price_s; otherwise the multiplier is found by
/// monotone bisection on the budget. States with q_s = 0 get x_s = 0.
Portfolio optimal_portfolio(const Belief& q, const MarketSpec& market,
                            const UtilityIndex& utility,
                            const Tolerance& tol = {});

UtilityAct utility_act(const Belief& q, const MarketSpec& market,
                       const UtilityIndex& utility, const Tolerance& tol = {});

/// sum_s p_s * utility_act(q)_s with the convention 0 * (-inf) = 0.
double expected_utility(const Belief& p, const Belief& q,
                        const MarketSpec& market, const UtilityIndex& utility,
                        const Tolerance& tol = {});

/// Compares expected utilities of q1 and q2 under truth p with an
/// indifference band of tol.abs_tol. -inf ties -inf; any finite value
/// beats -inf.
Preference prefers(const Belief& p, const Belief& q1, const Belief& q2,
                   const MarketSpec& market, const UtilityIndex& utility,
                   const Tolerance& tol = {});

/// Inverse of optimal_portfolio on interior portfolios: the unique belief
/// whose optimal portfolio is x, via p_s proportional to price_s / u'(x_s).
Belief belief_from_portfolio(const Portfolio& x, const MarketSpec& market,
                             const UtilityIndex& utility);

}  // namespace beliefmkt
