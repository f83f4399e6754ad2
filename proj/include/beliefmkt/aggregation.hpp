#pragma once

#include <functional>
#include <string>
#include <vector>

#include "beliefmkt/core.hpp"

namespace beliefmkt {

/// Named total map from belief profiles to a single aggregate belief.
/// Built-ins cover the linear opinion pool (optionally weighted), the
/// geometric median (odd agent counts), the equal-wealth parimutuel
/// price, and the two-state phantom median; custom rules wrap a callable
/// and must declare whether unanimity reaches every belief (surjectivity,
/// which the mechanism audit requires).
class AggregationRule {
  public:
    enum class Kind {
        LinearPool,
        GeometricMedian,
        ParimutuelPrice,
        PhantomMedian2State,
        Custom,
    };
    using Fn = std::function<Belief(const BeliefProfile&, const Tolerance&)>;

    /// Symmetric linear pool (equal weights).
    static AggregationRule linear_pool();
    /// Weighted linear pool; weights are clamped/renormalized like beliefs.
    static AggregationRule linear_pool(std::vector<double> weights);
    static AggregationRule geometric_median();
    static AggregationRule parimutuel_price();
    static AggregationRule phantom_median_2state();
    static AggregationRule custom(std::string name, Fn fn, bool surjective);
    /// f(p) = p_agent. Surjective, monotone, strategy-proof.
    static AggregationRule dictatorship(std::size_t agent = 0);
    /// f(p) = value regardless of the profile. Not surjective.
    static AggregationRule constant(Belief value);

    Kind kind() const { return kind_; }
    const std::string& name() const { return name_; }
    bool surjective() const { return surjective_; }
    /// Linear pool weights; empty means equal weights.
    const std::vector<double>& weights() const { return weights_; }

    friend Belief aggregate(const AggregationRule& rule,
                            const BeliefProfile& profile,
                            const Tolerance& tol);

  private:
    AggregationRule(Kind kind, std::string name, bool surjective)
        : kind_(kind), name_(std::move(name)), surjective_(surjective) {}

    Kind kind_;
    std::string name_;
    bool surjective_;
    std::vector<double> weights_;
    Fn fn_;
};

Belief aggregate(const AggregationRule& rule, const BeliefProfile& profile,
                 const Tolerance& tol = {});

/// Geometric median of the profile in Euclidean norm, by Weiszfeld
/// iteration with the Vardi-Zhang step whenever an iterate lands on a
/// data point. Converged when the step drops below tol.abs_tol.
Belief geometric_median(const BeliefProfile& profile, const Tolerance& tol = {});

/// Closed-form equilibrium aggregate of the two-agent, two-state linear
/// pool game with log utility: med(p_a, p_b, 1/2).
double example1_aggregate(double p_a, double p_b);

}  // namespace beliefmkt
