#include "beliefmkt/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "beliefmkt/parimutuel.hpp"

namespace beliefmkt {

AggregationRule AggregationRule::linear_pool() {
    return AggregationRule(Kind::LinearPool, "linear-pool", true);
}

AggregationRule AggregationRule::linear_pool(std::vector<double> weights) {
    AggregationRule rule(Kind::LinearPool, "linear-pool", true);
    rule.weights_ = Belief(std::move(weights)).probs();
    return rule;
}

AggregationRule AggregationRule::geometric_median() {
    return AggregationRule(Kind::GeometricMedian, "geometric-median", true);
}

AggregationRule AggregationRule::parimutuel_price() {
    return AggregationRule(Kind::ParimutuelPrice, "parimutuel-price", true);
}

AggregationRule AggregationRule::phantom_median_2state() {
    return AggregationRule(Kind::PhantomMedian2State, "phantom-median", true);
}

AggregationRule AggregationRule::custom(std::string name, Fn fn,
                                        bool surjective) {
    if (!fn)
        throw Error(errc::invalid_argument, "custom rule needs a callable");
    AggregationRule rule(Kind::Custom, std::move(name), surjective);
    rule.fn_ = std::move(fn);
    return rule;
}

AggregationRule AggregationRule::dictatorship(std::size_t agent) {
    return custom("dictatorship",
                  [agent](const BeliefProfile& profile, const Tolerance&) {
                      if (agent >= profile.size())
                          throw Error(errc::invalid_argument,
                                      "dictator index out of range");
                      return profile[agent];
                  },
                  true);
}

AggregationRule AggregationRule::constant(Belief value) {
    return custom("constant",
                  [value](const BeliefProfile& profile, const Tolerance&) {
                      if (profile.dim() != value.dim())
                          throw Error(errc::dimension_mismatch,
                                      "constant rule dimension mismatch");
                      return value;
                  },
                  false);
}

namespace {

Belief linear_pool_of(const BeliefProfile& profile,
                      const std::vector<double>& weights) {
    const std::size_t n = profile.size(), dim = profile.dim();
    if (!weights.empty() && weights.size() != n)
        throw Error(errc::dimension_mismatch,
                    "linear pool has " + std::to_string(weights.size()) +
                        " weights for " + std::to_string(n) + " agents");
    std::vector<double> out(dim, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double w =
            weights.empty() ? 1.0 / static_cast<double>(n) : weights[i];
        for (std::size_t s = 0; s < dim; ++s) out[s] += w * profile[i][s];
    }
    return Belief(std::move(out));
}

}  // namespace

Belief geometric_median(const BeliefProfile& profile, const Tolerance& tol) {
    tol.validate();
    const std::size_t dim = profile.dim();

    // Collapse coincident data points into weighted sites; the optimality
    // test at a site compares the pull of the others against its weight.
    std::vector<std::vector<double>> sites;
    std::vector<double> weight;
    for (const Belief& b : profile) {
        bool merged = false;
        for (std::size_t j = 0; j < sites.size(); ++j) {
            double d = 0.0;
            for (std::size_t s = 0; s < dim; ++s)
                d = std::max(d, std::abs(sites[j][s] - b[s]));
            if (d <= 1e-12) {
                weight[j] += 1.0;
                merged = true;
                break;
            }
        }
        if (!merged) {
            sites.push_back(b.probs());
            weight.push_back(1.0);
        }
    }
    if (sites.size() == 1) return Belief(sites[0]);

    std::vector<double> y(dim, 0.0);
    for (std::size_t j = 0; j < sites.size(); ++j)
        for (std::size_t s = 0; s < dim; ++s)
            y[s] += weight[j] * sites[j][s] / static_cast<double>(profile.size());

    std::vector<double> next(dim);
    for (int it = 0; it < tol.max_iter; ++it) {
        // Distances and the index of a site we may be sitting on.
        std::vector<double> dist(sites.size());
        std::ptrdiff_t at_site = -1;
        for (std::size_t j = 0; j < sites.size(); ++j) {
            double sq = 0.0;
            for (std::size_t s = 0; s < dim; ++s) {
                const double d = y[s] - sites[j][s];
                sq += d * d;
            }
            dist[j] = std::sqrt(sq);
            if (dist[j] <= 1e-12) at_site = static_cast<std::ptrdiff_t>(j);
        }

        if (at_site >= 0) {
            const std::size_t j0 = static_cast<std::size_t>(at_site);
            std::vector<double> pull(dim, 0.0);
            double inv_sum = 0.0;
            std::fill(next.begin(), next.end(), 0.0);
            for (std::size_t j = 0; j < sites.size(); ++j) {
                if (j == j0) continue;
                const double w = weight[j] / dist[j];
                inv_sum += w;
                for (std::size_t s = 0; s < dim; ++s) {
                    pull[s] += w * (sites[j][s] - y[s]);
                    next[s] += w * sites[j][s];
                }
            }
            double pull_norm = 0.0;
            for (double c : pull) pull_norm += c * c;
            pull_norm = std::sqrt(pull_norm);
            if (pull_norm <= weight[j0]) return make_belief(y);
            // Vardi-Zhang step off the site.
            const double eta = weight[j0] / pull_norm;
            double step = 0.0;
            for (std::size_t s = 0; s < dim; ++s) {
                const double t = next[s] / inv_sum;
                next[s] = (1.0 - eta) * t + eta * y[s];
                step = std::max(step, std::abs(next[s] - y[s]));
            }
            y = next;
            if (step < tol.abs_tol) return make_belief(y);
            continue;
        }

        double inv_sum = 0.0;
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t j = 0; j < sites.size(); ++j) {
            const double w = weight[j] / dist[j];
            inv_sum += w;
            for (std::size_t s = 0; s < dim; ++s) next[s] += w * sites[j][s];
        }
        double step = 0.0;
        for (std::size_t s = 0; s < dim; ++s) {
            next[s] /= inv_sum;
            step = std::max(step, std::abs(next[s] - y[s]));
        }
        y = next;
        if (step < tol.abs_tol) return make_belief(y);
    }
    throw Error(errc::no_convergence,
                "Weiszfeld iteration did not converge in " +
                    std::to_string(tol.max_iter) + " steps");
}

Belief aggregate(const AggregationRule& rule, const BeliefProfile& profile,
                 const Tolerance& tol) {
    switch (rule.kind()) {
        case AggregationRule::Kind::LinearPool:
            return linear_pool_of(profile, rule.weights());
        case AggregationRule::Kind::GeometricMedian:
            if (profile.size() % 2 == 0)
                throw Error(errc::even_agents_for_median,
                            "geometric median is single-valued only for an "
                            "odd number of agents; got " +
                                std::to_string(profile.size()));
            return geometric_median(profile, tol);
        case AggregationRule::Kind::ParimutuelPrice:
            return solve_parimutuel(profile, tol).price;
        case AggregationRule::Kind::PhantomMedian2State: {
            if (profile.dim() != 2)
                throw Error(errc::dimension_mismatch,
                            "phantom median rule is defined for 2 states");
            std::vector<double> probs;
            probs.reserve(profile.size());
            for (const Belief& b : profile) probs.push_back(b[0]);
            const double m = phantom_median_price(probs);
            return Belief({m, 1.0 - m});
        }
        case AggregationRule::Kind::Custom:
            return rule.fn_(profile, tol);
    }
    throw Error(errc::invalid_argument, "unknown aggregation rule kind");
}

double example1_aggregate(double p_a, double p_b) {
    if (!(p_a >= 0.0 && p_a <= 1.0 && p_b >= 0.0 && p_b <= 1.0))
        throw Error(errc::invalid_argument,
                    "example1_aggregate needs probabilities in [0,1]");
    const double lo = std::min(p_a, p_b), hi = std::max(p_a, p_b);
    return std::min(std::max(0.5, lo), hi);
}

}  // namespace beliefmkt
