// Brute-force reference implementations used only by tests. These stay
// deliberately independent of the solver paths they check: straight
// enumeration, no first-order conditions.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "beliefmkt/core.hpp"
#include "beliefmkt/portfolio.hpp"

namespace beliefmkt::oracles {

inline double objective(const Belief& q, const std::vector<double>& x,
                        const UtilityIndex& u) {
    double total = 0.0;
    for (std::size_t s = 0; s < x.size(); ++s) {
        if (q[s] == 0.0) continue;
        const double v = u.value(x[s]);
        if (v == -std::numeric_limits<double>::infinity()) return v;
        total += q[s] * v;
    }
    return total;
}

/// Two-state budget line walked at `resolution` intervals.
inline std::vector<double> grid_search_portfolio_2state(
    const Belief& q, const MarketSpec& m, const UtilityIndex& u,
    int resolution) {
    const double x1_max = m.wealth / m.prices[0];
    std::vector<double> best{0.0, 0.0};
    double best_val = -std::numeric_limits<double>::infinity();
    for (int k = 0; k <= resolution; ++k) {
        const double x1 = x1_max * static_cast<double>(k) / resolution;
        const double x2 = (m.wealth - m.prices[0] * x1) / m.prices[1];
        const std::vector<double> x{x1, std::max(x2, 0.0)};
        const double val = objective(q, x, u);
        if (val > best_val) {
            best_val = val;
            best = x;
        }
    }
    return best;
}

/// Three-state budget plane: coarse barycentric sweep followed by local
/// zoom passes, reaching an effective resolution well past 1e4 per axis.
inline std::vector<double> grid_search_portfolio_3state(
    const Belief& q, const MarketSpec& m, const UtilityIndex& u,
    int coarse = 220, int zooms = 4, int local = 24) {
    const double x1_max = m.wealth / m.prices[0];
    const double x2_cap = m.wealth / m.prices[1];
    auto portfolio_at = [&](double x1, double x2) {
        const double rest = m.wealth - m.prices[0] * x1 - m.prices[1] * x2;
        return std::vector<double>{x1, x2, std::max(rest / m.prices[2], 0.0)};
    };
    double best_x1 = 0.0, best_x2 = 0.0;
    double best_val = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= coarse; ++i) {
        const double x1 = x1_max * static_cast<double>(i) / coarse;
        const double x2_hi = (m.wealth - m.prices[0] * x1) / m.prices[1];
        for (int j = 0; j <= coarse; ++j) {
            const double x2 = x2_hi * static_cast<double>(j) / coarse;
            const double val = objective(q, portfolio_at(x1, x2), u);
            if (val > best_val) {
                best_val = val;
                best_x1 = x1;
                best_x2 = x2;
            }
        }
    }
    double h1 = x1_max / coarse, h2 = x2_cap / coarse;
    for (int z = 0; z < zooms; ++z) {
        const double lo1 = std::max(0.0, best_x1 - 2.0 * h1);
        const double hi1 = std::min(x1_max, best_x1 + 2.0 * h1);
        const double lo2 = std::max(0.0, best_x2 - 2.0 * h2);
        const double hi2 = std::min(x2_cap, best_x2 + 2.0 * h2);
        for (int i = 0; i <= local; ++i) {
            const double x1 = lo1 + (hi1 - lo1) * static_cast<double>(i) / local;
            for (int j = 0; j <= local; ++j) {
                const double x2 =
                    lo2 + (hi2 - lo2) * static_cast<double>(j) / local;
                if (m.prices[0] * x1 + m.prices[1] * x2 > m.wealth) continue;
                const double val = objective(q, portfolio_at(x1, x2), u);
                if (val > best_val) {
                    best_val = val;
                    best_x1 = x1;
                    best_x2 = x2;
                }
            }
        }
        h1 = (hi1 - lo1) / local;
        h2 = (hi2 - lo2) / local;
    }
    return portfolio_at(best_x1, best_x2);
}

/// Sum of Euclidean distances from p to the profile points.
inline double distance_sum(const BeliefProfile& profile,
                           const Belief& p) {
    double total = 0.0;
    for (const Belief& b : profile) {
        double sq = 0.0;
        for (std::size_t s = 0; s < p.dim(); ++s) {
            const double d = b[s] - p[s];
            sq += d * d;
        }
        total += std::sqrt(sq);
    }
    return total;
}

}  // namespace beliefmkt::oracles
