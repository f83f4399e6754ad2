#include "beliefmkt/revelation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace beliefmkt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_linear_pool_log(const GameSpec& spec, const char* what) {
    if (spec.rule.kind() != AggregationRule::Kind::LinearPool ||
        spec.utility.kind() != UtilityIndex::Kind::Log)
        throw Error(errc::invalid_argument,
                    std::string(what) +
                        " is defined for the linear pool with log utility");
}

double pool_weight(const AggregationRule& rule, std::size_t n, std::size_t i) {
    const auto& w = rule.weights();
    if (w.empty()) return 1.0 / static_cast<double>(n);
    if (w.size() != n)
        throw Error(errc::dimension_mismatch,
                    "pool weights do not match the agent count");
    return w[i];
}

/// Euclidean projection onto the probability simplex (sort-based).
std::vector<double> project_simplex(std::vector<double> v) {
    std::vector<double> u = v;
    std::sort(u.begin(), u.end(), std::greater<double>());
    double running = 0.0, theta = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        running += u[j];
        const double t = (running - 1.0) / static_cast<double>(j + 1);
        if (u[j] - t > 0.0) theta = t;
    }
    for (double& x : v) x = std::max(0.0, x - theta);
    return v;
}

}  // namespace

void GameSpec::validate() const {
    market.validate();
    if (truths.dim() != market.dim())
        throw Error(errc::dimension_mismatch,
                    "truths and market disagree on the number of states");
    if (rule.kind() == AggregationRule::Kind::LinearPool &&
        !rule.weights().empty() && rule.weights().size() != truths.size())
        throw Error(errc::dimension_mismatch,
                    "pool weights do not match the agent count");
}

double payoff(const GameSpec& spec, const ReportProfile& reports,
              std::size_t i, const Tolerance& tol) {
    spec.validate();
    if (i >= spec.truths.size())
        throw Error(errc::invalid_argument, "agent index out of range");
    if (reports.size() != spec.truths.size() ||
        reports.dim() != spec.truths.dim())
        throw Error(errc::dimension_mismatch,
                    "reports do not match the game's shape");
    const Belief agg = aggregate(spec.rule, reports, tol);
    return expected_utility(spec.truths[i], agg, spec.market, spec.utility,
                            tol);
}

Belief best_response(const GameSpec& spec, const ReportProfile& reports,
                     std::size_t i, const Tolerance& tol) {
    spec.validate();
    tol.validate();
    require_linear_pool_log(spec, "best_response");
    if (i >= spec.truths.size())
        throw Error(errc::invalid_argument, "agent index out of range");
    const std::size_t n = spec.truths.size(), dim = spec.truths.dim();
    const Belief& truth = spec.truths[i];
    const double wi = pool_weight(spec.rule, n, i);
    if (wi == 0.0) return truth;  // no influence; stay at the truth

    std::vector<double> rest(dim, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double wj = pool_weight(spec.rule, n, j);
        for (std::size_t s = 0; s < dim; ++s) rest[s] += wj * reports[j][s];
    }

    if (dim == 2) {
        const double rho = std::clamp((truth[0] - rest[0]) / wi, 0.0, 1.0);
        return Belief({rho, 1.0 - rho});
    }

    // Mass on states outside the truth's support is wasted, so ascend on
    // the support face only; that also keeps the payoff finite along the
    // path from the truth.
    std::vector<std::size_t> face;
    for (std::size_t s = 0; s < dim; ++s)
        if (truth[s] > 0.0) face.push_back(s);

    const auto face_payoff = [&](const std::vector<double>& z) {
        double total = 0.0;
        for (std::size_t k = 0; k < face.size(); ++k) {
            const double mass = wi * z[k] + rest[face[k]];
            if (!(mass > 0.0)) return -kInf;
            total += truth[face[k]] * std::log(mass);
        }
        return total;
    };

    std::vector<double> z(face.size());
    for (std::size_t k = 0; k < face.size(); ++k) z[k] = truth[face[k]];
    double fz = face_payoff(z);
    double eta = 1.0;
    std::vector<double> grad(face.size()), trial(face.size());

    const double stop = tol.abs_tol;
    bool converged = false;
    for (int it = 0; it < tol.max_iter; ++it) {
        for (std::size_t k = 0; k < face.size(); ++k)
            grad[k] = truth[face[k]] * wi / (wi * z[k] + rest[face[k]]);

        for (std::size_t k = 0; k < face.size(); ++k)
            trial[k] = z[k] + grad[k];
        trial = project_simplex(std::move(trial));
        double gp = 0.0;
        for (std::size_t k = 0; k < face.size(); ++k) {
            const double d = trial[k] - z[k];
            gp += d * d;
        }
        if (std::sqrt(gp) < stop) {
            converged = true;
            break;
        }

        eta = std::min(eta * 2.0, 1e6);
        bool improved = false;
        for (int bt = 0; bt < 80; ++bt) {
            for (std::size_t k = 0; k < face.size(); ++k)
                trial[k] = z[k] + eta * grad[k];
            trial = project_simplex(trial);
            const double ft = face_payoff(trial);
            if (ft > fz) {
                z = trial;
                fz = ft;
                improved = true;
                break;
            }
            eta *= 0.5;
        }
        if (!improved) {
            // Flat to floating-point resolution: as converged as we get.
            converged = true;
            break;
        }
    }
    if (!converged)
        throw Error(errc::no_convergence,
                    "best response ascent did not converge");

    std::vector<double> out(dim, 0.0);
    for (std::size_t k = 0; k < face.size(); ++k) out[face[k]] = z[k];
    return make_belief(std::move(out));
}

DynamicsResult br_dynamics(const GameSpec& spec, const ReportProfile& start,
                           int max_rounds, const Tolerance& tol) {
    spec.validate();
    if (start.size() != spec.truths.size() || start.dim() != spec.truths.dim())
        throw Error(errc::dimension_mismatch,
                    "start profile does not match the game's shape");
    if (max_rounds < 1)
        throw Error(errc::invalid_argument, "max_rounds must be >= 1");

    std::vector<Belief> reports = start.beliefs();
    DynamicsResult result{start, aggregate(spec.rule, start, tol), false, 0};
    for (int round = 0; round < max_rounds; ++round) {
        double move = 0.0;
        for (std::size_t i = 0; i < reports.size(); ++i) {
            Belief reply =
                best_response(spec, ReportProfile(reports), i, tol);
            move = std::max(move, linf_distance(reply, reports[i]));
            reports[i] = std::move(reply);
        }
        if (move < tol.abs_tol) {
            result.converged = true;
            break;
        }
        result.rounds = round + 1;
    }
    result.reports = ReportProfile(std::move(reports));
    result.aggregate = aggregate(spec.rule, result.reports, tol);
    return result;
}

MarketNash nash_from_parimutuel(const BeliefProfile& truths,
                                const Tolerance& tol) {
    ParimutuelEquilibrium eq = solve_parimutuel(truths, tol);
    const std::size_t n = truths.size(), dim = truths.dim();
    std::vector<Belief> reports;
    reports.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> r(dim);
        for (std::size_t s = 0; s < dim; ++s)
            r[s] = static_cast<double>(n) * eq.price[s] * eq.allocation[i][s];
        reports.push_back(make_belief(std::move(r)));
    }
    ReportProfile profile(std::move(reports));
    Belief agg = aggregate(AggregationRule::linear_pool(), profile, tol);
    return MarketNash{std::move(profile), std::move(agg), std::move(eq)};
}

double NashReport::max_gap() const {
    double g = 0.0;
    for (double v : gaps) g = std::max(g, v);
    return g;
}

NashReport verify_nash(const GameSpec& spec, const ReportProfile& reports,
                       const Tolerance& tol) {
    spec.validate();
    require_linear_pool_log(spec, "verify_nash");
    const std::size_t n = spec.truths.size(), dim = spec.truths.dim();
    const Belief agg = aggregate(spec.rule, reports, tol);

    NashReport rep;
    rep.gaps.resize(n);
    rep.support_gaps.assign(n, 0.0);
    rep.dual_gaps.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const Belief reply = best_response(spec, reports, i, tol);
        const double current = payoff(spec, reports, i, tol);
        const double best = payoff(spec, reports.with(i, reply), i, tol);
        rep.gaps[i] = (best == -kInf && current == -kInf) ? 0.0 : best - current;

        // lambda_i from the support equalities p_is = lambda_i agg_s.
        double mass_p = 0.0, mass_agg = 0.0;
        for (std::size_t s = 0; s < dim; ++s) {
            if (reports[i][s] > 1e-12) {
                mass_p += spec.truths[i][s];
                mass_agg += agg[s];
            }
        }
        const double lambda = mass_agg > 0.0 ? mass_p / mass_agg : 0.0;
        for (std::size_t s = 0; s < dim; ++s) {
            const double slack = spec.truths[i][s] - lambda * agg[s];
            if (reports[i][s] > 1e-9)
                rep.support_gaps[i] =
                    std::max(rep.support_gaps[i], std::abs(slack));
            rep.dual_gaps[i] = std::max(rep.dual_gaps[i], slack);
        }
        rep.dual_gaps[i] = std::max(rep.dual_gaps[i], 0.0);
    }
    return rep;
}

}  // namespace beliefmkt
