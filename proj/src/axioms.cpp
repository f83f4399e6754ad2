#include "beliefmkt/axioms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "beliefmkt/revelation.hpp"

namespace beliefmkt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

BeliefProfile mixed_toward(const BeliefProfile& profile, const Belief& target,
                           const std::vector<double>& lambdas) {
    if (lambdas.size() != profile.size())
        throw Error(errc::dimension_mismatch,
                    "one mixing weight per agent is required");
    std::vector<Belief> moved;
    moved.reserve(profile.size());
    for (std::size_t i = 0; i < profile.size(); ++i)
        moved.push_back(mix(profile[i], target, lambdas[i]));
    return BeliefProfile(std::move(moved));
}

}  // namespace

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "Pass";
        case Verdict::Fail: return "Fail";
        case Verdict::Inconclusive: return "Inconclusive";
    }
    return "Unknown";
}

AxiomReport check_recursive_invariance(const AggregationRule& rule,
                                       const std::vector<RiSample>& samples,
                                       const Tolerance& tol, double match_tol) {
    AxiomReport report;
    report.axiom = "recursive-invariance";
    for (const RiSample& sample : samples) {
        const Belief base = aggregate(rule, sample.profile, tol);
        for (const std::vector<double>& lambdas : sample.lambda_vectors) {
            ++report.samples_checked;
            const BeliefProfile moved =
                mixed_toward(sample.profile, base, lambdas);
            const Belief after = aggregate(rule, moved, tol);
            const double gap = linf_distance(after, base);
            if (gap > match_tol) {
                Counterexample ce{sample.profile, moved,    lambdas,
                                  std::nullopt,   base,     after,
                                  gap,            "recursive-invariance"};
                report.verdict = Verdict::Fail;
                report.counterexample = std::move(ce);
                report.notes = "aggregate moved by " + std::to_string(gap) +
                               " under mixing toward it";
                return report;
            }
        }
    }
    report.notes = "no violation in " +
                   std::to_string(report.samples_checked) + " mixed profiles";
    return report;
}

bool lower_contour_subset(const Belief& q_base, const Belief& p_i,
                          const Belief& p_tilde, const Belief& f_p,
                          const MarketSpec& market, const UtilityIndex& utility,
                          const Tolerance& tol) {
    (void)market;
    (void)utility;
    if (!approx_equal(q_base, f_p, std::max(tol.abs_tol, 1e-9)))
        throw Error(errc::invalid_argument,
                    "contour sets are taken at the aggregate: q_base must "
                    "equal f_p");
    const std::size_t dim = p_i.dim();
    double seg_norm_sq = 0.0, dot = 0.0;
    for (std::size_t s = 0; s < dim; ++s) {
        const double seg = f_p[s] - p_i[s];
        seg_norm_sq += seg * seg;
        dot += (p_tilde[s] - p_i[s]) * seg;
    }
    const double band = std::max(tol.abs_tol, 1e-9);
    if (seg_norm_sq <= 1e-24) return linf_distance(p_tilde, p_i) <= band;
    const double t = std::clamp(dot / seg_norm_sq, 0.0, 1.0);
    double residual = 0.0;
    for (std::size_t s = 0; s < dim; ++s) {
        const double on_seg = p_i[s] + t * (f_p[s] - p_i[s]);
        residual = std::max(residual, std::abs(p_tilde[s] - on_seg));
    }
    return residual <= band;
}

ContourSampleResult lower_contour_subset_sampled(
    const Belief& q_base, const Belief& p_i, const Belief& p_tilde,
    const Belief& f_p, const MarketSpec& market, const UtilityIndex& utility,
    int resolution, const Tolerance& tol) {
    if (!approx_equal(q_base, f_p, std::max(tol.abs_tol, 1e-9)))
        throw Error(errc::invalid_argument,
                    "contour sets are taken at the aggregate: q_base must "
                    "equal f_p");
    const double level_i = expected_utility(p_i, f_p, market, utility, tol);
    const double level_t = expected_utility(p_tilde, f_p, market, utility, tol);

    ContourSampleResult result;
    // Inclusion margin: beyond float noise but far below any real
    // violation the generators produce.
    const double margin = 1e-9;
    for (const Belief& q :
         simplex_grid(static_cast<int>(p_i.dim()), resolution)) {
        ++result.points_checked;
        const double eu_i = expected_utility(p_i, q, market, utility, tol);
        if (!(eu_i <= level_i + 1e-12)) continue;  // outside L(f_p, p_i)
        const double eu_t = expected_utility(p_tilde, q, market, utility, tol);
        if (eu_t == -kInf) continue;
        const double excess = level_t == -kInf ? kInf : eu_t - level_t;
        if (excess > margin && excess > result.margin) {
            result.subset_holds = false;
            result.violating_q = q;
            result.margin = excess;
        }
    }
    return result;
}

AxiomReport check_monotonicity(const AggregationRule& rule,
                               const std::vector<RiSample>& samples,
                               const MarketSpec& market,
                               const UtilityIndex& utility,
                               const Tolerance& tol, double match_tol,
                               std::size_t contour_checks,
                               int contour_resolution) {
    AxiomReport report;
    report.axiom = "monotonicity";
    std::size_t validated = 0;
    for (const RiSample& sample : samples) {
        const Belief base = aggregate(rule, sample.profile, tol);
        for (const std::vector<double>& lambdas : sample.lambda_vectors) {
            ++report.samples_checked;
            const BeliefProfile moved =
                mixed_toward(sample.profile, base, lambdas);

            // Guard the segment criterion itself on a small sub-sample:
            // every segment move must enlarge the mover's lower contour
            // set according to the brute-force oracle.
            if (validated < contour_checks) {
                for (std::size_t i = 0; i < moved.size(); ++i) {
                    if (!lower_contour_subset(base, sample.profile[i],
                                              moved[i], base, market, utility,
                                              tol)) {
                        report.verdict = Verdict::Inconclusive;
                        report.notes =
                            "segment move failed the segment criterion";
                        return report;
                    }
                    const ContourSampleResult oracle =
                        lower_contour_subset_sampled(
                            base, sample.profile[i], moved[i], base, market,
                            utility, contour_resolution, tol);
                    if (!oracle.subset_holds) {
                        report.verdict = Verdict::Inconclusive;
                        report.notes =
                            "segment criterion and sampled contour oracle "
                            "disagree; margin " +
                            std::to_string(oracle.margin);
                        return report;
                    }
                }
                ++validated;
            }

            const Belief after = aggregate(rule, moved, tol);
            const double gap = linf_distance(after, base);
            if (gap > match_tol) {
                Counterexample ce{sample.profile, moved,  lambdas,
                                  std::nullopt,   base,   after,
                                  gap,            "monotonicity"};
                report.verdict = Verdict::Fail;
                report.counterexample = std::move(ce);
                report.notes =
                    "contour sets grew for every agent yet the aggregate "
                    "moved by " +
                    std::to_string(gap);
                return report;
            }
        }
    }
    std::ostringstream notes;
    notes << "no violation in " << report.samples_checked
          << " segment-move profiles; " << validated
          << " cross-validated against the contour oracle at resolution "
          << contour_resolution;
    report.notes = notes.str();
    return report;
}

AxiomReport check_no_veto_power(const AggregationRule& rule,
                                const std::vector<NvpSample>& samples,
                                const Tolerance& tol, double match_tol) {
    AxiomReport report;
    report.axiom = "no-veto-power";
    for (const NvpSample& sample : samples) {
        if (sample.n_agents < 2)
            throw Error(errc::invalid_argument,
                        "no veto power needs at least two agents");
        if (sample.deviant_index >= sample.n_agents)
            throw Error(errc::invalid_argument, "deviant index out of range");

        const BeliefProfile unanimous(
            std::vector<Belief>(sample.n_agents, sample.shared));
        const BeliefProfile dissent = unanimous.with(sample.deviant_index,
                                                     sample.deviant);
        for (const BeliefProfile* profile : {&unanimous, &dissent}) {
            ++report.samples_checked;
            const Belief out = aggregate(rule, *profile, tol);
            const double gap = linf_distance(out, sample.shared);
            if (gap > match_tol) {
                Counterexample ce{*profile,
                                  std::nullopt,
                                  {},
                                  sample.deviant_index,
                                  sample.shared,
                                  out,
                                  gap,
                                  profile == &unanimous ? "unanimity"
                                                        : "n-1 consensus"};
                report.verdict = Verdict::Fail;
                report.counterexample = std::move(ce);
                report.notes = "aggregate differs from the consensus belief "
                               "by " + std::to_string(gap);
                return report;
            }
        }
    }
    report.notes = "consensus respected in " +
                   std::to_string(report.samples_checked) + " profiles";
    return report;
}

AxiomReport check_strategy_proofness(const AggregationRule& rule,
                                     const std::vector<BeliefProfile>& profiles,
                                     const std::vector<Belief>& deviation_grid,
                                     const MarketSpec& market,
                                     const UtilityIndex& utility,
                                     const Tolerance& tol,
                                     double improve_tol) {
    AxiomReport report;
    report.axiom = "strategy-proofness";
    for (const BeliefProfile& profile : profiles) {
        const Belief truthful = aggregate(rule, profile, tol);
        for (std::size_t i = 0; i < profile.size(); ++i) {
            const double honest = expected_utility(profile[i], truthful,
                                                   market, utility, tol);
            for (const Belief& q : deviation_grid) {
                ++report.samples_checked;
                const BeliefProfile deviated = profile.with(i, q);
                const Belief out = aggregate(rule, deviated, tol);
                const double gained =
                    expected_utility(profile[i], out, market, utility, tol);
                const bool improves =
                    honest == -kInf ? gained > -kInf
                                    : gained > honest + improve_tol;
                if (improves) {
                    Counterexample ce{profile,
                                      deviated,
                                      {},
                                      i,
                                      truthful,
                                      out,
                                      honest == -kInf ? kInf : gained - honest,
                                      "profitable misreport"};
                    report.verdict = Verdict::Fail;
                    report.counterexample = std::move(ce);
                    report.notes =
                        "agent " + std::to_string(i) +
                        " gains " + std::to_string(ce.gap) +
                        " by deviating";
                    return report;
                }
            }
        }
    }
    report.notes = "no violation found across " +
                   std::to_string(report.samples_checked) + " deviations (" +
                   std::to_string(deviation_grid.size()) +
                   "-point deviation grid)";
    return report;
}

std::vector<std::size_t> max_elements(const std::vector<Belief>& K,
                                      const Belief& p,
                                      const MarketSpec& market,
                                      const UtilityIndex& utility, double band,
                                      const Tolerance& tol) {
    std::vector<double> values(K.size());
    double best = -kInf;
    for (std::size_t k = 0; k < K.size(); ++k) {
        values[k] = expected_utility(p, K[k], market, utility, tol);
        best = std::max(best, values[k]);
    }
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < K.size(); ++k)
        if (values[k] >= best - band) out.push_back(k);
    return out;
}

OpportunityMap linear_pool_opportunity_map(int resolution,
                                           const Tolerance& tol) {
    return [resolution, tol](const BeliefProfile& profile,
                             std::size_t agent) -> std::vector<Belief> {
        if (agent >= profile.size())
            throw Error(errc::invalid_argument, "agent index out of range");
        const MarketNash nash = nash_from_parimutuel(profile, tol);
        const std::size_t n = profile.size(), dim = profile.dim();
        std::vector<double> rest(dim, 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == agent) continue;
            for (std::size_t s = 0; s < dim; ++s)
                rest[s] += nash.reports[j][s];
        }
        std::vector<Belief> opportunities;
        for (const Belief& g : simplex_grid(static_cast<int>(dim),
                                            resolution)) {
            std::vector<double> agg(dim);
            for (std::size_t s = 0; s < dim; ++s)
                agg[s] = (g[s] + rest[s]) / static_cast<double>(n);
            opportunities.push_back(make_belief(std::move(agg)));
        }
        return opportunities;
    };
}

namespace {

// EU(p, q) >= max EU(p, .) over K, within the band. q need not itself be
// an element of K.
bool near_maximal_over(const Belief& q, const std::vector<Belief>& K,
                       const Belief& p, const MarketSpec& market,
                       const UtilityIndex& utility, double band,
                       const Tolerance& tol) {
    const double at_q = expected_utility(p, q, market, utility, tol);
    for (const Belief& k : K) {
        const double v = expected_utility(p, k, market, utility, tol);
        if (v > (at_q == -kInf ? -kInf : at_q + band)) return false;
        if (at_q == -kInf && v > -kInf) return false;
    }
    return true;
}

}  // namespace

AxiomReport check_condition_mu(const AggregationRule& rule,
                               const std::vector<Belief>& base_set,
                               const OpportunityMap& opportunity,
                               const std::vector<MuSample>& samples,
                               const MarketSpec& market,
                               const UtilityIndex& utility,
                               const Tolerance& tol, double match_tol) {
    AxiomReport report;
    report.axiom = "condition-mu";
    const double band = tol.abs_tol;

    auto fail = [&](const MuSample& sample, const char* clause,
                    const Belief& expected, const Belief& got, double gap,
                    std::optional<std::size_t> agent) {
        Counterexample ce{sample.p,  sample.p_tilde, {},  agent,
                          expected,  got,            gap, clause};
        report.verdict = Verdict::Fail;
        report.counterexample = std::move(ce);
        report.notes = std::string("clause ") + clause + " fails with gap " +
                       std::to_string(gap);
    };

    for (const MuSample& sample : samples) {
        ++report.samples_checked;
        const std::size_t n = sample.p.size();
        if (sample.p_tilde.size() != n || sample.p_tilde.dim() != sample.p.dim())
            throw Error(errc::dimension_mismatch,
                        "profile pair shapes disagree");
        const Belief f_p = aggregate(rule, sample.p, tol);
        const Belief f_pt = aggregate(rule, sample.p_tilde, tol);

        std::vector<std::vector<Belief>> C(n);
        for (std::size_t i = 0; i < n; ++i) C[i] = opportunity(sample.p, i);

        // Base requirement: f(p) is i-maximal in C_i(p) for every i.
        for (std::size_t i = 0; i < n; ++i) {
            if (!near_maximal_over(f_p, C[i], sample.p[i], market, utility,
                                   band, tol)) {
                fail(sample, "base", f_p, f_p, 0.0, i);
                return report;
            }
        }

        // (i): if f(p) stays i-maximal in C_i(p) under every tilde belief,
        // the aggregate may not move.
        bool premise_i = true;
        for (std::size_t i = 0; i < n && premise_i; ++i)
            premise_i = near_maximal_over(f_p, C[i], sample.p_tilde[i], market,
                                          utility, band, tol);
        if (premise_i) {
            const double gap = linf_distance(f_pt, f_p);
            if (gap > match_tol) {
                fail(sample, "i", f_p, f_pt, gap, std::nullopt);
                return report;
            }
        }

        // Near-maximal subsets of the base set under each tilde belief.
        std::vector<std::vector<std::size_t>> base_max(n);
        for (std::size_t j = 0; j < n; ++j)
            base_max[j] = max_elements(base_set, sample.p_tilde[j], market,
                                       utility, band, tol);

        // (ii): a deviator-maximal opportunity that everyone else already
        // ranks at the top of B must be the chosen aggregate.
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k : max_elements(C[i], sample.p_tilde[i], market,
                                              utility, band, tol)) {
                const Belief& q = C[i][k];
                bool others_agree = true;
                for (std::size_t j = 0; j < n && others_agree; ++j) {
                    if (j == i) continue;
                    others_agree = near_maximal_over(q, base_set,
                                                     sample.p_tilde[j], market,
                                                     utility, band, tol);
                }
                if (!others_agree) continue;
                const double gap = linf_distance(f_pt, q);
                if (gap > match_tol) {
                    fail(sample, "ii", q, f_pt, gap, i);
                    return report;
                }
            }
        }

        // (iii): a belief everyone ranks at the top of B must be chosen.
        for (std::size_t k : base_max[0]) {
            const Belief& q = base_set[k];
            bool unanimousTop = true;
            for (std::size_t j = 1; j < n && unanimousTop; ++j)
                unanimousTop =
                    std::find(base_max[j].begin(), base_max[j].end(), k) !=
                    base_max[j].end();
            if (!unanimousTop) continue;
            const double gap = linf_distance(f_pt, q);
            if (gap > match_tol) {
                fail(sample, "iii", q, f_pt, gap, std::nullopt);
                return report;
            }
        }
    }
    report.notes = "clauses (i)-(iii) and the base requirement hold on " +
                   std::to_string(report.samples_checked) + " profile pairs";
    return report;
}

}  // namespace beliefmkt
