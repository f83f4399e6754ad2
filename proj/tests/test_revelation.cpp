#include "doctest.h"

#include <cmath>
#include <limits>

#include "beliefmkt/random.hpp"
#include "beliefmkt/revelation.hpp"
#include "test_oracles.hpp"

using namespace beliefmkt;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

GameSpec pool_log_game(BeliefProfile truths) {
    const std::size_t dim = truths.dim();
    return GameSpec{std::move(truths), AggregationRule::linear_pool(),
                    MarketSpec::uniform(dim), UtilityIndex::log_utility()};
}

GameSpec two_state_game(double p_a, double p_b) {
    return pool_log_game(BeliefProfile(
        {Belief({p_a, 1.0 - p_a}), Belief({p_b, 1.0 - p_b})}));
}

ReportProfile reports2(double r_a, double r_b) {
    return ReportProfile(
        {Belief({r_a, 1.0 - r_a}), Belief({r_b, 1.0 - r_b})});
}

}  // namespace

TEST_CASE("payoff is expected log of the pooled report") {
    const GameSpec sym = two_state_game(0.5, 0.5);
    CHECK(payoff(sym, reports2(0.5, 0.5), 0) ==
          doctest::Approx(std::log(0.5)));

    // Equilibrium reports of the (0.3, ...) instance: aggregate (0.4, 0.6).
    const GameSpec game = two_state_game(0.3, 0.7);
    const double u = payoff(game, reports2(0.0, 0.8), 0);
    CHECK(u == doctest::Approx(0.3 * std::log(0.4) + 0.7 * std::log(0.6))
                   .epsilon(1e-12));

    // Aggregate kills state 1 while the agent believes in it.
    CHECK(payoff(game, reports2(0.0, 0.0), 0) == -kInf);
}

TEST_CASE("two-state best responses follow the closed form") {
    const GameSpec game_a = two_state_game(0.6, 0.5);
    CHECK(best_response(game_a, reports2(0.6, 0.5), 0)[0] ==
          doctest::Approx(0.7).epsilon(1e-12));

    const GameSpec game_b = two_state_game(0.3, 0.5);
    CHECK(best_response(game_b, reports2(0.3, 0.9), 0)[0] == 0.0);

    const GameSpec game_c = two_state_game(0.8, 0.5);
    CHECK(best_response(game_c, reports2(0.8, 0.1), 0)[0] == 1.0);

    // Requires linear pool + log utility.
    GameSpec wrong = game_a;
    wrong.utility = UtilityIndex::crra(2.0);
    CHECK_THROWS_AS(best_response(wrong, reports2(0.6, 0.5), 0), Error);
}

TEST_CASE("three-state best response beats the grid oracle") {
    Rng rng(51);
    for (int k = 0; k < 5; ++k) {
        const BeliefProfile truths = random_interior_profile(rng, 3, 3);
        const GameSpec game = pool_log_game(truths);
        const ReportProfile reports = truths;
        for (std::size_t i = 0; i < 3; ++i) {
            const Belief reply = best_response(game, reports, i);
            const double at_reply = payoff(game, reports.with(i, reply), i);
            double best_grid = -kInf;
            for (const Belief& g : simplex_grid(3, 400)) {
                const double v = payoff(game, reports.with(i, g), i);
                best_grid = std::max(best_grid, v);
            }
            CHECK(at_reply >= best_grid - 1e-9);
            CHECK(std::abs(at_reply - best_grid) <= 1e-4);
        }
    }
}

TEST_CASE("best-response dynamics reproduce the example equilibria") {
    const GameSpec low = two_state_game(0.3, 0.4);
    const DynamicsResult low_run = br_dynamics(low, low.truths, 1000);
    CHECK(low_run.converged);
    CHECK(low_run.aggregate[0] == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(low_run.reports[0][0] == 0.0);
    CHECK(low_run.reports[1][0] == doctest::Approx(0.8).epsilon(1e-12));

    const GameSpec split = two_state_game(0.3, 0.8);
    const DynamicsResult split_run = br_dynamics(split, split.truths, 1000);
    CHECK(split_run.aggregate[0] == doctest::Approx(0.5).epsilon(1e-12));

    const GameSpec tied = two_state_game(0.7, 0.7);
    const DynamicsResult tied_run = br_dynamics(tied, tied.truths, 1000);
    CHECK(tied_run.converged);
    CHECK(tied_run.rounds == 0);
    CHECK(tied_run.aggregate[0] == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("equilibrium aggregate is independent of the starting point") {
    Rng rng(52);
    for (int k = 0; k < 5; ++k) {
        const double p_a = uniform01(rng), p_b = uniform01(rng);
        const GameSpec game = two_state_game(p_a, p_b);
        const double want = example1_aggregate(p_a, p_b);
        for (int start = 0; start < 20; ++start) {
            const DynamicsResult run = br_dynamics(
                game, reports2(uniform01(rng), uniform01(rng)), 5000);
            CHECK(run.converged);
            CHECK(std::abs(run.aggregate[0] - want) <= 1e-6);
        }
    }
}

TEST_CASE("market equilibrium maps to game reports on the remark instance") {
    const BeliefProfile truths(
        {make_belief({0.5, 0.5, 0.0}), make_belief({0.0, 0.5, 0.5})});
    const MarketNash nash = nash_from_parimutuel(truths);
    CHECK(approx_equal(nash.reports[0],
                       make_belief({2.0 / 3.0, 1.0 / 3.0, 0.0}), 1e-7));
    CHECK(approx_equal(nash.reports[1],
                       make_belief({0.0, 1.0 / 3.0, 2.0 / 3.0}), 1e-7));
    CHECK(approx_equal(nash.aggregate, make_belief({1, 1, 1}), 1e-7));
    CHECK(linf_distance(nash.aggregate, nash.equilibrium.price) <= 1e-9);
}

TEST_CASE("market map at unanimity and on the two-state median") {
    const Belief p = make_belief({0.3, 0.3, 0.4});
    const MarketNash unanimity =
        nash_from_parimutuel(BeliefProfile({p, p, p}));
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(approx_equal(unanimity.reports[i], p, 1e-7));

    const MarketNash two = nash_from_parimutuel(
        BeliefProfile({make_belief({0.3, 0.7}), make_belief({0.4, 0.6})}));
    CHECK(two.aggregate[0] == doctest::Approx(0.4).epsilon(1e-7));
}

TEST_CASE("verify_nash separates equilibria from honest reporting") {
    const GameSpec game = two_state_game(0.3, 0.4);
    const NashReport at_eq = verify_nash(game, reports2(0.0, 0.8));
    CHECK(at_eq.max_gap() <= 1e-12);
    CHECK(at_eq.is_nash(1e-9));

    const NashReport honest = verify_nash(game, reports2(0.3, 0.4));
    // Agent b's closed-form reply to 0.3 is 0.5, not 0.4.
    const double gain = 0.4 * std::log(0.4) + 0.6 * std::log(0.6) -
                        (0.4 * std::log(0.35) + 0.6 * std::log(0.65));
    CHECK(honest.gaps[1] == doctest::Approx(gain).epsilon(1e-9));
    CHECK_FALSE(honest.is_nash(1e-9));
}

TEST_CASE("market-made equilibria pass the game-side check") {
    Rng rng(53);
    for (int k = 0; k < 12; ++k) {
        const std::size_t n = 2 + rng() % 4;
        const std::size_t dim = 2 + rng() % 3;
        const BeliefProfile truths = random_profile(rng, n, dim);
        const MarketNash nash = nash_from_parimutuel(truths);
        const GameSpec game = pool_log_game(truths);
        const NashReport rep = verify_nash(game, nash.reports);
        CHECK(rep.max_gap() <= 1e-6);
    }
}

TEST_CASE("dynamics fixed points map back to market equilibria") {
    Rng rng(54);
    for (int k = 0; k < 12; ++k) {
        const std::size_t n = 2;
        const BeliefProfile truths = random_profile(rng, n, 2);
        const GameSpec game = pool_log_game(truths);
        const DynamicsResult run = br_dynamics(game, truths, 5000);
        REQUIRE(run.converged);

        // rho = mean report, x_is = report share of the aggregate mass.
        const Belief price = run.aggregate;
        std::vector<std::vector<double>> alloc(n, std::vector<double>(2));
        std::vector<double> lambdas(n);
        for (std::size_t i = 0; i < n; ++i) {
            double mass_p = 0.0, mass_agg = 0.0;
            for (std::size_t s = 0; s < 2; ++s) {
                double col = 0.0;
                for (std::size_t j = 0; j < n; ++j) col += run.reports[j][s];
                alloc[i][s] = col > 0.0 ? run.reports[i][s] / col : 0.0;
                if (run.reports[i][s] > 1e-12) {
                    mass_p += truths[i][s];
                    mass_agg += price[s];
                }
            }
            lambdas[i] = mass_p / mass_agg;
        }
        const ParimutuelEquilibrium eq{price, alloc, lambdas, 0.0, 0};
        CHECK(verify_foc(eq, truths).max_residual() <= 1e-6);
    }
}

TEST_CASE("payoff is concave along own-report segments") {
    Rng rng(55);
    const BeliefProfile truths = random_interior_profile(rng, 3, 3);
    const GameSpec game = pool_log_game(truths);
    for (int k = 0; k < 40; ++k) {
        const std::size_t i = rng() % 3;
        ReportProfile base = random_profile(rng, 3, 3);
        const Belief r1 = random_belief(rng, 3);
        const Belief r2 = random_belief(rng, 3);
        const double at_mid = payoff(game, base.with(i, mix(r1, r2, 0.5)), i);
        const double ends = 0.5 * (payoff(game, base.with(i, r1), i) +
                                   payoff(game, base.with(i, r2), i));
        if (std::isfinite(ends)) CHECK(at_mid >= ends - 1e-12);
    }
}
