#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "beliefmkt/core.hpp"

namespace beliefmkt {

using Rng = std::mt19937_64;

/// 53-bit uniform in [0,1). Drawn straight from the engine output so the
/// stream is identical across standard libraries and platforms.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Flat Dirichlet draw (uniform over the simplex) via normalized
/// exponentials.
inline Belief random_belief(Rng& rng, std::size_t dim) {
    std::vector<double> probs(dim);
    for (double& p : probs) {
        double u = uniform01(rng);
        while (u <= 0.0) u = uniform01(rng);
        p = -std::log(u);
    }
    return make_belief(std::move(probs));
}

/// Uniform simplex draw squeezed so that every entry is at least `floor`.
inline Belief random_interior_belief(Rng& rng, std::size_t dim,
                                     double floor = 0.05) {
    Belief b = random_belief(rng, dim);
    std::vector<double> probs(dim);
    const double scale = 1.0 - static_cast<double>(dim) * floor;
    for (std::size_t s = 0; s < dim; ++s) probs[s] = floor + scale * b[s];
    return make_belief(std::move(probs));
}

inline BeliefProfile random_profile(Rng& rng, std::size_t n, std::size_t dim) {
    std::vector<Belief> beliefs;
    beliefs.reserve(n);
    for (std::size_t i = 0; i < n; ++i) beliefs.push_back(random_belief(rng, dim));
    return BeliefProfile(std::move(beliefs));
}

inline BeliefProfile random_interior_profile(Rng& rng, std::size_t n,
                                             std::size_t dim,
                                             double floor = 0.05) {
    std::vector<Belief> beliefs;
    beliefs.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        beliefs.push_back(random_interior_belief(rng, dim, floor));
    return BeliefProfile(std::move(beliefs));
}

/// Mixing weights in [0,1]^n. With probability ~1/4 a coordinate snaps to
/// an exact endpoint, which is where invariance violations tend to live.
inline std::vector<double> random_lambdas(Rng& rng, std::size_t n) {
    std::vector<double> lambdas(n);
    for (double& l : lambdas) {
        const double u = uniform01(rng);
        if (u < 0.125) l = 0.0;
        else if (u < 0.25) l = 1.0;
        else l = uniform01(rng);
    }
    return lambdas;
}

}  // namespace beliefmkt
