#include "beliefmkt/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>

namespace beliefmkt {

namespace {

constexpr double kDustFloor = -1e-12;

}  // namespace

const char* errc_name(errc code) {
    switch (code) {
        case errc::negative_mass: return "NegativeMass";
        case errc::zero_mass: return "ZeroMass";
        case errc::dimension_too_small: return "DimensionTooSmall";
        case errc::dimension_mismatch: return "DimensionMismatch";
        case errc::lambda_out_of_range: return "LambdaOutOfRange";
        case errc::size_overflow: return "SizeOverflow";
        case errc::no_convergence: return "NoConvergence";
        case errc::dead_state: return "DeadState";
        case errc::boundary_portfolio: return "BoundaryPortfolio";
        case errc::even_agents_for_median: return "EvenAgentsForMedian";
        case errc::invalid_argument: return "InvalidArgument";
    }
    return "UnknownError";
}

void Tolerance::validate() const {
    if (!(abs_tol > 0.0))
        throw Error(errc::invalid_argument, "Tolerance.abs_tol must be > 0");
    if (!(rel_tol >= 0.0))
        throw Error(errc::invalid_argument, "Tolerance.rel_tol must be >= 0");
    if (max_iter < 1)
        throw Error(errc::invalid_argument, "Tolerance.max_iter must be >= 1");
}

Belief::Belief(std::vector<double> raw) : probs_(std::move(raw)) {
    if (probs_.size() < 2)
        throw Error(errc::dimension_too_small,
                    "a belief needs at least two states, got " +
                        std::to_string(probs_.size()));
    double sum = 0.0;
    for (double& p : probs_) {
        if (!(p >= kDustFloor)) {  // also rejects NaN
            std::ostringstream msg;
            msg << "belief entry " << p << " below -1e-12";
            throw Error(errc::negative_mass, msg.str());
        }
        if (p < 0.0) p = 0.0;
        sum += p;
    }
    if (!(sum > 0.0))
        throw Error(errc::zero_mass, "belief entries sum to zero");
    std::size_t largest = 0;
    for (std::size_t s = 0; s < probs_.size(); ++s) {
        probs_[s] /= sum;
        if (probs_[s] > probs_[largest]) largest = s;
    }
    // Push the rounding residual into the largest entry. Left-to-right
    // summation can make an exact 1.0 unreachable, so settle for within
    // an ulp after a few passes.
    for (int pass = 0; pass < 4; ++pass) {
        double total = 0.0;
        for (double p : probs_) total += p;
        if (total == 1.0) break;
        probs_[largest] += 1.0 - total;
    }
}

Belief make_belief(std::vector<double> raw) { return Belief(std::move(raw)); }

double linf_distance(const Belief& a, const Belief& b) {
    if (a.dim() != b.dim())
        throw Error(errc::dimension_mismatch,
                    "beliefs have dimensions " + std::to_string(a.dim()) +
                        " and " + std::to_string(b.dim()));
    double d = 0.0;
    for (std::size_t s = 0; s < a.dim(); ++s)
        d = std::max(d, std::abs(a[s] - b[s]));
    return d;
}

bool approx_equal(const Belief& a, const Belief& b, double abs_tol) {
    return linf_distance(a, b) <= abs_tol;
}

Belief mix(const Belief& a, const Belief& b, double lambda) {
    if (!(lambda >= 0.0 && lambda <= 1.0))
        throw Error(errc::lambda_out_of_range,
                    "mixing weight " + std::to_string(lambda) +
                        " outside [0,1]");
    if (a.dim() != b.dim())
        throw Error(errc::dimension_mismatch,
                    "cannot mix beliefs of dimensions " +
                        std::to_string(a.dim()) + " and " +
                        std::to_string(b.dim()));
    std::vector<double> out(a.dim());
    for (std::size_t s = 0; s < a.dim(); ++s)
        out[s] = (1.0 - lambda) * a[s] + lambda * b[s];
    return Belief(std::move(out));
}

BeliefProfile::BeliefProfile(std::vector<Belief> beliefs)
    : beliefs_(std::move(beliefs)) {
    if (beliefs_.empty())
        throw Error(errc::invalid_argument, "profile needs at least one agent");
    const std::size_t d = beliefs_.front().dim();
    for (const Belief& b : beliefs_)
        if (b.dim() != d)
            throw Error(errc::dimension_mismatch,
                        "profile mixes beliefs of different dimensions");
}

BeliefProfile BeliefProfile::with(std::size_t i, Belief b) const {
    std::vector<Belief> copy = beliefs_;
    copy.at(i) = std::move(b);
    return BeliefProfile(std::move(copy));
}

bool approx_equal(const BeliefProfile& a, const BeliefProfile& b,
                  double abs_tol) {
    if (a.size() != b.size() || a.dim() != b.dim()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!approx_equal(a[i], b[i], abs_tol)) return false;
    return true;
}

std::size_t simplex_grid_size(int dim, int resolution, std::size_t cap) {
    if (dim < 2)
        throw Error(errc::dimension_too_small, "simplex_grid needs dim >= 2");
    if (resolution < 1)
        throw Error(errc::invalid_argument, "simplex_grid needs resolution >= 1");
    // C(resolution+dim-1, dim-1) with early bail-out past the cap.
    std::uint64_t count = 1;
    for (int k = 1; k < dim; ++k) {
        count = count * static_cast<std::uint64_t>(resolution + k) /
                static_cast<std::uint64_t>(k);
        if (count > cap)
            throw Error(errc::size_overflow,
                        "simplex grid would exceed cap of " +
                            std::to_string(cap) + " points");
    }
    return static_cast<std::size_t>(count);
}

std::vector<Belief> simplex_grid(int dim, int resolution, std::size_t cap) {
    const std::size_t count = simplex_grid_size(dim, resolution, cap);
    std::vector<Belief> grid;
    grid.reserve(count);
    std::vector<int> parts(static_cast<std::size_t>(dim), 0);
    // Enumerate compositions of `resolution` into `dim` parts, first
    // coordinate slowest.
    auto emit = [&] {
        std::vector<double> probs(parts.size());
        for (std::size_t s = 0; s < parts.size(); ++s)
            probs[s] = static_cast<double>(parts[s]) /
                       static_cast<double>(resolution);
        grid.push_back(Belief(std::move(probs)));
    };
    auto recurse = [&](auto&& self, std::size_t slot, int remaining) -> void {
        if (slot + 1 == parts.size()) {
            parts[slot] = remaining;
            emit();
            return;
        }
        for (int k = 0; k <= remaining; ++k) {
            parts[slot] = k;
            self(self, slot + 1, remaining - k);
        }
    };
    recurse(recurse, 0, resolution);
    return grid;
}

}  // namespace beliefmkt
