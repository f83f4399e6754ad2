#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace beliefmkt {

/// Error codes for every failure mode the library reports. Carried by
/// Error so callers can branch on the condition instead of parsing text.
enum class errc {
    negative_mass,
    zero_mass,
    dimension_too_small,
    dimension_mismatch,
    lambda_out_of_range,
    size_overflow,
    no_convergence,
    dead_state,
    boundary_portfolio,
    even_agents_for_median,
    invalid_argument,
};

const char* errc_name(errc code);

class Error : public std::runtime_error {
  public:
    Error(errc code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    errc code() const { return code_; }

  private:
    errc code_;
};

/// Shared solver knobs. abs_tol doubles as the belief-equality band.
struct Tolerance {
    double abs_tol = 1e-9;
    double rel_tol = 1e-9;
    int max_iter = 500000;

    void validate() const;
};

/// A point of the probability simplex over states. Entries are clamped
/// of negative dust and renormalized to exact unit sum at construction,
/// so downstream equality tests only ever need an absolute band.
class Belief {
  public:
    explicit Belief(std::vector<double> raw);

    const std::vector<double>& probs() const { return probs_; }
    double operator[](std::size_t s) const { return probs_[s]; }
    std::size_t dim() const { return probs_.size(); }

  private:
    std::vector<double> probs_;
};

/// Validating factory: clamps entries in [-1e-12, 0) to zero, rejects
/// anything more negative, and renormalizes. Idempotent.
Belief make_belief(std::vector<double> raw);

double linf_distance(const Belief& a, const Belief& b);

/// Belief equality is L-infinity distance within the band (default 1e-9).
bool approx_equal(const Belief& a, const Belief& b, double abs_tol = 1e-9);

/// (1-lambda)*a + lambda*b. lambda must lie in [0,1].
Belief mix(const Belief& a, const Belief& b, double lambda);

/// Ordered list of equal-dimension beliefs, one per agent.
class BeliefProfile {
  public:
    explicit BeliefProfile(std::vector<Belief> beliefs);

    std::size_t size() const { return beliefs_.size(); }
    std::size_t dim() const { return beliefs_.front().dim(); }
    const Belief& operator[](std::size_t i) const { return beliefs_[i]; }
    const std::vector<Belief>& beliefs() const { return beliefs_; }

    /// Copy with agent i's belief replaced (unilateral deviation helper).
    BeliefProfile with(std::size_t i, Belief b) const;

    auto begin() const { return beliefs_.begin(); }
    auto end() const { return beliefs_.end(); }

  private:
    std::vector<Belief> beliefs_;
};

bool approx_equal(const BeliefProfile& a, const BeliefProfile& b,
                  double abs_tol = 1e-9);

/// All beliefs with entries k/resolution, enumerated in lexicographic
/// order of the integer compositions. Count is C(resolution+dim-1, dim-1);
/// throws size_overflow beyond the cap.
std::vector<Belief> simplex_grid(int dim, int resolution,
                                 std::size_t cap = 5000000);

/// Number of grid points simplex_grid would produce (exact, overflow-checked).
std::size_t simplex_grid_size(int dim, int resolution,
                              std::size_t cap = 5000000);

}  // namespace beliefmkt
