#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ranklab/losses.hpp"
#include "ranklab/posterior.hpp"
#include "ranklab/random.hpp"

namespace ranklab {

struct LossEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
};

/// n joint posterior draws; row s holds one value per unit.
struct PosteriorDraws {
  std::size_t n = 0;
  std::size_t p = 0;
  std::vector<double> values;  // row-major n x p

  double at(std::size_t s, std::size_t unit) const { return values[s * p + unit]; }
};

PosteriorDraws draw_posteriors(std::span<const PosteriorGrid> posts, std::size_t n, RngStream& rng);

/// Mean and standard error of the scaled additive loss of perm over the draws.
LossEstimate evaluate_loss(const Ranking& perm, const PosteriorDraws& draws, const PairwiseLoss& l,
                           ScalingRule s);

LossEstimate expected_loss_mc(const Ranking& perm, std::span<const PosteriorGrid> posts,
                              const PairwiseLoss& l, ScalingRule s, std::size_t n, RngStream& rng);

struct BayesOptimum {
  Ranking ranking;
  LossEstimate loss;
  std::size_t permutations = 0;
};

inline constexpr std::size_t kMaxOracleUnits = 8;

/// Exhaustive search over all p! rankings using one shared set of draws.
BayesOptimum bayes_optimal_bruteforce(const PosteriorDraws& draws, const PairwiseLoss& l,
                                      ScalingRule s);
BayesOptimum bayes_optimal_bruteforce(std::span<const PosteriorGrid> posts, const PairwiseLoss& l,
                                      ScalingRule s, std::size_t n, RngStream& rng);

}  // namespace ranklab

namespace ranklab {

struct OracleComparisonCase {
  std::size_t instance = 0;
  bool agree = false;
  double gap = 0.0;          // loss(posterior mean ranking) - loss(oracle ranking)
  double combined_se = 0.0;  // sqrt(se_pm^2 + se_oracle^2)
};

struct OracleComparison {
  std::size_t p = 0;
  std::vector<OracleComparisonCase> cases;
  double agreement_rate() const;
  /// Disagreements whose gap exceeds `k` combined standard errors.
  std::size_t beyond(double k) const;
};

/// Random instances (Normal(0,1) truth and prior, normal errors with sigma
/// uniform on [0.1, 0.5]); compares posterior-mean ranking with exhaustive
/// search under the hinge loss using n_mc shared posterior draws.
OracleComparison compare_posterior_mean_to_oracle(std::size_t p, std::size_t instances,
                                                  std::uint64_t seed, std::size_t n_mc = 100000);

}  // namespace ranklab
