#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ranklab/distributions.hpp"
#include "ranklab/losses.hpp"
#include "ranklab/posterior.hpp"
#include "ranklab/random.hpp"

namespace ranklab {

struct UnitData {
  double x = 0.0;      // point estimate
  double sigma = 0.0;  // known error scale, >= 0
  std::size_t id = 0;  // tie-break key
};

struct ValueRank {};
struct PValueRank {
  double theta0 = 0.0;
};
struct PosteriorMeanRank {};
struct PERRank {};
struct FootruleRank {
  std::size_t mc_samples = 4000;
};

/// The prior used by the Bayesian rankers is supplied when the ranker is
/// applied, so one spec can be reused with a prior fitted per instance.
using RankerSpec = std::variant<ValueRank, PValueRank, PosteriorMeanRank, PERRank, FootruleRank>;

/// Short stable name: value, pvalue, posterior_mean, per, footrule.
std::string ranker_name(const RankerSpec& spec);
bool needs_posteriors(const RankerSpec& spec);

std::vector<PosteriorGrid> compute_posteriors(std::span<const UnitData> units, const PriorSpec& prior,
                                              const ErrorModel& error,
                                              const PosteriorOptions& options = {});

/// Descending by x, ties by id.
Ranking rank_value(std::span<const UnitData> units);

/// One-sided p-values P(X >= x | theta0, sigma); sigma = 0 gives 0, 1/2 or 1.
std::vector<double> pvalues(std::span<const UnitData> units, double theta0, const ErrorModel& error);
/// Ascending p-value (compared through the standardised statistic), ties by id.
Ranking rank_pvalue(std::span<const UnitData> units, double theta0, const ErrorModel& error);

Ranking rank_posterior_mean(std::span<const UnitData> units, const PriorSpec& prior,
                            const ErrorModel& error);
Ranking rank_posterior_mean(std::span<const UnitData> units, std::span<const PosteriorGrid> posts);

/// r_i = sum over j != i of P(Theta_i < Theta_j): the expected number of units ranked above i.
std::vector<double> per_scores(std::span<const PosteriorGrid> posts);
Ranking rank_per(std::span<const UnitData> units, const PriorSpec& prior, const ErrorModel& error);
Ranking rank_per(std::span<const UnitData> units, std::span<const PosteriorGrid> posts);

/// Bayes ranking for the footrule loss: Monte Carlo rank distributions, then
/// an exact assignment of units to positions minimising E|k - tau(i)|.
Ranking rank_footrule(std::span<const UnitData> units, const PriorSpec& prior,
                      const ErrorModel& error, std::size_t mc_samples, RngStream& rng);
Ranking rank_footrule(std::span<const UnitData> units, std::span<const PosteriorGrid> posts,
                      std::size_t mc_samples, RngStream& rng);

/// Apply a ranker. `posts` may be empty, in which case posteriors are computed
/// on demand from (prior, error).
Ranking apply_ranker(const RankerSpec& spec, std::span<const UnitData> units, const PriorSpec& prior,
                     const ErrorModel& error, std::span<const PosteriorGrid> posts, RngStream& rng);

}  // namespace ranklab
