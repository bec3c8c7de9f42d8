#include "ranklab/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ranklab/errors.hpp"

namespace ranklab {

PosteriorDraws draw_posteriors(std::span<const PosteriorGrid> posts, std::size_t n, RngStream& rng) {
  if (n < 100) throw ParameterDomainError("Monte Carlo loss estimates need n >= 100");
  PosteriorDraws d;
  d.n = n;
  d.p = posts.size();
  d.values.resize(n * d.p);
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t i = 0; i < d.p; ++i)
      d.values[s * d.p + i] =
          posts[i].is_point_mass() ? posts[i].nodes[0] : posterior_quantile(posts[i], rng.uniform());
  return d;
}

LossEstimate evaluate_loss(const Ranking& perm, const PosteriorDraws& draws, const PairwiseLoss& l,
                           ScalingRule s) {
  if (perm.size() != draws.p) throw ShapeError("ranking size does not match the draws");
  const auto order = perm.order();
  const double scale = scale_factor(s, std::max<std::size_t>(draws.p, 1));
  // Welford accumulation over draws.
  double mean = 0.0, m2 = 0.0;
  for (std::size_t k = 0; k < draws.n; ++k) {
    double loss = 0.0;
    for (std::size_t a = 0; a < order.size(); ++a)
      for (std::size_t b = a + 1; b < order.size(); ++b)
        loss += pair_loss(l, draws.at(k, order[a]), draws.at(k, order[b]));
    loss *= scale;
    const double delta = loss - mean;
    mean += delta / static_cast<double>(k + 1);
    m2 += delta * (loss - mean);
  }
  LossEstimate e;
  e.n = draws.n;
  e.mean = mean;
  e.std_error = draws.n > 1 ? std::sqrt(m2 / static_cast<double>(draws.n - 1) / draws.n) : 0.0;
  return e;
}

LossEstimate expected_loss_mc(const Ranking& perm, std::span<const PosteriorGrid> posts,
                              const PairwiseLoss& l, ScalingRule s, std::size_t n, RngStream& rng) {
  if (perm.size() != posts.size()) throw ShapeError("ranking size does not match the posteriors");
  return evaluate_loss(perm, draw_posteriors(posts, n, rng), l, s);
}

BayesOptimum bayes_optimal_bruteforce(const PosteriorDraws& draws, const PairwiseLoss& l,
                                      ScalingRule s) {
  const std::size_t p = draws.p;
  if (p > kMaxOracleUnits)
    throw SizeLimitError("exhaustive search supports at most " + std::to_string(kMaxOracleUnits) +
                         " units, got " + std::to_string(p));
  if (p == 0) throw ShapeError("exhaustive search needs at least one unit");

  // M[i][j]: mean over draws of l(theta_i, theta_j). The expected loss of a
  // ranking is the sum of M over its ordered pairs, so every candidate is
  // scored on the same draws.
  std::vector<double> m(p * p, 0.0);
  for (std::size_t k = 0; k < draws.n; ++k)
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = 0; j < p; ++j)
        if (i != j) m[i * p + j] += pair_loss(l, draws.at(k, i), draws.at(k, j));
  for (auto& v : m) v /= static_cast<double>(draws.n);

  std::vector<std::size_t> order(p);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<std::size_t> best_order = order;
  double best = std::numeric_limits<double>::infinity();
  std::size_t count = 0;
  do {
    ++count;
    double total = 0.0;
    for (std::size_t a = 0; a < p; ++a)
      for (std::size_t b = a + 1; b < p; ++b) total += m[order[a] * p + order[b]];
    if (total < best) {
      best = total;
      best_order = order;
    }
  } while (std::next_permutation(order.begin(), order.end()));

  BayesOptimum out;
  out.ranking = Ranking::from_order(best_order);
  out.loss = evaluate_loss(out.ranking, draws, l, s);
  out.permutations = count;
  return out;
}

BayesOptimum bayes_optimal_bruteforce(std::span<const PosteriorGrid> posts, const PairwiseLoss& l,
                                      ScalingRule s, std::size_t n, RngStream& rng) {
  if (posts.size() > kMaxOracleUnits)
    throw SizeLimitError("exhaustive search supports at most " + std::to_string(kMaxOracleUnits) +
                         " units, got " + std::to_string(posts.size()));
  return bayes_optimal_bruteforce(draw_posteriors(posts, n, rng), l, s);
}

}  // namespace ranklab

#include "ranklab/rankers.hpp"

namespace ranklab {

double OracleComparison::agreement_rate() const {
  if (cases.empty()) return 1.0;
  const auto n = std::count_if(cases.begin(), cases.end(), [](const auto& c) { return c.agree; });
  return static_cast<double>(n) / static_cast<double>(cases.size());
}

std::size_t OracleComparison::beyond(double k) const {
  return static_cast<std::size_t>(std::count_if(cases.begin(), cases.end(), [&](const auto& c) {
    return !c.agree && c.gap > k * c.combined_se;
  }));
}

OracleComparison compare_posterior_mean_to_oracle(std::size_t p, std::size_t instances,
                                                  std::uint64_t seed, std::size_t n_mc) {
  if (p < 2) throw ParameterDomainError("oracle comparison needs p >= 2");
  if (p > kMaxOracleUnits)
    throw SizeLimitError("exhaustive search supports at most " + std::to_string(kMaxOracleUnits) +
                         " units, got " + std::to_string(p));
  const PriorSpec prior = NormalPrior{0.0, 1.0};
  OracleComparison out;
  out.p = p;
  for (std::size_t k = 0; k < instances; ++k) {
    RngStream rng = RngStream::derive(seed, {p, k});
    std::vector<UnitData> units(p);
    const auto theta = sample(prior, rng, p);
    for (std::size_t i = 0; i < p; ++i) {
      const double sigma = 0.1 + 0.4 * rng.uniform();
      units[i] = UnitData{theta[i] + sigma * rng.normal(), sigma, i};
    }
    const auto posts = compute_posteriors(units, prior, NormalError{});
    const auto draws = draw_posteriors(posts, n_mc, rng);
    const auto best = bayes_optimal_bruteforce(draws, HingeDiff{}, ScalingRule::Total);
    const Ranking pm = rank_posterior_mean(units, posts);
    OracleComparisonCase c;
    c.instance = k;
    c.agree = pm == best.ranking;
    if (!c.agree) {
      const auto pm_loss = evaluate_loss(pm, draws, HingeDiff{}, ScalingRule::Total);
      c.gap = pm_loss.mean - best.loss.mean;
      c.combined_se = std::hypot(pm_loss.std_error, best.loss.std_error);
    }
    out.cases.push_back(c);
  }
  return out;
}

}  // namespace ranklab
