#include "ranklab/rankers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ranklab/assignment.hpp"
#include "ranklab/errors.hpp"

namespace ranklab {

namespace {

// Descending by key, ties by unit id.
Ranking sort_by_key_desc(std::span<const UnitData> units, std::span<const double> key) {
  std::vector<std::size_t> order(units.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (key[a] != key[b]) return key[a] > key[b];
    return units[a].id < units[b].id;
  });
  return Ranking::from_order(order);
}

void check_units(std::span<const UnitData> units) {
  for (const auto& u : units) {
    if (!(u.sigma >= 0.0) || !std::isfinite(u.sigma))
      throw ParameterDomainError("unit sigma must be finite and >= 0");
    if (!std::isfinite(u.x)) throw ParameterDomainError("unit x must be finite");
  }
}

void check_posts(std::span<const UnitData> units, std::span<const PosteriorGrid> posts) {
  if (units.size() != posts.size()) throw ShapeError("one posterior per unit is required");
}

}  // namespace

std::string ranker_name(const RankerSpec& spec) {
  switch (spec.index()) {
    case 0: return "value";
    case 1: return "pvalue";
    case 2: return "posterior_mean";
    case 3: return "per";
    default: return "footrule";
  }
}

bool needs_posteriors(const RankerSpec& spec) {
  return std::holds_alternative<PosteriorMeanRank>(spec) || std::holds_alternative<PERRank>(spec) ||
         std::holds_alternative<FootruleRank>(spec);
}

std::vector<PosteriorGrid> compute_posteriors(std::span<const UnitData> units, const PriorSpec& prior,
                                              const ErrorModel& error,
                                              const PosteriorOptions& options) {
  check_units(units);
  std::vector<PosteriorGrid> out;
  out.reserve(units.size());
  for (const auto& u : units) out.push_back(posterior(prior, error, u.x, u.sigma, options));
  return out;
}

Ranking rank_value(std::span<const UnitData> units) {
  std::vector<double> key(units.size());
  for (std::size_t i = 0; i < units.size(); ++i) key[i] = units[i].x;
  return sort_by_key_desc(units, key);
}

std::vector<double> pvalues(std::span<const UnitData> units, double theta0, const ErrorModel& error) {
  check_units(units);
  std::vector<double> out(units.size());
  for (std::size_t i = 0; i < units.size(); ++i) {
    const auto& u = units[i];
    if (u.sigma == 0.0)
      out[i] = u.x > theta0 ? 0.0 : (u.x < theta0 ? 1.0 : 0.5);
    else
      out[i] = survival(error, u.x - theta0, u.sigma);
  }
  return out;
}

Ranking rank_pvalue(std::span<const UnitData> units, double theta0, const ErrorModel& /*error*/) {
  check_units(units);
  // Both error families are location-scale with a decreasing survival
  // function, so a larger standardised statistic means a smaller p-value;
  // comparing statistics avoids ties from p-values underflowing to 0.
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> z(units.size());
  for (std::size_t i = 0; i < units.size(); ++i) {
    const auto& u = units[i];
    const double dev = u.x - theta0;
    z[i] = u.sigma > 0.0 ? dev / u.sigma : (dev > 0 ? kInf : (dev < 0 ? -kInf : 0.0));
  }
  return sort_by_key_desc(units, z);
}

Ranking rank_posterior_mean(std::span<const UnitData> units, const PriorSpec& prior,
                            const ErrorModel& error) {
  const auto posts = compute_posteriors(units, prior, error);
  return rank_posterior_mean(units, posts);
}

Ranking rank_posterior_mean(std::span<const UnitData> units, std::span<const PosteriorGrid> posts) {
  check_posts(units, posts);
  std::vector<double> key(units.size());
  for (std::size_t i = 0; i < units.size(); ++i) key[i] = posts[i].mean;
  return sort_by_key_desc(units, key);
}

std::vector<double> per_scores(std::span<const PosteriorGrid> posts) {
  const std::size_t p = posts.size();
  std::vector<double> r(p, 0.0);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = i + 1; j < p; ++j) {
      // P(Theta_i < Theta_j) pushes i down, its complement pushes j down.
      const double q = pairwise_less_prob(posts[i], posts[j]);
      r[i] += q;
      r[j] += 1.0 - q;
    }
  }
  return r;
}

Ranking rank_per(std::span<const UnitData> units, const PriorSpec& prior, const ErrorModel& error) {
  const auto posts = compute_posteriors(units, prior, error);
  return rank_per(units, posts);
}

Ranking rank_per(std::span<const UnitData> units, std::span<const PosteriorGrid> posts) {
  check_posts(units, posts);
  auto r = per_scores(posts);
  for (auto& v : r) v = -v;  // small expected rank first
  return sort_by_key_desc(units, r);
}

Ranking rank_footrule(std::span<const UnitData> units, const PriorSpec& prior,
                      const ErrorModel& error, std::size_t mc_samples, RngStream& rng) {
  const auto posts = compute_posteriors(units, prior, error);
  return rank_footrule(units, posts, mc_samples, rng);
}

Ranking rank_footrule(std::span<const UnitData> units, std::span<const PosteriorGrid> posts,
                      std::size_t mc_samples, RngStream& rng) {
  check_posts(units, posts);
  if (mc_samples < 1000) throw ParameterDomainError("footrule ranking needs at least 1000 samples");
  const std::size_t p = units.size();
  if (std::all_of(posts.begin(), posts.end(), [](const auto& g) { return g.is_point_mass(); }))
    return rank_value(units);

  // counts[i * p + k]: draws in which unit i holds true position k.
  std::vector<double> counts(p * p, 0.0);
  std::vector<double> draw(p);
  std::vector<std::size_t> order(p);
  for (std::size_t s = 0; s < mc_samples; ++s) {
    for (std::size_t i = 0; i < p; ++i)
      draw[i] = posts[i].is_point_mass() ? posts[i].nodes[0] : posterior_quantile(posts[i], rng.uniform());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (draw[a] != draw[b]) return draw[a] > draw[b];
      return units[a].id < units[b].id;
    });
    for (std::size_t k = 0; k < p; ++k) counts[order[k] * p + k] += 1.0;
  }
  std::vector<double> cost(p * p, 0.0);
  const double inv = 1.0 / static_cast<double>(mc_samples);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t k = 0; k < p; ++k) {
      double c = 0.0;
      for (std::size_t r = 0; r < p; ++r)
        c += counts[i * p + r] * std::abs(static_cast<double>(k) - static_cast<double>(r));
      cost[i * p + k] = c * inv;
    }
  const auto column = solve_assignment(cost, p);
  return Ranking::from_positions(column);
}

Ranking apply_ranker(const RankerSpec& spec, std::span<const UnitData> units, const PriorSpec& prior,
                     const ErrorModel& error, std::span<const PosteriorGrid> posts, RngStream& rng) {
  if (std::holds_alternative<ValueRank>(spec)) return rank_value(units);
  if (const auto* pv = std::get_if<PValueRank>(&spec)) return rank_pvalue(units, pv->theta0, error);
  std::vector<PosteriorGrid> own;
  if (posts.empty()) {
    own = compute_posteriors(units, prior, error);
    posts = own;
  }
  if (std::holds_alternative<PosteriorMeanRank>(spec)) return rank_posterior_mean(units, posts);
  if (std::holds_alternative<PERRank>(spec)) return rank_per(units, posts);
  return rank_footrule(units, posts, std::get<FootruleRank>(spec).mc_samples, rng);
}

}  // namespace ranklab
