#include "ranklab/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include <boost/math/tools/minima.hpp>

#include "ranklab/errors.hpp"
#include "ranklab/format.hpp"
#include "ranklab/quadrature.hpp"

namespace ranklab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kHalfPi = 0.5 * std::numbers::pi;
// Per-node mass below which leading/trailing nodes are dropped from the grid.
constexpr double kTrimMass = 1e-15;
// Log-density drop treated as "no mass left" at a truncation boundary.
constexpr double kBoundaryDrop = 45.0;

// Log prior density with per-call dispatch hoisted out of the hot loop.
std::function<double(double)> make_log_prior(const PriorSpec& prior) {
  validate(prior);
  if (const auto* n = std::get_if<NormalPrior>(&prior)) {
    const double mu = n->mean, inv = 0.5 / n->variance;
    const double c = -0.5 * std::log(2.0 * std::numbers::pi * n->variance);
    return [=](double t) { return c - (t - mu) * (t - mu) * inv; };
  }
  if (const auto* p = std::get_if<ParetoPrior>(&prior)) {
    const double lo = p->scale, a = p->shape;
    const double c = std::log(a) + a * std::log(lo);
    return [=](double t) { return t < lo ? -kInf : c - (a + 1.0) * std::log(t); };
  }
  if (std::holds_alternative<SuperLightPrior>(prior)) {
    const double c = -std::log(superlight_normalizer());
    return [=](double t) { return c - std::exp(0.25 * t * t); };
  }
  if (std::holds_alternative<AbsExpPrior>(prior)) {
    return [](double t) {
      const double a = std::abs(t);
      return a == 0.0 ? -kInf : std::log(a) - a - std::numbers::ln2;
    };
  }
  return [](double) { return 0.0; };
}

// log pi(anchor + e) = base + increment(e), with the increment computed without
// cancellation for the smooth, steep priors. Near a sharp likelihood the offsets e
// are far below the resolution of log pi itself, so a direct difference is noise.
// Returns an empty increment when the direct form is already adequate.
struct OffsetLogPrior {
  double base = 0.0;
  std::function<double(double)> increment;
};

OffsetLogPrior make_offset_log_prior(const PriorSpec& prior, double anchor) {
  if (const auto* n = std::get_if<NormalPrior>(&prior)) {
    const double c = anchor - n->mean, inv = 0.5 / n->variance;
    return {make_log_prior(prior)(anchor), [=](double e) { return -e * (2.0 * c + e) * inv; }};
  }
  if (std::holds_alternative<SuperLightPrior>(prior)) {
    const double scale = std::exp(0.25 * anchor * anchor);
    if (std::isfinite(scale))
      return {make_log_prior(prior)(anchor),
              [=](double e) { return -scale * std::expm1(0.25 * e * (2.0 * anchor + e)); }};
  }
  return {};
}

// Points where the prior has structure worth a panel boundary.
std::vector<double> prior_landmarks(const PriorSpec& prior) {
  if (const auto* n = std::get_if<NormalPrior>(&prior)) {
    const double s = std::sqrt(n->variance);
    return {n->mean - 4 * s, n->mean - 2 * s, n->mean - s, n->mean, n->mean + s,
            n->mean + 2 * s, n->mean + 4 * s};
  }
  if (const auto* p = std::get_if<ParetoPrior>(&prior)) {
    const double m = p->scale;
    return {m, 1.1 * m, 1.5 * m, 2 * m, 3 * m, 5 * m};
  }
  if (std::holds_alternative<AbsExpPrior>(prior)) return {-6, -4, -2, -1, -0.5, 0, 0.5, 1, 2, 4, 6};
  if (std::holds_alternative<SuperLightPrior>(prior)) return {-4, -2, -1, -0.5, 0, 0.5, 1, 2, 4};
  return {};
}

// A representative scale of the prior (used to seed level-set searches).
double prior_width(const PriorSpec& prior) {
  if (const auto* n = std::get_if<NormalPrior>(&prior)) return std::sqrt(n->variance);
  if (const auto* p = std::get_if<ParetoPrior>(&prior)) return p->scale / p->shape;
  if (std::holds_alternative<UniformImproperPrior>(prior)) return kInf;
  return 1.0;
}

double prior_mode_towards(const PriorSpec& prior, double x) {
  if (const auto* n = std::get_if<NormalPrior>(&prior)) return n->mean;
  if (const auto* p = std::get_if<ParetoPrior>(&prior)) return p->scale;
  if (std::holds_alternative<AbsExpPrior>(prior)) return x < 0 ? -1.0 : 1.0;
  if (std::holds_alternative<SuperLightPrior>(prior)) return 0.0;
  return x;
}

}  // namespace

double PosteriorGrid::cdf(double theta) const {
  if (theta < cell_edges.front()) return 0.0;
  if (theta >= cell_edges.back()) return 1.0;
  const auto it = std::upper_bound(cell_edges.begin(), cell_edges.end(), theta);
  const std::size_t k = static_cast<std::size_t>(it - cell_edges.begin()) - 1;
  const double w = cell_edges[k + 1] - cell_edges[k];
  if (!(w > 0.0)) return cell_cdf[k + 1];
  // cubic Hermite through (F, f) at both ends of the cell
  const double s = (theta - cell_edges[k]) / w;
  const double s2 = s * s, s3 = s2 * s;
  const double f = (2 * s3 - 3 * s2 + 1) * cell_cdf[k] + (s3 - 2 * s2 + s) * w * cell_density[k] +
                   (3 * s2 - 2 * s3) * cell_cdf[k + 1] + (s3 - s2) * w * cell_density[k + 1];
  return std::clamp(f, cell_cdf[k], cell_cdf[k + 1]);
}

PosteriorGrid point_mass_grid(double x, double log_norm_const) {
  PosteriorGrid g;
  g.nodes = {x};
  g.weights = {1.0};
  g.values = {1.0};
  g.mean = x;
  g.variance = 0.0;
  g.log_norm_const = log_norm_const;
  g.cell_edges = {x, x};
  g.cell_cdf = {0.0, 1.0};
  g.cell_density = {0.0, 0.0};
  return g;
}

PosteriorGrid posterior(const PriorSpec& prior, const ErrorModel& error, double x, double sigma,
                        double tol) {
  PosteriorOptions o;
  o.tol = tol;
  return posterior(prior, error, x, sigma, o);
}

PosteriorGrid posterior(const PriorSpec& prior, const ErrorModel& error, double x, double sigma,
                        const PosteriorOptions& options) {
  if (!std::isfinite(x)) throw DegeneratePosterior("observation x is not finite");
  if (!(sigma >= 0.0) || !std::isfinite(sigma))
    throw ParameterDomainError("sigma must be finite and >= 0, got " + format_number(sigma));
  if (!(options.tol > 0.0)) throw ParameterDomainError("posterior tolerance must be positive");

  const auto log_prior = make_log_prior(prior);
  if (sigma == 0.0) return point_mass_grid(x, log_prior(x));

  const bool quartic = std::holds_alternative<QuarticError>(error);
  const Support supp = support(prior);
  std::function<double(double)> prior_part = [&](double d) { return log_prior(x + d); };
  double prior_base = 0.0;
  // Offsets d = theta - x.
  const double d_lo = supp.lo - x, d_hi = supp.hi - x;
  const double log_sigma = std::log(sigma);
  const double norm_c = quartic ? std::log(std::numbers::sqrt2 / std::numbers::pi)
                                : -0.5 * std::log(2.0 * std::numbers::pi);
  auto log_h = [&](double d) {
    if (d < d_lo || d > d_hi) return -kInf;
    const double u = d / sigma;
    const double ll = quartic ? norm_c - log_sigma - std::log1p(u * u * u * u)
                              : norm_c - log_sigma - 0.5 * u * u;
    return prior_part(d) + ll;
  };

  // ---- locate the mode: coarse scan, then Brent between neighbouring candidates.
  std::vector<double> cand = {0.0};
  for (double k : {0.5, 1.0, 2.0, 4.0, 8.0}) {
    cand.push_back(k * sigma);
    cand.push_back(-k * sigma);
  }
  for (double t : prior_landmarks(prior)) cand.push_back(t - x);
  const double dm = prior_mode_towards(prior, x) - x;
  for (int i = 1; i < 64; ++i) cand.push_back(dm * i / 64.0);
  cand.push_back(dm);
  std::erase_if(cand, [&](double d) { return d < d_lo || d > d_hi; });
  if (std::isfinite(d_lo)) cand.push_back(d_lo);
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());

  std::size_t best = 0;
  double best_val = -kInf;
  for (std::size_t i = 0; i < cand.size(); ++i) {
    const double v = log_h(cand[i]);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  if (!(best_val > -kInf))
    throw DegeneratePosterior("posterior density vanishes at every probe point (x=" +
                              format_number(x) + ")");
  double mode = cand[best];
  {
    const double a = best > 0 ? cand[best - 1] : std::max(d_lo, cand[best] - 8.0 * sigma);
    const double b = best + 1 < cand.size() ? cand[best + 1] : cand[best] + 8.0 * sigma;
    if (b > a) {
      const auto r = boost::math::tools::brent_find_minima(
          [&](double d) { return -log_h(d); }, a, b, 40);
      if (-r.second > best_val) {
        best_val = -r.second;
        mode = r.first;
      }
    }
  }
  // Re-express the prior relative to the mode for an accurate integrand.
  if (auto off = make_offset_log_prior(prior, x + mode); off.increment && std::isfinite(off.base)) {
    prior_base = off.base;
    prior_part = [inc = std::move(off.increment), mode](double d) { return inc(d - mode); };
    best_val = log_h(mode);
  }
  const double log_h_max = best_val;
  auto rel = [&](double d) { return log_h(d) - log_h_max; };

  // ---- level-set breakpoints around the mode.
  const double w0 = 0.25 * std::min(sigma, prior_width(prior));
  const double search_cap = 1e6 * std::max({sigma, 1.0, std::abs(x)});
  auto level_point = [&](double direction, double drop) {
    double inner = 0.0, t = w0;
    for (;;) {
      const double d = mode + direction * t;
      if (d <= d_lo) return d_lo;
      if (d >= d_hi) return d_hi;
      if (rel(d) < -drop) break;
      if (t > search_cap) return d;
      inner = t;
      t *= 2.0;
    }
    for (int it = 0; it < 40; ++it) {
      const double mid = 0.5 * (inner + t);
      if (rel(mode + direction * mid) < -drop)
        t = mid;
      else
        inner = mid;
    }
    return mode + direction * t;
  };

  std::vector<double> breaks_d = {mode, 0.0};
  for (double k : {1.0, 2.0, 4.0, 8.0, 12.0}) {
    breaks_d.push_back(k * sigma);
    breaks_d.push_back(-k * sigma);
  }
  for (double t : prior_landmarks(prior)) breaks_d.push_back(t - x);
  for (double drop : {1.0, 6.0, 30.0}) {
    breaks_d.push_back(level_point(-1.0, drop));
    breaks_d.push_back(level_point(+1.0, drop));
  }

  // ---- integration window.
  double lo, hi;
  if (quartic) {
    lo = d_lo;
    hi = d_hi;
  } else {
    lo = std::min({-12.0 * sigma, level_point(-1.0, kBoundaryDrop)});
    hi = std::max({12.0 * sigma, level_point(+1.0, kBoundaryDrop)});
    lo = std::max(lo, d_lo);
    hi = std::min(hi, d_hi);
    int expansions = 0;
    auto negligible = [&](double d, double edge) { return d == edge || rel(d) < -kBoundaryDrop; };
    while (!(negligible(lo, d_lo) && negligible(hi, d_hi))) {
      if (++expansions > options.max_expansions)
        throw DegeneratePosterior("posterior mass not contained after window expansion (x=" +
                                  format_number(x) + ", sigma=" + format_number(sigma) + ")");
      if (!negligible(lo, d_lo)) lo = std::max(d_lo, mode - 2.0 * (mode - lo));
      if (!negligible(hi, d_hi)) hi = std::min(d_hi, mode + 2.0 * (hi - mode));
    }
  }

  // ---- change of variable: identity for normal errors, theta = x + sigma tan(v) for quartic.
  auto to_v = [&](double d) { return quartic ? std::atan(d / sigma) : d; };
  auto to_d = [&](double v) { return quartic ? sigma * std::tan(v) : v; };
  auto jac = [&](double v) {
    if (!quartic) return 1.0;
    const double c = std::cos(v);
    return sigma / (c * c);
  };
  const double v_lo = quartic ? (std::isfinite(lo) ? to_v(lo) : -kHalfPi) : lo;
  const double v_hi = quartic ? (std::isfinite(hi) ? to_v(hi) : kHalfPi) : hi;

  std::vector<double> breaks_v = {v_lo, v_hi};
  for (double d : breaks_d) {
    if (!std::isfinite(d)) continue;
    const double v = to_v(d);
    if (v > v_lo && v < v_hi) breaks_v.push_back(v);
  }
  std::sort(breaks_v.begin(), breaks_v.end());
  breaks_v.erase(std::unique(breaks_v.begin(), breaks_v.end()), breaks_v.end());

  // Moments about the mode: (mass, first, second) with the density scaled by exp(-log_h_max).
  auto integrand = [&](double v) {
    quad::Vec<3> out{};
    const double d = to_d(v);
    const double r = rel(d);
    if (!(r > -745.0) || !std::isfinite(d)) return out;
    const double w = std::exp(r) * jac(v);
    const double c = d - mode;
    out[0] = w;
    out[1] = w * c;
    out[2] = w * c * c;
    return out;
  };
  auto scale = [](const quad::Vec<3>& total) {
    const double spread = std::sqrt(std::abs(total[0] * total[2]));
    return quad::Vec<3>{std::abs(total[0]), spread, std::abs(total[2])};
  };
  auto res = quad::integrate_adaptive<3>(integrand, breaks_v, options.tol, scale, options.max_panels);
  if (options.refine) quad::refine_all(res, integrand);
  if (!(res.value[0] > 0.0) || !std::isfinite(res.value[0]))
    throw DegeneratePosterior("posterior has zero mass on the integration window");
  if (!res.converged && !options.refine)
    throw IntegrationFailure("posterior quadrature did not converge (x=" + format_number(x) +
                             ", sigma=" + format_number(sigma) + ")");

  const double m0 = res.value[0];
  const double m1 = res.value[1] / m0;
  const double m2 = res.value[2] / m0;

  PosteriorGrid g;
  g.mean = x + mode + m1;
  g.variance = std::max(0.0, m2 - m1 * m1);
  g.log_norm_const = std::log(m0) + log_h_max + prior_base;

  const std::size_t total = res.panels.size() * quad::kPointsPerPanel;
  g.nodes.reserve(total);
  g.weights.reserve(total);
  g.values.reserve(total);
  // CDF at panel boundaries and at every node, from the panel interpolants.
  std::vector<double> edges, cum, dens;
  edges.reserve(total + res.panels.size() + 1);
  cum.reserve(total + res.panels.size() + 1);
  dens.reserve(total + res.panels.size() + 1);
  auto edge_density = [&](double v) {
    const double d = to_d(v);
    if (!std::isfinite(d)) return 0.0;
    const double r = rel(d);
    return r > -745.0 ? std::exp(r) / m0 : 0.0;
  };
  const auto& partial = quad::partial_integration_matrix();
  double running = 0.0;
  edges.push_back(x + to_d(res.panels.front().lo));
  cum.push_back(0.0);
  dens.push_back(edge_density(res.panels.front().lo));
  for (const auto& p : res.panels) {
    const double centre = 0.5 * (p.lo + p.hi), half = 0.5 * (p.hi - p.lo);
    for (std::size_t k = 0; k < quad::kPointsPerPanel; ++k) {
      const double v = centre + half * quad::panel_node(k);
      const double j = jac(v);
      g.nodes.push_back(x + to_d(v));
      g.weights.push_back(half * quad::panel_weight(k) * j);
      g.values.push_back(p.samples[k][0] / j / m0);
      double part = 0.0;
      for (std::size_t i = 0; i < quad::kPointsPerPanel; ++i) part += partial[k][i] * p.samples[i][0];
      edges.push_back(g.nodes.back());
      cum.push_back(std::max(cum.back(), running + half * part / m0));
      dens.push_back(g.values.back());
    }
    running += p.value[0] / m0;
    edges.push_back(x + to_d(p.hi));
    cum.push_back(std::max(cum.back(), running));
    dens.push_back(edge_density(p.hi));
  }

  // Drop nodes carrying negligible mass at either end, then renormalise.
  std::size_t first = 0, last = g.nodes.size();
  double dropped = 0.0;
  while (first + 1 < last) {
    const double m = g.weights[first] * g.values[first];
    if (dropped + m >= kTrimMass) break;
    dropped += m;
    ++first;
  }
  while (last > first + 1) {
    const double m = g.weights[last - 1] * g.values[last - 1];
    if (dropped + m >= 2.0 * kTrimMass) break;
    dropped += m;
    --last;
  }
  auto cut = [](std::vector<double>& v, std::size_t from, std::size_t to) {
    v.erase(v.begin() + static_cast<std::ptrdiff_t>(to), v.end());
    v.erase(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(from));
  };
  cut(g.nodes, first, last);
  cut(g.weights, first, last);
  cut(g.values, first, last);
  double mass = 0.0;
  for (std::size_t k = 0; k < g.nodes.size(); ++k) mass += g.weights[k] * g.values[k];
  for (auto& v : g.values) v /= mass;

  // Same trimming for the CDF representation.
  std::size_t e_first = 0, e_last = edges.size() - 1;
  while (e_first + 1 < e_last && cum[e_first + 1] <= kTrimMass) ++e_first;
  while (e_last > e_first + 1 && cum[e_last - 1] >= cum.back() - kTrimMass) --e_last;
  cut(edges, e_first, e_last + 1);
  cut(cum, e_first, e_last + 1);
  cut(dens, e_first, e_last + 1);
  const double c0 = cum.front(), span = cum.back() - cum.front();
  for (auto& c : cum) c = (c - c0) / span;
  for (auto& d : dens) d /= span;
  cum.back() = 1.0;
  g.cell_edges = std::move(edges);
  g.cell_cdf = std::move(cum);
  g.cell_density = std::move(dens);

  // Guard the mean-inside-grid invariant against rounding at the extreme of a one-sided grid.
  g.mean = std::clamp(g.mean, g.nodes.front(), g.nodes.back());
  return g;
}

LikelihoodPosterior likelihood_posterior(const ErrorModel& error, double x, double sigma,
                                         const PosteriorOptions& options) {
  if (!(sigma > 0.0)) throw ParameterDomainError("likelihood posterior needs sigma > 0");
  return posterior(UniformImproperPrior{}, error, x, sigma, options);
}

Moments conjugate_normal_posterior(double mu, double tau2, double x, double sigma) {
  if (!(tau2 > 0.0)) throw ParameterDomainError("prior variance must be positive");
  if (!(sigma > 0.0)) throw ParameterDomainError("sigma must be positive");
  const double prec = 1.0 / tau2 + 1.0 / (sigma * sigma);
  return {(x / (sigma * sigma) + mu / tau2) / prec, 1.0 / prec};
}

double pairwise_less_prob(const PosteriorGrid& a, const PosteriorGrid& b) {
  // Disjoint supports decide the comparison outright.
  if (a.upper() < b.lower()) return 1.0;
  if (b.upper() < a.lower()) return 0.0;

  const bool pa = a.is_point_mass(), pb = b.is_point_mass();
  if (pa && pb) {
    const double ta = a.nodes[0], tb = b.nodes[0];
    return ta < tb ? 1.0 : (ta > tb ? 0.0 : 0.5);
  }
  if (pa) return 1.0 - b.cdf(a.nodes[0]);
  if (pb) return a.cdf(b.nodes[0]);

  // integral of F_a against b's quadrature rule; F_a is C1 so the panel rule stays accurate
  double acc = 0.0;
  for (std::size_t k = 0; k < b.nodes.size(); ++k) acc += b.weights[k] * b.values[k] * a.cdf(b.nodes[k]);
  return std::clamp(acc, 0.0, 1.0);
}

double posterior_quantile(const PosteriorGrid& g, double u) {
  if (g.is_point_mass()) return g.nodes[0];
  u = std::clamp(u, 0.0, 1.0);
  const auto& c = g.cell_cdf;
  auto it = std::upper_bound(c.begin(), c.end(), u);
  std::size_t k = it == c.begin() ? 0 : static_cast<std::size_t>(it - c.begin()) - 1;
  k = std::min(k, g.nodes.size() - 1);
  const double mass = c[k + 1] - c[k];
  const double frac = mass > 0.0 ? (u - c[k]) / mass : 0.5;
  return g.cell_edges[k] + std::clamp(frac, 0.0, 1.0) * (g.cell_edges[k + 1] - g.cell_edges[k]);
}

std::vector<double> posterior_sample(const PosteriorGrid& g, RngStream& rng, std::size_t n) {
  std::vector<double> out(n);
  for (auto& v : out) v = g.is_point_mass() ? g.nodes[0] : posterior_quantile(g, rng.uniform());
  return out;
}

}  // namespace ranklab
