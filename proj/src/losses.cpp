#include "ranklab/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ranklab/errors.hpp"
#include "ranklab/format.hpp"
#include "ranklab/random.hpp"

namespace ranklab {

double pair_loss(const PairwiseLoss& l, double x, double y) {
  if (x >= y) return 0.0;
  if (std::holds_alternative<HingeDiff>(l)) return y - x;
  if (std::holds_alternative<ZeroOne>(l)) return 1.0;
  if (const auto* per = std::get_if<PERLoss>(&l)) return std::abs(per->ref_cdf(y) - per->ref_cdf(x));
  const double t0 = std::get<PValueLoss>(l).theta0;
  return ((x < t0 && y >= t0) || (x <= t0 && y > t0)) ? 1.0 : 0.0;
}

std::string describe(const PairwiseLoss& l) {
  if (std::holds_alternative<HingeDiff>(l)) return "hinge_diff";
  if (std::holds_alternative<ZeroOne>(l)) return "zero_one";
  if (std::holds_alternative<PERLoss>(l)) return "per";
  return "pvalue(" + format_number(std::get<PValueLoss>(l).theta0) + ")";
}

double scale_factor(ScalingRule s, std::size_t p) {
  if (p == 0) throw ParameterDomainError("scaling needs p >= 1");
  const double pd = static_cast<double>(p);
  switch (s) {
    case ScalingRule::Total: return 1.0;
    case ScalingRule::PerUnit: return 1.0 / pd;
    case ScalingRule::PerPair: return 1.0 / (pd * pd);
  }
  return 1.0;
}

std::string describe(ScalingRule s) {
  switch (s) {
    case ScalingRule::Total: return "total";
    case ScalingRule::PerUnit: return "per_unit";
    case ScalingRule::PerPair: return "per_pair";
  }
  return "?";
}

// ---------------------------------------------------------------------------

Ranking Ranking::from_positions(std::vector<std::size_t> positions) {
  std::vector<char> seen(positions.size(), 0);
  for (std::size_t pos : positions) {
    if (pos >= positions.size() || seen[pos])
      throw ShapeError("ranking positions do not form a permutation");
    seen[pos] = 1;
  }
  Ranking r;
  r.positions_ = std::move(positions);
  return r;
}

Ranking Ranking::from_order(std::span<const std::size_t> order) {
  std::vector<std::size_t> positions(order.size(), order.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (order[k] >= order.size() || positions[order[k]] != order.size())
      throw ShapeError("ranking order does not form a permutation");
    positions[order[k]] = k;
  }
  Ranking r;
  r.positions_ = std::move(positions);
  return r;
}

Ranking Ranking::identity(std::size_t p) {
  std::vector<std::size_t> pos(p);
  std::iota(pos.begin(), pos.end(), std::size_t{0});
  Ranking r;
  r.positions_ = std::move(pos);
  return r;
}

std::vector<std::size_t> Ranking::order() const {
  std::vector<std::size_t> out(positions_.size());
  for (std::size_t i = 0; i < positions_.size(); ++i) out[positions_[i]] = i;
  return out;
}

std::vector<std::size_t> Ranking::ranks() const {
  std::vector<std::size_t> out(positions_);
  for (auto& v : out) ++v;
  return out;
}

Ranking true_ranking(std::span<const double> theta) {
  std::vector<std::size_t> order(theta.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return theta[a] > theta[b]; });
  return Ranking::from_order(order);
}

namespace {

void require_same_size(const Ranking& perm, std::span<const double> theta) {
  if (perm.size() != theta.size())
    throw ShapeError("ranking has " + std::to_string(perm.size()) + " units but theta has " +
                     std::to_string(theta.size()));
}

// Pairs (a before b) with v[a] < v[b], counted while merge-sorting v descending.
std::uint64_t count_ascending_pairs(std::vector<double>& v, std::vector<double>& buf, std::size_t lo,
                                    std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::uint64_t count = count_ascending_pairs(v, buf, lo, mid) + count_ascending_pairs(v, buf, mid, hi);
  // Both halves are sorted descending. For each right element, count left
  // elements strictly smaller than it.
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[i] >= v[j]) {
      buf[k++] = v[i++];
    } else {
      count += mid - i;
      buf[k++] = v[j++];
    }
  }
  while (i < mid) buf[k++] = v[i++];
  while (j < hi) buf[k++] = v[j++];
  std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo), buf.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return count;
}

}  // namespace

double additive_loss(const Ranking& perm, std::span<const double> theta, const PairwiseLoss& l,
                     ScalingRule s) {
  require_same_size(perm, theta);
  const auto order = perm.order();
  double total = 0.0;
  for (std::size_t a = 0; a < order.size(); ++a)
    for (std::size_t b = a + 1; b < order.size(); ++b)
      total += pair_loss(l, theta[order[a]], theta[order[b]]);
  return total * scale_factor(s, std::max<std::size_t>(theta.size(), 1));
}

std::uint64_t footrule_loss(const Ranking& perm, std::span<const double> theta) {
  require_same_size(perm, theta);
  const Ranking tau = true_ranking(theta);
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const auto a = perm.position(i), b = tau.position(i);
    total += a > b ? a - b : b - a;
  }
  return total;
}

std::uint64_t inversion_loss(const Ranking& perm, std::span<const double> theta) {
  require_same_size(perm, theta);
  std::vector<double> seq;
  seq.reserve(theta.size());
  for (std::size_t unit : perm.order()) seq.push_back(theta[unit]);
  std::vector<double> buf(seq.size());
  return count_ascending_pairs(seq, buf, 0, seq.size());
}

bool sandwich_check(const Ranking& perm, std::span<const double> theta) {
  const std::uint64_t L = inversion_loss(perm, theta);
  const std::uint64_t R = footrule_loss(perm, theta);
  // Compare 2R >= L and R <= 2L in integers.
  return L <= 2 * R && R <= 2 * L;
}

bool normalized_gap_inequality_holds(double x, double y, double z, double w) {
  using LD = long double;
  const LD X = x, Y = y, Z = z, W = w;
  const LD left = std::fabs(X - Y) / (std::fabs(X) + std::fabs(Y) + 2) -
                  std::fabs(Z - W) / (std::fabs(Z) + std::fabs(W) + 2);
  const LD d = std::fabs(X - Z) + std::fabs(Y - W);
  const LD right = d / 2 * (1 + d / 2);
  if (left <= right) return true;
  const LD slack = 64 * std::numeric_limits<LD>::epsilon() * (1 + std::fabs(left) + std::fabs(right));
  return left <= right + slack;
}

// ---------------------------------------------------------------------------

RestrainedProbeReport restrained_probe(const PairwiseLoss& l, ProbeBox box, std::size_t n_samples,
                                       std::uint64_t seed) {
  if (!(box.hi > box.lo) || !std::isfinite(box.lo) || !std::isfinite(box.hi))
    throw ParameterDomainError("probe box must be a finite non-empty interval");
  if (n_samples == 0) throw ParameterDomainError("probe needs at least one sample");

  RngStream rng(seed, 0x5e57a1);
  const double width = box.hi - box.lo;
  auto draw_pair = [&](double& x, double& y) {
    double u = box.lo + width * rng.uniform(), v = box.lo + width * rng.uniform();
    if (u > v) std::swap(u, v);
    x = u;
    y = v;
  };

  // Difference quotients along each coordinate at two step sizes: a genuine
  // Lipschitz loss gives the same estimate, a jump blows up as the step shrinks.
  auto lipschitz_estimate = [&](double h, RngStream stream) {
    double best = 0.0;
    for (std::size_t s = 0; s < n_samples; ++s) {
      double u = box.lo + width * stream.uniform(), v = box.lo + width * stream.uniform();
      if (u > v) std::swap(u, v);
      if (v - u <= 2 * h) continue;
      const double base = pair_loss(l, u, v);
      best = std::max(best, std::abs(pair_loss(l, u, v + h) - base) / h);
      best = std::max(best, std::abs(pair_loss(l, u + h, v) - base) / h);
    }
    return best;
  };
  const double h_coarse = 1e-4 * width, h_fine = h_coarse / 64.0;
  const double lam_coarse = lipschitz_estimate(h_coarse, RngStream(seed, 0x11));
  const double lam_fine = lipschitz_estimate(h_fine, RngStream(seed, 0x11));

  RestrainedProbeReport rep;
  rep.samples = n_samples;
  rep.lipschitz = !(lam_fine > 8.0 * lam_coarse + 1e-9 && lam_fine > 1e3);
  rep.lambda_hat = rep.lipschitz ? std::max(lam_coarse, lam_fine)
                                 : std::numeric_limits<double>::infinity();

  // Monotonicity: increasing in y, decreasing in x on {x < y}.
  for (std::size_t s = 0; s < n_samples; ++s) {
    double x, y;
    draw_pair(x, y);
    const double base = pair_loss(l, x, y);
    const double y2 = y + (box.hi - y) * rng.uniform();
    const double x2 = box.lo + (x - box.lo) * rng.uniform();
    const double slack = 1e-12 * (1.0 + std::abs(base));
    if (pair_loss(l, x, y2) < base - slack) ++rep.monotonicity_violations;
    if (pair_loss(l, x2, y) < base - slack) ++rep.monotonicity_violations;
  }

  // Jump at the diagonal: D >= l(x, x+eps) - lambda eps; eps log-uniform.
  const double lam_for_d = rep.lipschitz ? rep.lambda_hat : 0.0;
  double d_hat = 0.0;
  for (std::size_t s = 0; s < n_samples; ++s) {
    const double x = box.lo + width * rng.uniform();
    const double eps = width * std::pow(10.0, -8.0 * rng.uniform());
    d_hat = std::max(d_hat, pair_loss(l, x, x + eps) - lam_for_d * eps);
  }
  rep.D_hat = d_hat < 1e-9 ? 0.0 : d_hat;

  // Near-diagonal slope: b(a) = inf over 0 < eps < a of l(x, x+eps)/eps.
  for (double a : {1e-3, 1e-2, 1e-1, 1.0}) {
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < n_samples; ++s) {
      const double x = box.lo + width * rng.uniform();
      const double eps = a * std::pow(10.0, -6.0 * rng.uniform());
      b = std::min(b, pair_loss(l, x, x + eps) / eps);
    }
    rep.a_b_witness.emplace_back(a, b);
    if (b > 0.0) rep.lower_bound_holds = true;
  }

  rep.restrained = rep.lipschitz && rep.monotonicity_violations == 0 && rep.lower_bound_holds;
  return rep;
}

PairwiseBounds pairwise_expected_loss_bounds(const RestrainedConstants& c, double mu1, double mu2,
                                             double s1, double s2) {
  if (s1 < 0 || s2 < 0) throw ParameterDomainError("standard deviations must be >= 0");
  if (c.lambda < 0 || c.D < 0 || c.a <= 0 || c.b <= 0)
    throw ParameterDomainError("restrained constants need lambda, D >= 0 and a, b > 0");
  const double v = s1 * s1 + s2 * s2;
  PairwiseBounds out;
  if (mu1 > mu2) {
    const double gap = mu1 - mu2;
    out.upper_i = c.D * std::min(v / (gap * gap), 1.0) + 3.0 * c.lambda * v / gap;
  }
  out.upper_ii = c.D + 4.0 * c.lambda * std::max(mu2 - mu1, 0.0) +
                 (2.0 + 2.0 * std::sqrt(2.0)) * c.lambda * std::sqrt(v);
  if (mu1 - mu2 > 2.0 * std::sqrt(2.0 * c.lambda * v / c.b)) {
    const double bl = c.b + c.lambda;
    out.lower_iii = 0.5 * (c.b * c.b * c.b / (bl * bl)) * std::min(mu1 - mu2, c.a);
  }
  return out;
}

}  // namespace ranklab
