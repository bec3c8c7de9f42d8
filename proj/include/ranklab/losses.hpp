#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace ranklab {

// ---------------------------------------------------------------------------
// Pairwise loss generators l(x, y): the cost of ranking a unit with value x
// above a unit with value y. Every generator is zero when x >= y.

/// l(x, y) = (y - x)_+
struct HingeDiff {};
/// l(x, y) = 1 if x < y
struct ZeroOne {};
/// l(x, y) = |F(y) - F(x)| if x < y, for a reference CDF F.
struct PERLoss {
  std::function<double(double)> ref_cdf;
};
/// l(x, y) = 1 iff x and y fall on opposite sides of theta0 in the wrong order.
struct PValueLoss {
  double theta0 = 0.0;
};

using PairwiseLoss = std::variant<HingeDiff, ZeroOne, PERLoss, PValueLoss>;

double pair_loss(const PairwiseLoss& l, double x, double y);
std::string describe(const PairwiseLoss& l);

enum class ScalingRule { Total, PerUnit, PerPair };

/// s(p): 1, 1/p or 1/p^2.
double scale_factor(ScalingRule s, std::size_t p);
std::string describe(ScalingRule s);

// ---------------------------------------------------------------------------

/// A bijection from units {0..p-1} to positions {0..p-1}; position 0 is the
/// unit believed to have the largest value.
class Ranking {
 public:
  Ranking() = default;

  /// positions[i] = position of unit i. Throws ShapeError if not a permutation.
  static Ranking from_positions(std::vector<std::size_t> positions);
  /// order[k] = unit placed at position k. Throws ShapeError if not a permutation.
  static Ranking from_order(std::span<const std::size_t> order);
  static Ranking identity(std::size_t p);

  std::size_t size() const { return positions_.size(); }
  std::size_t position(std::size_t unit) const { return positions_[unit]; }
  const std::vector<std::size_t>& positions() const { return positions_; }
  /// Units listed from top position to bottom.
  std::vector<std::size_t> order() const;
  /// 1-based ranks, rho(i) in {1..p}.
  std::vector<std::size_t> ranks() const;

  bool operator==(const Ranking&) const = default;

 private:
  std::vector<std::size_t> positions_;
};

/// True descending ranking of theta; ties broken by unit index.
Ranking true_ranking(std::span<const double> theta);

/// s(p) * sum over pairs (i above j) of l(theta_i, theta_j).
double additive_loss(const Ranking& perm, std::span<const double> theta, const PairwiseLoss& l,
                     ScalingRule s);

/// Sum over units of |rho(i) - tau(i)|, tau the true ranking (ties by index).
std::uint64_t footrule_loss(const Ranking& perm, std::span<const double> theta);

/// Number of pairs ranked i above j with theta_i < theta_j; O(p log p).
std::uint64_t inversion_loss(const Ranking& perm, std::span<const double> theta);

/// 1/2 L <= R <= 2 L for L = inversion_loss, R = footrule_loss.
bool sandwich_check(const Ranking& perm, std::span<const double> theta);

/// For all reals x, y, z, w:
///   |x-y|/(|x|+|y|+2) - |z-w|/(|z|+|w|+2) <= d/2 * (1 + d/2),  d = |x-z| + |y-w|.
/// Evaluated in extended precision; a relative slack of 64 ulps absorbs rounding.
bool normalized_gap_inequality_holds(double x, double y, double z, double w);

// ---------------------------------------------------------------------------
// Restrained-loss diagnostics.

struct RestrainedConstants {
  double lambda = 0.0;  // Lipschitz constant above the diagonal
  double a = 0.0;       // near-diagonal window
  double b = 0.0;       // near-diagonal slope lower bound
  double D = 0.0;       // jump allowance at the diagonal
};

struct ProbeBox {
  double lo = -5.0;
  double hi = 5.0;
};

struct RestrainedProbeReport {
  double lambda_hat = 0.0;
  double D_hat = 0.0;
  bool lipschitz = true;
  /// (a, smallest sampled l(x, x+eps)/eps over 0 < eps < a).
  std::vector<std::pair<double, double>> a_b_witness;
  std::size_t monotonicity_violations = 0;
  std::size_t samples = 0;
  bool lower_bound_holds = false;
  bool restrained = false;
};

RestrainedProbeReport restrained_probe(const PairwiseLoss& l, ProbeBox box, std::size_t n_samples,
                                       std::uint64_t seed = 1);

struct PairwiseBounds {
  std::optional<double> upper_i;    // requires mu1 > mu2
  double upper_ii = 0.0;
  std::optional<double> lower_iii;  // requires the mean gap precondition
};

/// Envelopes for E l(X1, X2) (upper) and E l(X2, X1) (lower) for independent
/// X1, X2 with means mu1, mu2 and standard deviations s1, s2.
PairwiseBounds pairwise_expected_loss_bounds(const RestrainedConstants& c, double mu1, double mu2,
                                             double s1, double s2);

}  // namespace ranklab
