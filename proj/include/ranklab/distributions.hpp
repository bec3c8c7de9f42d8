#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ranklab/random.hpp"

namespace ranklab {

// ---------------------------------------------------------------------------
// Priors over the latent unit value.

struct NormalPrior {
  double mean = 0.0;
  double variance = 1.0;
};

/// Density shape * scale^shape / theta^(shape+1) on [scale, inf).
struct ParetoPrior {
  double scale = 1.0;  // theta_min
  double shape = 1.0;  // alpha
};

/// Density |theta| exp(-|theta|) / 2. Bimodal with a zero at the origin.
struct AbsExpPrior {};

/// Density proportional to exp(-exp(theta^2 / 4)); lighter than any Gaussian.
struct SuperLightPrior {};

/// Constant density 1 on the real line (improper).
struct UniformImproperPrior {};

using PriorSpec =
    std::variant<NormalPrior, ParetoPrior, AbsExpPrior, SuperLightPrior, UniformImproperPrior>;

// ---------------------------------------------------------------------------
// Error models: the law of X - Theta for a unit with error scale sigma.

/// X = Theta + sigma * Z with Z standard normal.
struct NormalError {};

/// X - Theta has density sqrt(2) / (pi sigma (1 + (x/sigma)^4)); mean 0, variance sigma^2.
struct QuarticError {};

using ErrorModel = std::variant<NormalError, QuarticError>;

// ---------------------------------------------------------------------------
// Laws for the per-unit error scale sigma.

struct ConstantSigma {
  double sigma = 0.0;
};

/// sigma = 0 with probability 1/2, otherwise exponential with the given mean.
struct ZeroExpMixture {
  double nonzero_mean = 1.0;
};

using SigmaLaw = std::variant<ConstantSigma, ZeroExpMixture>;

/// A named rule producing the sigma law used at stage p.
struct SigmaSchedule {
  enum class Rule {
    Constant,            // ConstantSigma(param)
    PowerOfP,            // ConstantSigma(p^-param)
    ZeroExpPower,        // ZeroExpMixture(p^-param)
    ZeroExpLogSquare,    // ZeroExpMixture(exp(-(log p)^2 / 32))
  };
  Rule rule = Rule::Constant;
  double param = 0.0;

  SigmaLaw at(std::size_t p) const;
  std::string describe() const;
  bool operator==(const SigmaSchedule&) const = default;
};

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

struct Support {
  double lo;
  double hi;
};

std::string describe(const PriorSpec& prior);
std::string describe(const ErrorModel& error);
std::string describe(const SigmaLaw& law);

bool is_proper(const PriorSpec& prior);
Support support(const PriorSpec& prior);

/// Throws ParameterDomainError for non-positive scales.
void validate(const PriorSpec& prior);

double density(const PriorSpec& prior, double theta);
double log_density(const PriorSpec& prior, double theta);
double cdf(const PriorSpec& prior, double theta);

/// Density of X - Theta = deviation for a unit with error scale sigma > 0.
double density(const ErrorModel& error, double deviation, double sigma);
double log_density(const ErrorModel& error, double deviation, double sigma);
double cdf(const ErrorModel& error, double deviation, double sigma);
/// P(X - Theta >= deviation); accurate far into the upper tail.
double survival(const ErrorModel& error, double deviation, double sigma);

std::vector<double> sample(const PriorSpec& prior, RngStream& rng, std::size_t n);
std::vector<double> sample(const ErrorModel& error, double sigma, RngStream& rng, std::size_t n);
std::vector<double> sample(const SigmaLaw& law, RngStream& rng, std::size_t n);

Moments moments(const PriorSpec& prior);
Moments moments(const ErrorModel& error, double sigma);
Moments moments(const SigmaLaw& law);

/// Normalising constant of exp(-exp(theta^2/4)), computed once.
double superlight_normalizer();

/// CDF of the unit-scale quartic error, from the tabulated integral.
double quartic_standard_cdf(double u);
/// Inverse of quartic_standard_cdf by bisection on the table.
double quartic_standard_quantile(double prob);

// ---------------------------------------------------------------------------
// Structural condition checkers (numeric diagnostics on caller grids).

struct QuasiunimodalReport {
  bool holds = false;
  double epsilon = 0.0;
  double quasimode = 0.0;
};

/// Best epsilon over candidate quasimodes on a sorted grid inside the support.
QuasiunimodalReport check_quasiunimodal(const PriorSpec& prior, std::span<const double> grid);

struct TailWitness {
  double a = 0.0;
  double x = 0.0;
  double sigma = 0.0;
  double ratio = 0.0;
};

struct TailDominanceReport {
  bool feasible = false;
  double best_r = 0.0;
  double min_s = 0.0;        // smallest s that works on the grid at best_r
  double worst_ratio = 0.0;  // largest E(excess)/(sigma a pi(r a / sigma)) at best_r
  std::vector<std::pair<double, double>> s_by_r;
  std::vector<TailWitness> witnesses;  // grid points attaining the worst ratios
  std::size_t pairs_tested = 0;
};

/// Radii swept when searching for the tail-domination constant r.
inline constexpr double kTailRadii[] = {0.25, 0.5, 1.0, 2.0, 4.0};

/// E(((Theta_L - x)^2 - a^2)_+) under the likelihood posterior, which for
/// symmetric location families does not depend on x.
double likelihood_excess_moment(const ErrorModel& error, double a, double sigma);
/// Its logarithm, accurate where the moment itself underflows.
double log_likelihood_excess_moment(const ErrorModel& error, double a, double sigma);

TailDominanceReport check_tail_dominating(const PriorSpec& prior, const ErrorModel& error,
                                          std::span<const double> a_grid,
                                          std::span<const double> x_grid,
                                          std::span<const double> sigma_grid);

/// Smallest K with integral (K sigma^2 - (theta - x)^2) L dtheta > 0 on the grids.
double estimate_K(const ErrorModel& error, std::span<const double> x_grid,
                  std::span<const double> sigma_grid);

}  // namespace ranklab
