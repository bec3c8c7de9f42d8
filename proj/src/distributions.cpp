#include "ranklab/distributions.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "ranklab/errors.hpp"
#include "ranklab/format.hpp"
#include "ranklab/quadrature.hpp"

namespace ranklab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;
constexpr double kSqrt2 = std::numbers::sqrt2;
constexpr double kQuarticConst = kSqrt2 / kPi;  // density of the unit quartic at 0

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double std_normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * kPi); }

double quartic_standard_density(double u) {
  const double u2 = u * u;
  return kQuarticConst / (1.0 + u2 * u2);
}

// Upper tail of the unit quartic beyond u >= 1 from its convergent series.
double quartic_tail_series(double u) {
  const double inv4 = 1.0 / (u * u * u * u);
  double term = 1.0 / (u * u * u);
  double sum = 0.0;
  for (int k = 0; k < 6; ++k) {
    sum += (k % 2 == 0 ? 1.0 : -1.0) * term / (4.0 * k + 3.0);
    term *= inv4;
  }
  return kQuarticConst * sum;
}

// Upper-tail table of the unit quartic on nodes equally spaced in s = u/(1+u).
class QuarticTable {
 public:
  static constexpr std::size_t kNodes = 4096;
  static constexpr double kCutoff = 64.0;

  QuarticTable() : u_(kNodes + 1), tail_(kNodes + 1) {
    const double s_max = kCutoff / (1.0 + kCutoff);
    for (std::size_t k = 0; k <= kNodes; ++k) {
      const double s = s_max * static_cast<double>(k) / kNodes;
      u_[k] = k == kNodes ? kCutoff : s / (1.0 - s);
    }
    tail_[kNodes] = quartic_tail_series(kCutoff);
    auto g = [](double u) { return quartic_standard_density(u); };
    for (std::size_t k = kNodes; k-- > 0;) {
      const auto r = quad::integrate(g, u_[k], u_[k + 1], 1e-15);
      tail_[k] = tail_[k + 1] + r.value;
    }
    step_ = s_max / kNodes;
  }

  // P(U >= u) for u >= 0.
  double upper(double u) const {
    if (u >= kCutoff) return quartic_tail_series(u);
    const double s = u / (1.0 + u);
    std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(s / step_), kNodes - 1);
    while (k > 0 && u_[k] > u) --k;
    while (k + 1 < kNodes && u_[k + 1] < u) ++k;
    return hermite(k, u);
  }

  // u >= 0 with upper(u) = q, for q in (0, 1/2].
  double inverse_upper(double q) const {
    if (q >= 0.5) return 0.0;
    double lo, hi;
    if (q <= tail_[kNodes]) {
      lo = kCutoff;
      hi = std::max(2.0 * kCutoff, 2.0 * std::cbrt(kQuarticConst / (3.0 * q)));
      while (quartic_tail_series(hi) > q) hi *= 2.0;
    } else {
      // tail_ is decreasing; find the cell with tail_[k] >= q > tail_[k+1].
      const auto it = std::upper_bound(tail_.begin(), tail_.end(), q, std::greater<double>());
      const std::size_t k = static_cast<std::size_t>(it - tail_.begin()) - 1;
      lo = u_[k];
      hi = u_[k + 1];
    }
    while (hi - lo > 1e-10 * std::max(1.0, lo)) {
      const double mid = 0.5 * (lo + hi);
      if (upper(mid) > q)
        lo = mid;
      else
        hi = mid;
    }
    return 0.5 * (lo + hi);
  }

 private:
  double hermite(std::size_t k, double u) const {
    const double h = u_[k + 1] - u_[k];
    const double t = (u - u_[k]) / h;
    const double t2 = t * t, t3 = t2 * t;
    // Derivative of the upper tail is minus the density.
    const double d0 = -quartic_standard_density(u_[k]);
    const double d1 = -quartic_standard_density(u_[k + 1]);
    return (2 * t3 - 3 * t2 + 1) * tail_[k] + (t3 - 2 * t2 + t) * h * d0 +
           (-2 * t3 + 3 * t2) * tail_[k + 1] + (t3 - t2) * h * d1;
  }

  std::vector<double> u_;
  std::vector<double> tail_;
  double step_ = 0.0;
};

const QuarticTable& quartic_table() {
  static const QuarticTable table;
  return table;
}

double require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw ParameterDomainError(std::string(what) + " must be positive and finite, got " +
                               format_number(v));
  return v;
}

double superlight_log_kernel(double theta) { return -std::exp(0.25 * theta * theta); }

}  // namespace

// ---------------------------------------------------------------------------

SigmaLaw SigmaSchedule::at(std::size_t p) const {
  const double pd = static_cast<double>(p);
  switch (rule) {
    case Rule::Constant: return ConstantSigma{param};
    case Rule::PowerOfP: return ConstantSigma{std::pow(pd, -param)};
    case Rule::ZeroExpPower: return ZeroExpMixture{std::pow(pd, -param)};
    case Rule::ZeroExpLogSquare: {
      const double lp = std::log(pd);
      return ZeroExpMixture{std::exp(-lp * lp / 32.0)};
    }
  }
  return ConstantSigma{param};
}

std::string SigmaSchedule::describe() const {
  switch (rule) {
    case Rule::Constant: return "constant(" + format_number(param) + ")";
    case Rule::PowerOfP: return "power_of_p(" + format_number(param) + ")";
    case Rule::ZeroExpPower: return "zero_exp_power(" + format_number(param) + ")";
    case Rule::ZeroExpLogSquare: return "zero_exp_logsq";
  }
  return "?";
}

std::string describe(const PriorSpec& prior) {
  return std::visit(
      Overloaded{
          [](const NormalPrior& p) {
            return "normal(" + format_number(p.mean) + "," + format_number(p.variance) + ")";
          },
          [](const ParetoPrior& p) {
            return "pareto(" + format_number(p.scale) + "," + format_number(p.shape) + ")";
          },
          [](const AbsExpPrior&) { return std::string("absexp"); },
          [](const SuperLightPrior&) { return std::string("superlight"); },
          [](const UniformImproperPrior&) { return std::string("uniform"); },
      },
      prior);
}

std::string describe(const ErrorModel& error) {
  return std::holds_alternative<NormalError>(error) ? "normal" : "quartic";
}

std::string describe(const SigmaLaw& law) {
  return std::visit(Overloaded{
                        [](const ConstantSigma& c) { return "constant(" + format_number(c.sigma) + ")"; },
                        [](const ZeroExpMixture& z) {
                          return "zero_exp(" + format_number(z.nonzero_mean) + ")";
                        },
                    },
                    law);
}

bool is_proper(const PriorSpec& prior) { return !std::holds_alternative<UniformImproperPrior>(prior); }

Support support(const PriorSpec& prior) {
  if (const auto* p = std::get_if<ParetoPrior>(&prior)) return {p->scale, kInf};
  return {-kInf, kInf};
}

void validate(const PriorSpec& prior) {
  if (const auto* n = std::get_if<NormalPrior>(&prior)) {
    require_positive(n->variance, "normal prior variance");
    if (!std::isfinite(n->mean)) throw ParameterDomainError("normal prior mean must be finite");
  } else if (const auto* p = std::get_if<ParetoPrior>(&prior)) {
    require_positive(p->scale, "pareto theta_min");
    require_positive(p->shape, "pareto alpha");
  }
}

double log_density(const PriorSpec& prior, double theta) {
  validate(prior);
  return std::visit(
      Overloaded{
          [&](const NormalPrior& p) {
            const double z = theta - p.mean;
            return -0.5 * z * z / p.variance - 0.5 * std::log(2.0 * kPi * p.variance);
          },
          [&](const ParetoPrior& p) {
            if (theta < p.scale) return -kInf;
            return std::log(p.shape) + p.shape * std::log(p.scale) -
                   (p.shape + 1.0) * std::log(theta);
          },
          [&](const AbsExpPrior&) {
            const double a = std::abs(theta);
            return a == 0.0 ? -kInf : std::log(a) - a - std::log(2.0);
          },
          [&](const SuperLightPrior&) {
            return superlight_log_kernel(theta) - std::log(superlight_normalizer());
          },
          [&](const UniformImproperPrior&) { return 0.0; },
      },
      prior);
}

double density(const PriorSpec& prior, double theta) {
  // AbsExp is exactly zero at the origin; the log form would give exp(-inf) = 0 too.
  return std::exp(log_density(prior, theta));
}

double cdf(const PriorSpec& prior, double theta) {
  validate(prior);
  return std::visit(
      Overloaded{
          [&](const NormalPrior& p) {
            return 0.5 * std::erfc(-(theta - p.mean) / std::sqrt(2.0 * p.variance));
          },
          [&](const ParetoPrior& p) {
            return theta <= p.scale ? 0.0 : 1.0 - std::pow(p.scale / theta, p.shape);
          },
          [&](const AbsExpPrior&) {
            const double a = std::abs(theta);
            const double tail = 0.5 * (1.0 + a) * std::exp(-a);
            return theta < 0.0 ? tail : 1.0 - tail;
          },
          [&](const SuperLightPrior&) {
            if (theta <= -12.0) return 0.0;
            if (theta >= 12.0) return 1.0;
            auto f = [](double t) { return std::exp(superlight_log_kernel(t)); };
            const auto r = quad::integrate(f, -12.0, theta, 1e-13);
            return std::clamp(r.value / superlight_normalizer(), 0.0, 1.0);
          },
          [&](const UniformImproperPrior&) -> double {
            throw UnsupportedOperation("the improper uniform prior has no CDF");
          },
      },
      prior);
}

double superlight_normalizer() {
  static const double z = [] {
    auto f = [](double t) { return std::exp(superlight_log_kernel(t)); };
    const double breaks[] = {-4.0, -2.0, 0.0, 2.0, 4.0};
    return quad::integrate(f, -12.0, 12.0, 1e-14, 0.0, breaks).value;
  }();
  return z;
}

// ---------------------------------------------------------------------------

double log_density(const ErrorModel& error, double deviation, double sigma) {
  require_positive(sigma, "error scale sigma");
  const double u = deviation / sigma;
  if (std::holds_alternative<NormalError>(error))
    return -0.5 * u * u - std::log(sigma) - 0.5 * std::log(2.0 * kPi);
  const double u2 = u * u;
  return std::log(kQuarticConst) - std::log(sigma) - std::log1p(u2 * u2);
}

double density(const ErrorModel& error, double deviation, double sigma) {
  require_positive(sigma, "error scale sigma");
  const double u = deviation / sigma;
  if (std::holds_alternative<NormalError>(error)) return std_normal_pdf(u) / sigma;
  return quartic_standard_density(u) / sigma;
}

double survival(const ErrorModel& error, double deviation, double sigma) {
  require_positive(sigma, "error scale sigma");
  const double u = deviation / sigma;
  if (std::holds_alternative<NormalError>(error)) return 0.5 * std::erfc(u / kSqrt2);
  return u >= 0.0 ? quartic_table().upper(u) : 1.0 - quartic_table().upper(-u);
}

double cdf(const ErrorModel& error, double deviation, double sigma) {
  require_positive(sigma, "error scale sigma");
  const double u = deviation / sigma;
  if (std::holds_alternative<NormalError>(error)) return 0.5 * std::erfc(-u / kSqrt2);
  return quartic_standard_cdf(u);
}

double quartic_standard_cdf(double u) {
  if (std::isnan(u)) return u;
  return u >= 0.0 ? 1.0 - quartic_table().upper(u) : quartic_table().upper(-u);
}

double quartic_standard_quantile(double prob) {
  if (!(prob > 0.0 && prob < 1.0))
    throw ParameterDomainError("quantile probability must lie in (0, 1)");
  if (prob == 0.5) return 0.0;
  return prob > 0.5 ? quartic_table().inverse_upper(1.0 - prob)
                    : -quartic_table().inverse_upper(prob);
}

// ---------------------------------------------------------------------------

std::vector<double> sample(const PriorSpec& prior, RngStream& rng, std::size_t n) {
  validate(prior);
  std::vector<double> out(n);
  std::visit(Overloaded{
                 [&](const NormalPrior& p) {
                   const double sd = std::sqrt(p.variance);
                   for (auto& v : out) v = p.mean + sd * rng.normal();
                 },
                 [&](const ParetoPrior& p) {
                   for (auto& v : out) v = p.scale * std::pow(rng.uniform(), -1.0 / p.shape);
                 },
                 [&](const AbsExpPrior&) {
                   // |theta| ~ Gamma(2, 1), sign uniform.
                   for (auto& v : out) {
                     const double mag = -std::log(rng.uniform() * rng.uniform());
                     v = rng.bernoulli(0.5) ? mag : -mag;
                   }
                 },
                 [&](const SuperLightPrior&) {
                   // Rejection from uniform(-6, 6); the density beyond is below e^-8000.
                   for (auto& v : out) {
                     for (;;) {
                       const double t = -6.0 + 12.0 * rng.uniform();
                       if (rng.uniform() < std::exp(1.0 + superlight_log_kernel(t))) {
                         v = t;
                         break;
                       }
                     }
                   }
                 },
                 [&](const UniformImproperPrior&) {
                   throw UnsupportedOperation("cannot sample the improper uniform prior");
                 },
             },
             prior);
  return out;
}

std::vector<double> sample(const ErrorModel& error, double sigma, RngStream& rng, std::size_t n) {
  if (sigma < 0.0 || !std::isfinite(sigma))
    throw ParameterDomainError("error scale sigma must be non-negative");
  std::vector<double> out(n, 0.0);
  if (sigma == 0.0) return out;
  if (std::holds_alternative<NormalError>(error)) {
    for (auto& v : out) v = sigma * rng.normal();
  } else {
    for (auto& v : out) v = sigma * quartic_standard_quantile(rng.uniform());
  }
  return out;
}

std::vector<double> sample(const SigmaLaw& law, RngStream& rng, std::size_t n) {
  std::vector<double> out(n);
  std::visit(Overloaded{
                 [&](const ConstantSigma& c) {
                   if (c.sigma < 0.0) throw ParameterDomainError("constant sigma must be >= 0");
                   std::fill(out.begin(), out.end(), c.sigma);
                 },
                 [&](const ZeroExpMixture& z) {
                   require_positive(z.nonzero_mean, "zero/exponential mixture mean");
                   for (auto& v : out) v = rng.bernoulli(0.5) ? 0.0 : rng.exponential(z.nonzero_mean);
                 },
             },
             law);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

Moments moments_by_quadrature(const std::function<double(double)>& pdf, double lo, double hi,
                              std::span<const double> breaks) {
  const auto m0 = quad::integrate(pdf, lo, hi, 1e-13, 0.0, breaks);
  const auto m1 = quad::integrate([&](double t) { return t * pdf(t); }, lo, hi, 1e-13, 1e-15, breaks);
  const double mean = m1.value / m0.value;
  const auto m2 = quad::integrate([&](double t) { return (t - mean) * (t - mean) * pdf(t); }, lo,
                                  hi, 1e-13, 0.0, breaks);
  if (!m0.converged || !m2.converged || !std::isfinite(m2.value))
    throw IntegrationFailure("moment integrals did not converge");
  return {mean, m2.value / m0.value};
}

}  // namespace

Moments moments(const PriorSpec& prior) {
  validate(prior);
  return std::visit(
      Overloaded{
          [](const NormalPrior& p) { return Moments{p.mean, p.variance}; },
          [](const ParetoPrior& p) {
            if (p.shape <= 2.0)
              throw VarianceUndefined("pareto variance requires alpha > 2, got " +
                                      format_number(p.shape));
            const double a = p.shape;
            return Moments{a * p.scale / (a - 1.0),
                           p.scale * p.scale * a / ((a - 1.0) * (a - 1.0) * (a - 2.0))};
          },
          [&](const AbsExpPrior&) {
            const double breaks[] = {0.0};
            return moments_by_quadrature([&](double t) { return density(prior, t); }, -kInf, kInf,
                                         breaks);
          },
          [&](const SuperLightPrior&) {
            const double breaks[] = {-2.0, 0.0, 2.0};
            return moments_by_quadrature([&](double t) { return density(prior, t); }, -12.0, 12.0,
                                         breaks);
          },
          [](const UniformImproperPrior&) -> Moments {
            throw UnsupportedOperation("the improper uniform prior has no moments");
          },
      },
      prior);
}

Moments moments(const ErrorModel& error, double sigma) {
  require_positive(sigma, "error scale sigma");
  const double breaks[] = {-sigma, 0.0, sigma};
  return moments_by_quadrature([&](double t) { return density(error, t, sigma); }, -kInf, kInf,
                               breaks);
}

Moments moments(const SigmaLaw& law) {
  return std::visit(Overloaded{
                        [](const ConstantSigma& c) { return Moments{c.sigma, 0.0}; },
                        [](const ZeroExpMixture& z) {
                          const double v = z.nonzero_mean;
                          return Moments{0.5 * v, 0.75 * v * v};
                        },
                    },
                    law);
}

// ---------------------------------------------------------------------------

QuasiunimodalReport check_quasiunimodal(const PriorSpec& prior, std::span<const double> grid) {
  if (grid.size() < 3) throw ParameterDomainError("quasiunimodality grid needs at least 3 points");
  if (!std::is_sorted(grid.begin(), grid.end()))
    throw ParameterDomainError("quasiunimodality grid must be sorted");
  const Support s = support(prior);
  if (grid.front() < s.lo || grid.back() > s.hi)
    throw ParameterDomainError("quasiunimodality grid leaves the prior support");

  const std::size_t n = grid.size();
  std::vector<double> pi(n);
  for (std::size_t i = 0; i < n; ++i) pi[i] = density(prior, grid[i]);

  auto ratio = [](double value, double reference) {
    return reference > 0.0 ? std::min(1.0, value / reference) : 1.0;
  };
  // left[m]: worst pi(x1)/pi(x2) over x2 <= x1 <= grid[m]; right[m] mirrors it.
  std::vector<double> left(n), right(n);
  double running_max = 0.0, worst = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    running_max = std::max(running_max, pi[i]);
    worst = std::min(worst, ratio(pi[i], running_max));
    left[i] = worst;
  }
  running_max = 0.0;
  worst = 1.0;
  for (std::size_t i = n; i-- > 0;) {
    running_max = std::max(running_max, pi[i]);
    worst = std::min(worst, ratio(pi[i], running_max));
    right[i] = worst;
  }
  QuasiunimodalReport best;
  best.epsilon = -1.0;
  for (std::size_t m = 0; m < n; ++m) {
    const double eps = std::min(left[m], right[m]);
    if (eps > best.epsilon) {
      best.epsilon = eps;
      best.quasimode = grid[m];
    }
  }
  best.holds = best.epsilon > 0.0;
  return best;
}

double log_likelihood_excess_moment(const ErrorModel& error, double a, double sigma) {
  require_positive(sigma, "error scale sigma");
  if (a < 0.0) throw ParameterDomainError("tail threshold a must be non-negative");
  const double u = a / sigma;
  // E = 2 sigma^2 * integral over v >= 0 of (v^2 + 2 u v) g(u + v), g the unit density.
  // For the normal, g(u + v) = g(u) exp(-u v - v^2 / 2) keeps the integrand
  // representable when g(u) itself underflows.
  const bool normal = std::holds_alternative<NormalError>(error);
  auto f = [&](double v) {
    const double poly = v * v + 2.0 * u * v;
    if (normal) return poly * std::exp(-u * v - 0.5 * v * v);
    const double s = u + v;
    return poly * quartic_standard_density(s);
  };
  const double w = 1.0 / (1.0 + u);
  const double breaks[] = {w, 4.0 * w, 1.0, 4.0};
  std::vector<double> sorted(std::begin(breaks), std::end(breaks));
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  const auto r = quad::integrate(f, 0.0, kInf, 1e-12, 0.0, sorted);
  if (!std::isfinite(r.value) || !r.converged || !(r.value > 0.0))
    throw IntegrationFailure("excess second moment integral did not converge");
  const double log_g_u = normal ? -0.5 * u * u - 0.5 * std::log(2.0 * kPi) : 0.0;
  return std::log(2.0 * sigma * sigma) + log_g_u + std::log(r.value);
}

double likelihood_excess_moment(const ErrorModel& error, double a, double sigma) {
  return std::exp(log_likelihood_excess_moment(error, a, sigma));
}

TailDominanceReport check_tail_dominating(const PriorSpec& prior, const ErrorModel& error,
                                          std::span<const double> a_grid,
                                          std::span<const double> x_grid,
                                          std::span<const double> sigma_grid) {
  if (!is_proper(prior))
    throw UnsupportedOperation("tail domination is only checked for proper priors");
  for (double v : a_grid) require_positive(v, "tail grid a");
  for (double v : sigma_grid) require_positive(v, "tail grid sigma");
  for (double v : x_grid)
    if (!std::isfinite(v)) throw ParameterDomainError("tail grid x must be finite");

  struct PerRadius {
    double worst_log = -kInf;
    std::vector<TailWitness> witnesses;
  };
  std::vector<PerRadius> per_r(std::size(kTailRadii));
  TailDominanceReport report;

  for (double sigma : sigma_grid) {
    for (double a : a_grid) {
      const double log_excess = log_likelihood_excess_moment(error, a, sigma);
      for (double x : x_grid) {
        if (!(x > a)) continue;
        ++report.pairs_tested;
        for (std::size_t k = 0; k < std::size(kTailRadii); ++k) {
          const double r = kTailRadii[k];
          const double log_ratio =
              log_excess - std::log(sigma * a) - log_density(prior, r * a / sigma);
          if (log_ratio > per_r[k].worst_log) {
            per_r[k].worst_log = log_ratio;
            per_r[k].witnesses.assign(1, TailWitness{a, x, sigma, std::exp(log_ratio)});
          }
        }
      }
    }
  }

  std::size_t best = 0;
  for (std::size_t k = 0; k < per_r.size(); ++k) {
    report.s_by_r.emplace_back(kTailRadii[k], std::exp(per_r[k].worst_log));
    if (per_r[k].worst_log < per_r[best].worst_log) best = k;
  }
  report.best_r = kTailRadii[best];
  report.worst_ratio = std::exp(per_r[best].worst_log);
  report.min_s = report.worst_ratio;
  report.witnesses = per_r[best].witnesses;
  report.feasible = report.pairs_tested > 0 && std::isfinite(report.worst_ratio);
  return report;
}

double estimate_K(const ErrorModel& error, std::span<const double> x_grid,
                  std::span<const double> sigma_grid) {
  double k_hat = 0.0;
  for (double sigma : sigma_grid) {
    require_positive(sigma, "error scale sigma");
    // For a symmetric location family the likelihood posterior is the error law
    // reflected about x, so its second moment about x is sigma^2 times a constant.
    auto f = [&](double t) { return t * t * density(error, t, sigma); };
    const double breaks[] = {sigma, 4.0 * sigma};
    const auto r = quad::integrate(f, 0.0, kInf, 1e-13, 0.0, breaks);
    const auto mass = quad::integrate([&](double t) { return density(error, t, sigma); }, 0.0,
                                      kInf, 1e-13, 0.0, breaks);
    if (!r.converged || !std::isfinite(r.value))
      throw IntegrationFailure("likelihood variance integral did not converge");
    for (double x : x_grid) {
      if (!std::isfinite(x)) throw ParameterDomainError("x grid must be finite");
      k_hat = std::max(k_hat, r.value / mass.value / (sigma * sigma));
    }
  }
  return k_hat;
}

}  // namespace ranklab
