#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "ranklab/distributions.hpp"
#include "ranklab/errors.hpp"
#include "ranklab/random.hpp"

using namespace ranklab;

namespace {

// Closed-form antiderivative of sqrt(2)/(pi(1+u^4)), independent of the library's table.
double quartic_cdf_closed_form(double u) {
  const double r2 = std::numbers::sqrt2;
  const double log_term = std::log((u * u + r2 * u + 1.0) / (u * u - r2 * u + 1.0));
  const double atan_term = 2.0 * std::atan(r2 * u + 1.0) + 2.0 * std::atan(r2 * u - 1.0);
  return 0.5 + (log_term + atan_term) / (4.0 * std::numbers::pi);
}

// Plain trapezoid rule on a uniform mesh; slow but transparently correct.
template <class F>
double trapezoid(F f, double a, double b, std::size_t n) {
  const double h = (b - a) / static_cast<double>(n);
  double s = 0.5 * (f(a) + f(b));
  for (std::size_t i = 1; i < n; ++i) s += f(a + h * static_cast<double>(i));
  return s * h;
}

double sample_mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_variance(const std::vector<double>& v) {
  const double m = sample_mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

}  // namespace

TEST_CASE("prior densities at reference points") {
  CHECK(density(ParetoPrior{1.0, 4.0}, 1.0) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(density(ParetoPrior{1.0, 4.0}, 0.5) == 0.0);
  CHECK(density(AbsExpPrior{}, 0.0) == 0.0);
  CHECK(density(AbsExpPrior{}, 1.0) == doctest::Approx(0.5 * std::exp(-1.0)).epsilon(1e-14));
  CHECK(density(NormalPrior{0.0, 1.0}, 0.0) ==
        doctest::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi)).epsilon(1e-14));
}

TEST_CASE("quartic error density and cdf") {
  CHECK(density(QuarticError{}, 0.0, 1.0) ==
        doctest::Approx(std::numbers::sqrt2 / std::numbers::pi).epsilon(1e-14));
  // scale family: f_sigma(d) = f_1(d/sigma)/sigma
  CHECK(density(QuarticError{}, 1.0, 2.0) ==
        doctest::Approx(0.5 * density(QuarticError{}, 0.5, 1.0)).epsilon(1e-14));
  for (double u : {-40.0, -7.5, -2.0, -1.0, -0.3, 0.0, 0.2, 0.9, 1.7, 3.0, 12.0, 100.0, 1e4}) {
    INFO("u = " << u);
    CHECK(quartic_standard_cdf(u) == doctest::Approx(quartic_cdf_closed_form(u)).epsilon(1e-10));
    CHECK(cdf(QuarticError{}, u, 1.0) + survival(QuarticError{}, u, 1.0) ==
          doctest::Approx(1.0).epsilon(1e-14));
  }
  for (double p : {1e-6, 0.01, 0.25, 0.5, 0.8, 0.999}) {
    CHECK(quartic_standard_cdf(quartic_standard_quantile(p)) == doctest::Approx(p).epsilon(1e-9));
  }
}

TEST_CASE("parameter domain errors") {
  CHECK_THROWS_AS(validate(NormalPrior{0.0, -1.0}), ParameterDomainError);
  CHECK_THROWS_AS(validate(ParetoPrior{0.0, 4.0}), ParameterDomainError);
  CHECK_THROWS_AS(validate(ParetoPrior{1.0, -4.0}), ParameterDomainError);
  CHECK_THROWS_AS(density(QuarticError{}, 0.0, -1.0), ParameterDomainError);
  RngStream rng(1, 0);
  CHECK_THROWS_AS(sample(UniformImproperPrior{}, rng, 3), UnsupportedOperation);
  CHECK_THROWS_AS(moments(ParetoPrior{1.0, 2.0}), VarianceUndefined);
  CHECK_THROWS_AS(moments(ParetoPrior{1.0, 1.5}), VarianceUndefined);
}

TEST_CASE("prior moments") {
  const Moments n = moments(NormalPrior{0.0, 1.0});
  CHECK(n.mean == 0.0);
  CHECK(n.variance == 1.0);

  // Pareto(1,4): mean 4/3, variance 2/9, checked by trapezoid on a truncated range
  const Moments par = moments(ParetoPrior{1.0, 4.0});
  const PriorSpec pareto = ParetoPrior{1.0, 4.0};
  const double m1 = trapezoid([&](double t) { return t * density(pareto, t); }, 1.0, 400.0, 2000000);
  CHECK(par.mean == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
  CHECK(par.mean == doctest::Approx(m1).epsilon(1e-6));
  CHECK(par.variance == doctest::Approx(2.0 / 9.0).epsilon(1e-14));

  const Moments ae = moments(AbsExpPrior{});
  CHECK(ae.mean == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(ae.variance == doctest::Approx(6.0).epsilon(1e-9));

  // superlight: normalizer against brute trapezoid of exp(-exp(t^2/4))
  const double z = trapezoid([](double t) { return std::exp(-std::exp(t * t / 4.0)); }, -8.0, 8.0, 800000);
  CHECK(superlight_normalizer() == doctest::Approx(z).epsilon(1e-9));
  const Moments sl = moments(SuperLightPrior{});
  const double v = trapezoid([](double t) { return t * t * std::exp(-std::exp(t * t / 4.0)); }, -8.0, 8.0,
                             800000) / z;
  CHECK(sl.mean == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(sl.variance == doctest::Approx(v).epsilon(1e-8));
}

TEST_CASE("error model moments") {
  const Moments q = moments(QuarticError{}, 1.0);
  CHECK(std::abs(q.mean) < 1e-12);
  CHECK(q.variance == doctest::Approx(1.0).epsilon(1e-8));
  const Moments n = moments(NormalError{}, 0.5);
  CHECK(n.variance == doctest::Approx(0.25).epsilon(1e-12));
  // independent oracle for the quartic variance: u^2 f(u) via the closed-form tail beyond 2000
  const double body = trapezoid([](double u) { return u * u * std::numbers::sqrt2 / (std::numbers::pi * (1 + u * u * u * u)); },
                                -2000.0, 2000.0, 4000000);
  const double tails = 2.0 * std::numbers::sqrt2 / (std::numbers::pi * 2000.0);
  CHECK(body + tails == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("sigma laws") {
  RngStream rng(3, 0);
  const auto c = sample(SigmaLaw{ConstantSigma{0.3}}, rng, 5);
  CHECK(c == std::vector<double>(5, 0.3));

  const SigmaLaw mix = ZeroExpMixture{0.2};
  const Moments m = moments(mix);
  CHECK(m.mean == doctest::Approx(0.1));
  // E s^2 = 1/2 * 2 * 0.04, Var = 0.04 - 0.01
  CHECK(m.variance == doctest::Approx(0.03));
  const auto s = sample(mix, rng, 200000);
  std::size_t zeros = 0;
  for (double x : s) zeros += (x == 0.0);
  CHECK(std::abs(static_cast<double>(zeros) / 200000.0 - 0.5) < 0.005);
  CHECK(sample_mean(s) == doctest::Approx(0.1).epsilon(0.02));

  SigmaSchedule sched{SigmaSchedule::Rule::PowerOfP, 1.0};
  CHECK(std::get<ConstantSigma>(sched.at(100)).sigma == doctest::Approx(0.01));
  SigmaSchedule zexp{SigmaSchedule::Rule::ZeroExpPower, 0.5};
  CHECK(std::get<ZeroExpMixture>(zexp.at(400)).nonzero_mean == doctest::Approx(0.05));
}

TEST_CASE("sampling moments") {
  RngStream rng(11, 2);
  const auto par = sample(ParetoPrior{1.0, 4.0}, rng, 1000000);
  const double se = std::sqrt(2.0 / 9.0 / 1e6);
  CHECK(std::abs(sample_mean(par) - 4.0 / 3.0) < 3.0 * se);
  for (double t : par) REQUIRE(t >= 1.0);

  const auto q = sample(QuarticError{}, 2.0, rng, 1000000);
  CHECK(sample_variance(q) == doctest::Approx(4.0).epsilon(0.05));

  const auto sl = sample(SuperLightPrior{}, rng, 200000);
  CHECK(sample_variance(sl) == doctest::Approx(moments(SuperLightPrior{}).variance).epsilon(0.02));

  const auto ae = sample(AbsExpPrior{}, rng, 400000);
  CHECK(sample_variance(ae) == doctest::Approx(6.0).epsilon(0.03));
}

TEST_CASE("samplers are reproducible per (seed, stream)") {
  RngStream a(42, 7), b(42, 7), c(42, 8);
  const auto xa = sample(NormalPrior{0.0, 1.0}, a, 50);
  const auto xb = sample(NormalPrior{0.0, 1.0}, b, 50);
  const auto xc = sample(NormalPrior{0.0, 1.0}, c, 50);
  CHECK(xa == xb);
  CHECK(xa != xc);
}

TEST_CASE("quasiunimodality") {
  std::vector<double> g;
  for (int i = -30; i <= 30; ++i) g.push_back(0.1 * i);
  auto n = check_quasiunimodal(NormalPrior{0.0, 1.0}, g);
  CHECK(n.holds);
  CHECK(n.epsilon == doctest::Approx(1.0));

  std::vector<double> pg;
  for (int i = 1; i <= 10; ++i) pg.push_back(i);
  auto p = check_quasiunimodal(ParetoPrior{1.0, 4.0}, pg);
  CHECK(p.holds);
  CHECK(p.epsilon == doctest::Approx(1.0));

  // grid without the zero of the density; brute pair scan over the grid as oracle
  std::vector<double> ag;
  for (int i = 0; i < 100; ++i) ag.push_back(-5.0 + 10.0 * i / 99.0);
  auto a = check_quasiunimodal(AbsExpPrior{}, ag);
  double best = 0.0;
  for (double m : ag) {
    double eps = 1.0;
    for (double y : ag)
      for (double z : ag) {
        const bool between = (z <= y && y <= m) || (m <= y && y <= z);
        if (!between) continue;
        const double fz = density(AbsExpPrior{}, z);
        if (fz > 0) eps = std::min(eps, density(AbsExpPrior{}, y) / fz);
      }
    best = std::max(best, eps);
  }
  CHECK(a.holds);
  CHECK(a.epsilon > 0.0);
  CHECK(a.epsilon < 1.0);
  CHECK(a.epsilon == doctest::Approx(best).epsilon(1e-12));

  std::vector<double> outside = {0.5, 1.0};
  CHECK_THROWS_AS(check_quasiunimodal(ParetoPrior{1.0, 4.0}, outside), ParameterDomainError);
}

TEST_CASE("tail domination") {
  std::vector<double> a_grid = {0.5, 1, 2, 4, 8, 16};
  std::vector<double> x_grid = {-2, 0, 2, 5, 10, 20};
  std::vector<double> s_grid = {0.05, 0.1, 0.5, 1.0};
  auto normal = check_tail_dominating(NormalPrior{0.0, 1.0}, NormalError{}, a_grid, x_grid, s_grid);
  CHECK(normal.feasible);
  CHECK(std::isfinite(normal.min_s));

  auto light = check_tail_dominating(SuperLightPrior{}, QuarticError{}, a_grid, x_grid, s_grid);
  CHECK_FALSE(light.feasible);

  // the excess moment vanishes as a grows with sigma fixed
  const double e1 = likelihood_excess_moment(NormalError{}, 1.0, 1.0);
  const double e8 = likelihood_excess_moment(NormalError{}, 8.0, 1.0);
  CHECK(e8 < 1e-10 * e1);
  CHECK(std::log(e8) == doctest::Approx(log_likelihood_excess_moment(NormalError{}, 8.0, 1.0)).epsilon(1e-9));
  // brute oracle for the normal: E (Z^2 - a^2)_+ with sigma = 1
  const double brute = 2.0 * trapezoid([](double z) {
    return (z * z - 1.0) * std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  }, 1.0, 40.0, 400000);
  CHECK(e1 == doctest::Approx(brute).epsilon(1e-8));
}

TEST_CASE("K estimate for location-scale families") {
  std::vector<double> xs = {-1.0, 0.0, 2.0};
  std::vector<double> s_small = {0.01, 0.1};
  std::vector<double> s_large = {1.0, 10.0};
  CHECK(estimate_K(NormalError{}, xs, s_small) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(estimate_K(QuarticError{}, xs, s_small) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(estimate_K(QuarticError{}, xs, s_small) ==
        doctest::Approx(estimate_K(QuarticError{}, xs, s_large)).epsilon(1e-6));
}
