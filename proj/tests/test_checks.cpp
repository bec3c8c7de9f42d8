#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <string>

#include "ranklab/checks.hpp"
#include "ranklab/errors.hpp"

using namespace ranklab;

namespace {

std::size_t column(const CheckReport& r, const std::string& name) {
  for (std::size_t i = 0; i < r.columns.size(); ++i)
    if (r.columns[i] == name) return i;
  FAIL("missing column " << name);
  return 0;
}

// Posterior mean by a dense trapezoid rule on log-kernel values, independent of the library.
template <class LogKernel>
double trapezoid_mean(LogKernel lk, double lo, double hi, std::size_t n) {
  const double h = (hi - lo) / static_cast<double>(n);
  double peak = -1e300;
  for (std::size_t i = 0; i <= n; ++i) peak = std::max(peak, lk(lo + h * static_cast<double>(i)));
  double m0 = 0.0, m1 = 0.0;
  for (std::size_t i = 0; i <= n; ++i) {
    const double t = lo + h * static_cast<double>(i);
    const double w = (i == 0 || i == n ? 0.5 : 1.0) * std::exp(lk(t) - peak);
    m0 += w;
    m1 += w * t;
  }
  return m1 / m0;
}

}  // namespace

TEST_CASE("conjugate check") {
  const auto r = check_conjugate(1, 200);
  CHECK(r.passed());
  CHECK(r.cases.size() == 200);
  CHECK(r.summary_value("max_abs_mean_error") < 1e-8);
}

TEST_CASE("sandwich and inequality checks") {
  const auto s = check_sandwich(2, 3000);
  CHECK(s.passed());
  CHECK(s.summary_value("violations") == 0.0);
  const auto q = check_inequality(3, 40000);
  CHECK(q.passed());
  CHECK(q.summary_value("violations") == 0.0);
}

TEST_CASE("posterior moment ratio check") {
  const auto r = check_moment_ratios();
  CHECK(r.passed());
  CHECK(r.cases.size() == 3 * 41);
  CHECK(r.summary_value("max_mean_ratio") < 10.0);
  CHECK(r.summary_value("max_variance_ratio") < 10.0);
}

TEST_CASE("quartic-error mean bound against an independent bound and posterior") {
  const auto r = check_quartic_mean_bound();
  CHECK(r.passed());
  CHECK(r.count(CaseStatus::SkippedPrecondition) > 0);
  CHECK(r.count(CaseStatus::Pass) > 0);
  const double mu = 1.25, tau2 = 2.0 / 9.0, tau = std::sqrt(tau2);
  const auto cs = column(r, "sigma"), cx = column(r, "x"), cm = column(r, "posterior_mean"), cb = column(r, "bound");
  int verified = 0;
  for (const auto& c : r.cases) {
    if (c.status != CaseStatus::Pass) continue;
    const double s = c.fields[cs], x = c.fields[cx];
    const double d = x - mu;
    const double bound = 0.5 * (x + mu) + 289.0 / 4096.0 * std::exp(2.0) * tau2 * std::pow(s, -4) *
                                              std::pow(d, 5) * std::exp(-d * d / (8 * tau2));
    CHECK(c.fields[cb] == doctest::Approx(bound).epsilon(1e-12));
    if (verified < 6) {
      auto lk = [&](double t) {
        const double u = (x - t) / s;
        return -0.5 * (t - mu) * (t - mu) / tau2 - std::log1p(u * u * u * u);
      };
      const double m = trapezoid_mean(lk, mu - 15 * tau, std::max(mu + 15 * tau, x + 60 * s), 2000000);
      CHECK(c.fields[cm] == doctest::Approx(m).epsilon(1e-6));
      ++verified;
    }
  }
}

TEST_CASE("superlight mean bound against an independent posterior") {
  const auto r = check_superlight_mean_bound();
  CHECK(r.passed());
  const auto cs = column(r, "sigma"), cx = column(r, "x"), cm = column(r, "posterior_mean"), cb = column(r, "bound");
  for (const auto& c : r.cases) {
    if (c.status != CaseStatus::Pass) continue;
    const double s = c.fields[cs], x = c.fields[cx];
    REQUIRE(x * x >= 4 * std::log(3.0) - 8 * std::log(s));
    CHECK(c.fields[cb] == doctest::Approx(x - 1.0 / x).epsilon(1e-14));
    auto lk = [&](double t) { return -std::exp(t * t / 4.0) - 0.5 * (x - t) * (x - t) / (s * s); };
    const double m = trapezoid_mean(lk, -8.0, x + 20 * s, 2000000);
    CHECK(c.fields[cm] == doctest::Approx(m).epsilon(1e-6));
  }
}

TEST_CASE("tail-domination check") {
  const auto r = check_taildom();
  CHECK(r.passed());
}

TEST_CASE("check registry") {
  CHECK(check_names().size() == 7);
  CHECK_THROWS_AS(run_check("nope", 1), ConfigError);
  const auto r = check_moment_ratios();
  const std::string csv = r.csv();
  CHECK(csv.rfind("case,status,sigma,x,", 0) == 0);
}
