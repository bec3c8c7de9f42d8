// Acceptance gate: one PASS/FAIL line per criterion, tolerances pinned below.
//
// Exit status is the number of failing criteria that are not listed with
// --known-red. Known-red criteria still print FAIL; they are listed so that a
// documented, understood failure does not mask new regressions.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ranklab/checks.hpp"
#include "ranklab/harness.hpp"
#include "ranklab/oracle.hpp"

using namespace ranklab;

namespace {

constexpr double kConjugateTol = 1e-8;
constexpr double kConjugateSeconds = 10.0;
constexpr double kSandwichSeconds = 30.0;
constexpr double kInequalitySeconds = 10.0;
constexpr double kMomentRatioCap = 10.0;
constexpr double kOracleAgreement = 0.99;
constexpr double kOracleSeMultiple = 3.0;
constexpr std::size_t kOracleInstances = 100;
constexpr std::size_t kOracleSamples = 100000;
constexpr double kConsistentDrop = 0.25;     // loss(400) < 0.25 * loss(25)
constexpr double kConsistentSeSlack = 2.0;   // step increase allowed within 2 combined SE
constexpr double kConsistentSeconds = 600.0;
constexpr double kNoDecayFraction = 0.5;     // PM loss at max p >= 0.5 * loss at min p
constexpr double kValueDecayFactor = 2.0;    // value per-pair loss falls at least 2x
constexpr double kCounterexampleSeconds = 900.0;
constexpr std::uint64_t kCheckSeed = 1;
constexpr std::uint64_t kOracleSeed = 1;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

template <class F>
auto timed(F&& f, double& secs) {
  const auto t0 = std::chrono::steady_clock::now();
  auto r = f();
  secs = seconds_since(t0);
  return r;
}

Outcome criterion_conjugate() {
  double secs = 0;
  const auto r = timed([] { return check_conjugate(kCheckSeed, 1000); }, secs);
  const double em = r.summary_value("max_abs_mean_error");
  const double ev = r.summary_value("max_rel_variance_error");
  return {em < kConjugateTol && ev < kConjugateTol && secs < kConjugateSeconds,
          "max |mean err| " + fmt("%.2e", em) + ", max rel var err " + fmt("%.2e", ev) + ", " +
              fmt("%.1f s", secs)};
}

Outcome criterion_sandwich() {
  double secs = 0;
  const auto r = timed([] { return check_sandwich(kCheckSeed, 100000); }, secs);
  const double v = r.summary_value("violations");
  return {v == 0.0 && r.passed() && secs < kSandwichSeconds,
          fmt("%.0f violations in 100000 instances, ", v) + fmt("%.1f s", secs)};
}

Outcome criterion_inequality() {
  double secs = 0;
  const auto r = timed([] { return check_inequality(kCheckSeed, 1000000); }, secs);
  const double v = r.summary_value("violations");
  return {v == 0.0 && r.passed() && secs < kInequalitySeconds,
          fmt("%.0f violations in 1000000 quadruples, ", v) + fmt("%.1f s", secs)};
}

Outcome criterion_bound_check(const CheckReport& r) {
  const auto tested = r.count(CaseStatus::Pass) + r.count(CaseStatus::Fail);
  return {r.passed() && tested > 0,
          std::to_string(r.count(CaseStatus::Fail)) + " failures of " + std::to_string(tested) +
              " tested (" + std::to_string(r.count(CaseStatus::SkippedPrecondition)) +
              " outside preconditions), min margin " + fmt("%.3g", r.summary_value("min_margin"))};
}

Outcome criterion_moment_ratios() {
  const auto r = check_moment_ratios();
  const double m = r.summary_value("max_mean_ratio"), v = r.summary_value("max_variance_ratio");
  return {m < kMomentRatioCap && v < kMomentRatioCap && r.passed(),
          "max mean ratio " + fmt("%.3g", m) + ", max variance ratio " + fmt("%.3g", v)};
}

Outcome criterion_oracle() {
  bool ok = true;
  std::ostringstream d;
  for (std::size_t p = 3; p <= 6; ++p) {
    const auto c = compare_posterior_mean_to_oracle(p, kOracleInstances, kOracleSeed, kOracleSamples);
    const double rate = c.agreement_rate();
    const std::size_t far = c.beyond(kOracleSeMultiple);
    ok = ok && rate >= kOracleAgreement && far == 0;
    d << "p=" << p << " agree " << rate << " (" << far << " beyond 3 SE)" << (p < 6 ? "; " : "");
  }
  return {ok, d.str()};
}

struct PresetRun {
  SweepReport report;
  std::string csv;
  double seconds = 0.0;
};

PresetRun run_preset(const ExperimentConfig& cfg) {
  PresetRun r;
  r.report = timed([&] { return run_sweep(cfg); }, r.seconds);
  r.csv = sweep_csv(r.report);
  return r;
}

Outcome criterion_consistency(const PresetRun& run, const ExperimentConfig& cfg) {
  bool ok = run.seconds < kConsistentSeconds && run.report.failed_replicates == 0;
  std::ostringstream d;
  for (const auto& spec : cfg.rankers) {
    const std::string name = ranker_name(spec);
    const auto& first = run.report.cell(cfg.p_schedule.front(), name).loss;
    const auto& last = run.report.cell(cfg.p_schedule.back(), name).loss;
    bool monotone = true;
    for (std::size_t k = 0; k + 1 < cfg.p_schedule.size(); ++k) {
      const auto& a = run.report.cell(cfg.p_schedule[k], name).loss;
      const auto& b = run.report.cell(cfg.p_schedule[k + 1], name).loss;
      if (b.mean - a.mean > kConsistentSeSlack * std::hypot(a.std_error, b.std_error)) monotone = false;
    }
    const double ratio = last.mean / first.mean;
    ok = ok && ratio < kConsistentDrop && monotone;
    d << name << " ratio " << fmt("%.3f", ratio) << (monotone ? "" : " NON-MONOTONE") << "; ";
  }
  d << fmt("%.1f s", run.seconds);
  return {ok, d.str()};
}

Outcome criterion_inconsistency(const std::vector<std::pair<ExperimentConfig, const PresetRun*>>& runs) {
  bool ok = true;
  std::ostringstream d;
  for (const auto& [cfg, run] : runs) {
    const std::size_t p0 = cfg.p_schedule.front(), p1 = cfg.p_schedule.back();
    const auto& pm0 = run->report.cell(p0, "posterior_mean").loss;
    const auto& pm1 = run->report.cell(p1, "posterior_mean").loss;
    auto per_pair = [&](std::size_t p) {
      const double scaled = run->report.cell(p, "value").scaled_pairs.mean;
      return scaled / scale_factor(cfg.scaling, p) / (double(p) * double(p));
    };
    const double pm_ratio = pm1.mean / pm0.mean;
    const double value_drop = per_pair(p0) / per_pair(p1);
    const bool this_ok = pm_ratio >= kNoDecayFraction && value_drop >= kValueDecayFactor &&
                         run->seconds < kCounterexampleSeconds && run->report.failed_replicates == 0;
    ok = ok && this_ok;
    d << cfg.name << ": PM loss ratio " << fmt("%.3f", pm_ratio) << ", value per-pair drop "
      << fmt("%.2fx", value_drop) << ", " << fmt("%.1f s", run->seconds) << (this_ok ? "" : " [fails]")
      << "; ";
  }
  return {ok, d.str()};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> known_red;
  for (int i = 1; i < argc; ++i) {
    if (std::string(argv[i]) == "--known-red" && i + 1 < argc) {
      std::stringstream list(argv[++i]);
      for (std::string item; std::getline(list, item, ',');)
        if (!item.empty()) known_red.insert(std::stoi(item));
    }
  }

  int unexpected = 0;
  auto report = [&](int id, const char* title, const Outcome& o) {
    const bool red = !o.pass;
    const bool excused = red && known_red.count(id);
    std::printf("criterion %2d %s: %s -- %s%s\n", id, o.pass ? "PASS" : "FAIL", title, o.detail.c_str(),
                excused ? " [known red]" : (!red && known_red.count(id) ? " [listed as known red but passing]" : ""));
    std::fflush(stdout);
    if (red && !excused) ++unexpected;
  };

  report(1, "conjugate agreement", criterion_conjugate());
  report(2, "footrule sandwich", criterion_sandwich());
  report(3, "misranking-magnitude inequality", criterion_inequality());
  report(4, "superlight shrinkage bound", criterion_bound_check(check_superlight_mean_bound()));
  report(5, "normal-prior quartic-error bound", criterion_bound_check(check_quartic_mean_bound()));
  report(6, "posterior mean/variance ratios", criterion_moment_ratios());
  report(7, "posterior mean vs Bayes oracle", criterion_oracle());

  const auto consistent = preset_consistent();
  const auto quartic = preset_counterexample_quartic();
  const auto superlight = preset_counterexample_superlight();
  const PresetRun run_c = run_preset(consistent);
  report(8, "consistency trend", criterion_consistency(run_c, consistent));
  const PresetRun run_q = run_preset(quartic);
  const PresetRun run_s = run_preset(superlight);
  report(9, "inconsistency direction", criterion_inconsistency({{quartic, &run_q}, {superlight, &run_s}}));

  // rerun with a different worker count; output must not depend on scheduling
  bool same = true;
  std::ostringstream d;
  for (auto [cfg, first] : {std::pair{consistent, &run_c}, {quartic, &run_q}, {superlight, &run_s}}) {
    cfg.threads = 3;
    const bool eq = sweep_csv(run_sweep(cfg)) == first->csv;
    same = same && eq;
    d << cfg.name << (eq ? " identical" : " DIFFERS") << "; ";
  }
  report(10, "determinism", {same, d.str() + "rerun with 3 workers"});

  std::printf("%d unexpected failure(s)\n", unexpected);
  return unexpected;
}
