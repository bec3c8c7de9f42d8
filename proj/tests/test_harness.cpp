#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "ranklab/config.hpp"
#include "ranklab/errors.hpp"
#include "ranklab/format.hpp"
#include "ranklab/harness.hpp"

using namespace ranklab;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.name = "small";
  c.true_prior = NormalPrior{0.0, 1.0};
  c.estimating_prior = EmpiricalMomentsNormal{};
  c.error = NormalError{};
  c.sigma_schedule = {SigmaSchedule::Rule::Constant, 0.3};
  c.p_schedule = {10, 20};
  c.rankers = {ValueRank{}, PosteriorMeanRank{}};
  c.eval_loss = HingeDiff{};
  c.scaling = ScalingRule::PerPair;
  c.replicates = 40;
  c.seed = 5;
  return c;
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("instance generation") {
  auto c = small_config();
  c.sigma_schedule = {SigmaSchedule::Rule::Constant, 0.0};
  RngStream rng(1, 0);
  const auto inst = generate_instance(c, 50, rng);
  for (std::size_t i = 0; i < 50; ++i) CHECK(inst.units[i].x == inst.theta[i]);

  c.true_prior = ParetoPrior{1.0, 4.0};
  const auto par = generate_instance(c, 500, rng);
  for (double t : par.theta) CHECK(t >= 1.0);

  const auto quartic = preset_counterexample_quartic();
  std::size_t zeros = 0, total = 0;
  for (int r = 0; r < 20; ++r) {
    const auto q = generate_instance(quartic, 100, rng);
    for (const auto& u : q.units) zeros += u.sigma == 0.0;
    total += 100;
  }
  const double half_band = 3.0 * std::sqrt(0.25 * total);
  CHECK(std::abs(static_cast<double>(zeros) - 0.5 * total) < half_band);
}

TEST_CASE("empirical moments prior") {
  ExperimentConfig c = small_config();
  c.true_prior = ParetoPrior{1.0, 4.0};
  c.sigma_schedule = {SigmaSchedule::Rule::Constant, 0.0};
  RngStream rng(2, 0);
  const auto inst = generate_instance(c, 100000, rng);
  const auto fitted = std::get<NormalPrior>(empirical_moments_prior(inst.units));
  // the Pareto(1,4) mean is 4/3 and its variance 2/9
  CHECK(std::abs(fitted.mean - 4.0 / 3.0) < 3.0 * std::sqrt(2.0 / 9.0 / 100000.0));
  CHECK(fitted.variance == doctest::Approx(2.0 / 9.0).epsilon(0.1));

  const std::vector<UnitData> same = {{1.0, 0.0, 0}, {1.0, 0.0, 1}};
  CHECK(std::get<NormalPrior>(empirical_moments_prior(same)).variance == 1e-6);

  c.true_prior = NormalPrior{0.0, 1.0};
  c.sigma_schedule = {SigmaSchedule::Rule::Constant, 0.5};
  const auto noisy = generate_instance(c, 2000, rng);
  double m = 0.0, v = 0.0;
  for (const auto& u : noisy.units) m += u.x;
  m /= 2000;
  for (const auto& u : noisy.units) v += (u.x - m) * (u.x - m);
  v /= 1999;
  const auto np = std::get<NormalPrior>(empirical_moments_prior(noisy.units));
  CHECK(np.variance < v);
  CHECK(np.variance == doctest::Approx(v - 0.25).epsilon(1e-9));
}

TEST_CASE("misranked set") {
  const std::vector<double> th = {1.0, 2.0};
  CHECK(misranked_set(Ranking::from_positions({1, 0}), th).count == 0);
  const auto m = misranked_set(Ranking::identity(2), th);
  CHECK(m.count == 1);
  CHECK(m.weighted_gap == 1.0);

  RngStream rng(3, 0);
  for (int k = 0; k < 200; ++k) {
    const std::size_t p = 2 + rng.below(20);
    std::vector<double> t(p);
    for (auto& x : t) x = rng.normal();
    std::vector<std::size_t> pos(p);
    for (std::size_t i = 0; i < p; ++i) pos[i] = i;
    for (std::size_t i = p; i > 1; --i) std::swap(pos[i - 1], pos[rng.below(i)]);
    const Ranking r = Ranking::from_positions(pos);
    std::uint64_t cnt = 0;
    double gap = 0.0;
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = 0; j < p; ++j)
        if (t[i] < t[j] && pos[i] < pos[j]) {
          ++cnt;
          gap += t[j] - t[i];
        }
    const auto got = misranked_set(r, t);
    CHECK(got.count == cnt);
    CHECK(got.weighted_gap == doctest::Approx(gap).epsilon(1e-12));
  }
}

TEST_CASE("sweeps") {
  auto zero = small_config();
  zero.sigma_schedule = {SigmaSchedule::Rule::Constant, 0.0};
  zero.estimating_prior = PriorSpec{NormalPrior{0.0, 1.0}};
  const auto rz = run_sweep(zero);
  for (const auto& c : rz.cells) CHECK(c.loss.mean == 0.0);

  auto c = small_config();
  const auto a = run_sweep(c);
  c.replicates = 160;
  const auto b = run_sweep(c);
  const double ratio = b.cell(20, "value").loss.std_error / a.cell(20, "value").loss.std_error;
  CHECK(ratio == doctest::Approx(0.5).epsilon(0.3));
  CHECK(a.failed_replicates == 0);
  CHECK(a.cells.size() == 4);

  // hinge loss equals the gap-weighted misranked set under the same scaling
  for (const auto& t : a.trials) {
    const double s = 1.0 / (double(t.p) * double(t.p));
    CHECK(t.loss <= t.weighted_gap * s + 1e-12);
    CHECK(t.misranked_pairs <= t.p * (t.p - 1) / 2);
  }
  CHECK(sweep_csv(run_sweep(small_config())) == sweep_csv(a));
}

TEST_CASE("csv output") {
  SweepReport empty;
  CHECK(sweep_csv(empty) == "p,ranker,metric,mean,std_error,replicates,seed\n");
  const auto r = run_sweep(small_config());
  const auto rows = lines(sweep_csv(r));
  CHECK(rows.size() == 1 + 2 * 2 * 3);
  CHECK(rows[1].rfind("10,posterior_mean,loss,", 0) == 0);
  CHECK(rows[2].rfind("10,posterior_mean,scaled_gap,", 0) == 0);
  CHECK(rows[3].rfind("10,posterior_mean,scaled_pairs,", 0) == 0);
  CHECK(rows[4].rfind("10,value,loss,", 0) == 0);
  CHECK_THROWS_AS(emit_csv(r, "/nonexistent-dir/x/out.csv"), FileError);
  CHECK(format_csv_number(0.1) == "0.10000000000000001");
  CHECK(format_number(0.1) == "0.1");
}

TEST_CASE("presets") {
  const auto c = preset_consistent();
  CHECK(c.p_schedule == std::vector<std::size_t>{25, 50, 100, 200, 400});
  CHECK(c.replicates == 200);
  CHECK(c.seed == kPresetSeed);
  CHECK(c.rankers.size() == 3);
  CHECK(c.scaling == ScalingRule::PerPair);
  const auto cond = small_error_conditions(c);
  for (const auto& row : cond)
    CHECK(row.mean_of_cube_root == doctest::Approx(std::pow(double(row.p), -1.0 / 3.0)).epsilon(1e-12));

  const auto q = preset_counterexample_quartic();
  CHECK(q.p_schedule == std::vector<std::size_t>{50, 100, 200, 400, 800});
  CHECK(std::holds_alternative<QuarticError>(q.error));
  CHECK(q.scaling == ScalingRule::PerUnit);
  const auto s = preset_counterexample_superlight();
  CHECK(std::holds_alternative<SuperLightPrior>(std::get<PriorSpec>(s.estimating_prior)));
  CHECK(s.scaling == ScalingRule::Total);
  CHECK(std::get<ZeroExpMixture>(s.sigma_schedule.at(100)).nonzero_mean ==
        doctest::Approx(std::exp(-std::pow(std::log(100.0), 2) / 32.0)));
  CHECK_THROWS_AS(preset_by_name("nope"), ConfigError);
}

TEST_CASE("config files") {
  for (const auto& cfg : {preset_consistent(), preset_counterexample_quartic(), preset_counterexample_superlight()}) {
    const std::string text = config_to_text(cfg);
    CHECK(config_to_text(parse_config(text)) == text);
  }
  const std::string base = config_to_text(small_config());
  // drop one required key
  std::string missing;
  for (const auto& l : lines(base))
    if (l.rfind("eval_loss", 0) != 0) missing += l + "\n";
  try {
    parse_config(missing);
    FAIL("missing key accepted");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("eval_loss") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config(base + "colour = blue\n"), ConfigError);
  CHECK_THROWS_AS(parse_config(base + "seed = 3\n"), ConfigError);
  CHECK_THROWS_AS(parse_prior("pareto(1,-2)"), ConfigError);
  CHECK_THROWS_AS(parse_ranker("magic"), ConfigError);
  CHECK(std::holds_alternative<FootruleRank>(parse_ranker("footrule(2000)")));
  CHECK_THROWS_AS(load_config("/nonexistent/cfg.txt"), FileError);
}
