#include "ranklab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <numeric>
#include <optional>
#include <sstream>
#include <thread>

#include "ranklab/errors.hpp"
#include "ranklab/format.hpp"

namespace ranklab {

std::string describe(const EstimatingPrior& prior) {
  if (std::holds_alternative<EmpiricalMomentsNormal>(prior)) return "empirical";
  return describe(std::get<PriorSpec>(prior));
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.p_schedule.empty()) throw ConfigError("p_schedule must not be empty");
  for (std::size_t i = 0; i < cfg.p_schedule.size(); ++i) {
    if (cfg.p_schedule[i] < 2) throw ConfigError("p_schedule entries must be >= 2");
    if (i > 0 && cfg.p_schedule[i] <= cfg.p_schedule[i - 1])
      throw ConfigError("p_schedule must be strictly increasing");
  }
  if (cfg.replicates < 1) throw ConfigError("replicates must be >= 1");
  if (cfg.rankers.empty()) throw ConfigError("rankers must not be empty");
  if (!is_proper(cfg.true_prior)) throw ConfigError("true_prior must be a proper distribution");
  try {
    validate(cfg.true_prior);
    if (const auto* p = std::get_if<PriorSpec>(&cfg.estimating_prior)) validate(*p);
  } catch (const ParameterDomainError& e) {
    throw ConfigError(e.what());
  }
  for (const auto& r : cfg.rankers)
    if (const auto* f = std::get_if<FootruleRank>(&r); f && f->mc_samples < 1000)
      throw ConfigError("footrule ranker needs at least 1000 samples");
}

Instance generate_instance(const ExperimentConfig& cfg, std::size_t p, RngStream& rng) {
  if (p < 2) throw ParameterDomainError("instances need p >= 2");
  Instance inst;
  inst.theta = sample(cfg.true_prior, rng, p);
  const auto sigmas = sample(cfg.sigma_schedule.at(p), rng, p);
  inst.units.resize(p);
  for (std::size_t i = 0; i < p; ++i) {
    const double noise = sigmas[i] > 0.0 ? sample(cfg.error, sigmas[i], rng, 1)[0] : 0.0;
    inst.units[i] = UnitData{inst.theta[i] + noise, sigmas[i], i};
  }
  return inst;
}

PriorSpec empirical_moments_prior(std::span<const UnitData> units) {
  if (units.size() < 2) throw ParameterDomainError("empirical prior needs at least two units");
  const double n = static_cast<double>(units.size());
  double mean = 0.0, mean_s2 = 0.0;
  for (const auto& u : units) {
    mean += u.x;
    mean_s2 += u.sigma * u.sigma;
  }
  mean /= n;
  mean_s2 /= n;
  double ss = 0.0;
  for (const auto& u : units) ss += (u.x - mean) * (u.x - mean);
  const double var = ss / (n - 1.0);
  return NormalPrior{mean, std::max(var - mean_s2, 1e-6)};
}

MisrankedSet misranked_set(const Ranking& perm, std::span<const double> theta) {
  if (perm.size() != theta.size()) throw ShapeError("ranking and theta sizes differ");
  const auto order = perm.order();
  MisrankedSet m;
  for (std::size_t a = 0; a < order.size(); ++a)
    for (std::size_t b = a + 1; b < order.size(); ++b) {
      const double ti = theta[order[a]], tj = theta[order[b]];
      if (ti < tj) {
        ++m.count;
        m.weighted_gap += tj - ti;
      }
    }
  return m;
}

const SweepCell& SweepReport::cell(std::size_t p, const std::string& ranker) const {
  for (const auto& c : cells)
    if (c.p == p && c.ranker == ranker) return c;
  throw ShapeError("no sweep cell for p=" + std::to_string(p) + ", ranker=" + ranker);
}

namespace {

Statistic summarize(const std::vector<double>& xs) {
  Statistic s;
  if (xs.empty()) return s;
  const double n = static_cast<double>(xs.size());
  s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double v : xs) ss += (v - s.mean) * (v - s.mean);
    s.std_error = std::sqrt(ss / (n - 1.0) / n);
  }
  return s;
}

// One replicate: every ranker sees the same instance.
std::optional<std::vector<TrialResult>> run_replicate(const ExperimentConfig& cfg,
                                                      const PairwiseLoss& eval, std::size_t p,
                                                      std::size_t rep) {
  RngStream rng = RngStream::derive(cfg.seed, {p, rep});
  const Instance inst = generate_instance(cfg, p, rng);
  try {
    PriorSpec est;
    if (std::holds_alternative<EmpiricalMomentsNormal>(cfg.estimating_prior))
      est = empirical_moments_prior(inst.units);
    else
      est = std::get<PriorSpec>(cfg.estimating_prior);

    std::vector<PosteriorGrid> posts;
    if (std::any_of(cfg.rankers.begin(), cfg.rankers.end(), needs_posteriors))
      posts = compute_posteriors(inst.units, est, cfg.error);

    std::vector<TrialResult> out;
    for (std::size_t k = 0; k < cfg.rankers.size(); ++k) {
      RngStream ranker_rng = RngStream::derive(cfg.seed, {p, rep, 1000 + k});
      const Ranking perm = apply_ranker(cfg.rankers[k], inst.units, est, cfg.error, posts, ranker_rng);
      const MisrankedSet m = misranked_set(perm, inst.theta);
      TrialResult t;
      t.p = p;
      t.ranker = ranker_name(cfg.rankers[k]);
      t.loss = additive_loss(perm, inst.theta, eval, cfg.scaling);
      t.misranked_pairs = m.count;
      t.weighted_gap = m.weighted_gap;
      t.replicate = rep;
      out.push_back(std::move(t));
    }
    return out;
  } catch (const DegeneratePosterior&) {
    return std::nullopt;
  } catch (const IntegrationFailure&) {
    return std::nullopt;
  }
}

}  // namespace

std::vector<ConditionRow> small_error_conditions(const ExperimentConfig& cfg) {
  std::vector<ConditionRow> rows;
  for (std::size_t p : cfg.p_schedule) {
    const double pre = scale_factor(cfg.scaling, p) * static_cast<double>(p) * static_cast<double>(p);
    const SigmaLaw law = cfg.sigma_schedule.at(p);
    double mean_sigma, mean_cbrt;
    if (const auto* c = std::get_if<ConstantSigma>(&law)) {
      mean_sigma = c->sigma;
      mean_cbrt = std::cbrt(c->sigma);
    } else {
      const double v = std::get<ZeroExpMixture>(law).nonzero_mean;
      mean_sigma = 0.5 * v;
      mean_cbrt = 0.5 * std::cbrt(v) * std::tgamma(4.0 / 3.0);
    }
    rows.push_back({p, pre * std::cbrt(mean_sigma), pre * mean_cbrt});
  }
  return rows;
}

SweepReport run_sweep(const ExperimentConfig& cfg) {
  validate(cfg);
  PairwiseLoss eval = cfg.eval_loss;
  if (auto* per = std::get_if<PERLoss>(&eval); per && !per->ref_cdf) {
    const PriorSpec truth = cfg.true_prior;
    per->ref_cdf = [truth](double t) { return cdf(truth, t); };
  }

  struct Task {
    std::size_t p, rep;
  };
  std::vector<Task> tasks;
  for (std::size_t p : cfg.p_schedule)
    for (std::size_t r = 0; r < cfg.replicates; ++r) tasks.push_back({p, r});

  std::vector<std::optional<std::vector<TrialResult>>> results(tasks.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      try {
        results[i] = run_replicate(cfg, eval, tasks[i].p, tasks[i].rep);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        next.store(tasks.size());
      }
    }
  };
  unsigned n_threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, tasks.size()));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  // Deterministic reduce in (p, replicate) order.
  SweepReport report;
  report.seed = cfg.seed;
  report.conditions = small_error_conditions(cfg);
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (!results[i]) {
      ++report.failed_replicates;
      continue;
    }
    for (auto& t : *results[i]) report.trials.push_back(std::move(t));
  }

  std::vector<std::string> names;
  for (const auto& r : cfg.rankers) names.push_back(ranker_name(r));
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  for (std::size_t p : cfg.p_schedule) {
    const double s = scale_factor(cfg.scaling, p);
    for (const auto& name : names) {
      std::vector<double> loss, pairs, gap;
      for (const auto& t : report.trials) {
        if (t.p != p || t.ranker != name) continue;
        loss.push_back(t.loss);
        pairs.push_back(s * static_cast<double>(t.misranked_pairs));
        gap.push_back(s * t.weighted_gap);
      }
      SweepCell c;
      c.p = p;
      c.ranker = name;
      c.loss = summarize(loss);
      c.scaled_pairs = summarize(pairs);
      c.scaled_gap = summarize(gap);
      c.replicates = loss.size();
      report.cells.push_back(std::move(c));
    }
  }
  return report;
}

std::string sweep_csv(const SweepReport& report) {
  std::ostringstream out;
  out << "p,ranker,metric,mean,std_error,replicates,seed\n";
  std::vector<const SweepCell*> cells;
  for (const auto& c : report.cells) cells.push_back(&c);
  std::stable_sort(cells.begin(), cells.end(), [](const SweepCell* a, const SweepCell* b) {
    return a->p != b->p ? a->p < b->p : a->ranker < b->ranker;
  });
  for (const SweepCell* c : cells) {
    const std::pair<const char*, const Statistic*> metrics[] = {
        {"loss", &c->loss}, {"scaled_gap", &c->scaled_gap}, {"scaled_pairs", &c->scaled_pairs}};
    for (const auto& [name, stat] : metrics)
      out << c->p << ',' << c->ranker << ',' << name << ',' << format_csv_number(stat->mean) << ','
          << format_csv_number(stat->std_error) << ',' << c->replicates << ',' << report.seed
          << '\n';
  }
  return out.str();
}

void emit_csv(const SweepReport& report, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw FileError("cannot open " + path + " for writing");
  f << sweep_csv(report);
  if (!f) throw FileError("failed writing " + path);
}

// ---------------------------------------------------------------------------

ExperimentConfig preset_consistent() {
  ExperimentConfig c;
  c.name = "consistent";
  c.true_prior = NormalPrior{0.0, 1.0};
  c.estimating_prior = EmpiricalMomentsNormal{};
  c.error = NormalError{};
  c.sigma_schedule = {SigmaSchedule::Rule::PowerOfP, 1.0};
  c.p_schedule = {25, 50, 100, 200, 400};
  c.rankers = {ValueRank{}, PosteriorMeanRank{}, PERRank{}};
  c.eval_loss = HingeDiff{};
  c.scaling = ScalingRule::PerPair;
  c.replicates = 200;
  c.seed = kPresetSeed;
  return c;
}

ExperimentConfig preset_counterexample_quartic() {
  ExperimentConfig c;
  c.name = "quartic";
  c.true_prior = ParetoPrior{1.0, 4.0};
  c.estimating_prior = PriorSpec{NormalPrior{1.25, 2.0 / 9.0}};
  c.error = QuarticError{};
  c.sigma_schedule = {SigmaSchedule::Rule::ZeroExpPower, 0.5};
  c.p_schedule = {50, 100, 200, 400, 800};
  c.rankers = {ValueRank{}, PosteriorMeanRank{}};
  c.eval_loss = ZeroOne{};
  c.scaling = ScalingRule::PerUnit;
  c.replicates = 200;
  c.seed = kPresetSeed;
  return c;
}

ExperimentConfig preset_counterexample_superlight() {
  ExperimentConfig c;
  c.name = "superlight";
  c.true_prior = AbsExpPrior{};
  c.estimating_prior = PriorSpec{SuperLightPrior{}};
  c.error = NormalError{};
  c.sigma_schedule = {SigmaSchedule::Rule::ZeroExpLogSquare, 0.0};
  c.p_schedule = {50, 100, 200, 400, 800};
  c.rankers = {ValueRank{}, PosteriorMeanRank{}};
  c.eval_loss = ZeroOne{};
  c.scaling = ScalingRule::Total;
  c.replicates = 200;
  c.seed = kPresetSeed;
  return c;
}

ExperimentConfig preset_by_name(const std::string& name) {
  if (name == "consistent") return preset_consistent();
  if (name == "quartic") return preset_counterexample_quartic();
  if (name == "superlight") return preset_counterexample_superlight();
  throw ConfigError("unknown preset '" + name + "' (expected consistent, quartic or superlight)");
}

}  // namespace ranklab
