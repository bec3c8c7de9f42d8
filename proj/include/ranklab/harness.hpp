#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ranklab/distributions.hpp"
#include "ranklab/losses.hpp"
#include "ranklab/rankers.hpp"
#include "ranklab/random.hpp"

namespace ranklab {

/// Normal prior refitted to each instance by the method of moments.
struct EmpiricalMomentsNormal {
  bool operator==(const EmpiricalMomentsNormal&) const = default;
};

using EstimatingPrior = std::variant<PriorSpec, EmpiricalMomentsNormal>;

std::string describe(const EstimatingPrior& prior);

struct ExperimentConfig {
  std::string name = "custom";
  PriorSpec true_prior = NormalPrior{};
  EstimatingPrior estimating_prior = EmpiricalMomentsNormal{};
  ErrorModel error = NormalError{};
  SigmaSchedule sigma_schedule{};
  std::vector<std::size_t> p_schedule;
  std::vector<RankerSpec> rankers;
  PairwiseLoss eval_loss = HingeDiff{};
  ScalingRule scaling = ScalingRule::Total;
  std::size_t replicates = 1;
  std::uint64_t seed = 0;
  /// Worker threads for replicates; 0 means one per hardware thread.
  unsigned threads = 0;
};

/// Throws ConfigError describing the first invalid field.
void validate(const ExperimentConfig& cfg);

struct Instance {
  std::vector<double> theta;
  std::vector<UnitData> units;
};

Instance generate_instance(const ExperimentConfig& cfg, std::size_t p, RngStream& rng);

/// Normal(mean of x, max(var of x - mean of sigma^2, 1e-6)).
PriorSpec empirical_moments_prior(std::span<const UnitData> units);

struct MisrankedSet {
  std::uint64_t count = 0;
  double weighted_gap = 0.0;
};

/// Pairs ranked i above j with theta_i < theta_j, and the sum of theta_j - theta_i over them.
MisrankedSet misranked_set(const Ranking& perm, std::span<const double> theta);

struct TrialResult {
  std::size_t p = 0;
  std::string ranker;
  double loss = 0.0;
  std::uint64_t misranked_pairs = 0;
  double weighted_gap = 0.0;
  std::size_t replicate = 0;
};

struct Statistic {
  double mean = 0.0;
  double std_error = 0.0;
};

struct SweepCell {
  std::size_t p = 0;
  std::string ranker;
  Statistic loss;
  Statistic scaled_pairs;  // s(p) |M_p|
  Statistic scaled_gap;    // s(p) * sum of gaps over M_p
  std::size_t replicates = 0;
};

/// Both readings of the small-error condition, s(p) p^2 E(sigma)^(1/3) and
/// s(p) p^2 E(sigma^(1/3)), evaluated for the configured schedule.
struct ConditionRow {
  std::size_t p = 0;
  double cube_root_of_mean = 0.0;
  double mean_of_cube_root = 0.0;
};

struct SweepReport {
  std::uint64_t seed = 0;
  std::vector<SweepCell> cells;  // sorted by (p, ranker)
  std::vector<TrialResult> trials;
  std::vector<ConditionRow> conditions;
  std::size_t failed_replicates = 0;

  const SweepCell& cell(std::size_t p, const std::string& ranker) const;
};

SweepReport run_sweep(const ExperimentConfig& cfg);

std::vector<ConditionRow> small_error_conditions(const ExperimentConfig& cfg);

/// CSV text: header `p,ranker,metric,mean,std_error,replicates,seed`.
std::string sweep_csv(const SweepReport& report);
void emit_csv(const SweepReport& report, const std::string& path);

ExperimentConfig preset_consistent();
ExperimentConfig preset_counterexample_quartic();
ExperimentConfig preset_counterexample_superlight();
/// By name: consistent, quartic, superlight. Throws ConfigError otherwise.
ExperimentConfig preset_by_name(const std::string& name);

inline constexpr std::uint64_t kPresetSeed = 1729;

}  // namespace ranklab
