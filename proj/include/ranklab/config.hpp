#pragma once

#include <string>

#include "ranklab/harness.hpp"

namespace ranklab {

/// Parse `key = value` lines ('#' starts a comment). Required keys:
/// true_prior, estimating_prior, error, sigma_schedule, p_schedule, rankers,
/// eval_loss, scaling, replicates, seed. Optional: name, threads.
/// Unknown, duplicate, missing or malformed keys raise ConfigError naming the key.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Inverse of parse_config for every representable configuration.
std::string config_to_text(const ExperimentConfig& cfg);

// Individual value grammars, exposed for reuse and testing.
PriorSpec parse_prior(const std::string& text);
EstimatingPrior parse_estimating_prior(const std::string& text);
ErrorModel parse_error(const std::string& text);
SigmaSchedule parse_sigma_schedule(const std::string& text);
RankerSpec parse_ranker(const std::string& text);
PairwiseLoss parse_loss(const std::string& text);
ScalingRule parse_scaling(const std::string& text);

std::string describe(const RankerSpec& spec);

}  // namespace ranklab
