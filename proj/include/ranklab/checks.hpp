#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace ranklab {

enum class CaseStatus { Pass, Fail, SkippedPrecondition };

std::string to_string(CaseStatus s);

struct CheckCase {
  std::string label;
  CaseStatus status = CaseStatus::Pass;
  std::vector<double> fields;  // aligned with CheckReport::columns
};

struct CheckReport {
  std::string name;
  std::vector<std::string> columns;
  std::vector<CheckCase> cases;
  std::vector<std::pair<std::string, double>> summary;

  std::size_t count(CaseStatus s) const;
  bool passed() const { return count(CaseStatus::Fail) == 0; }
  double summary_value(const std::string& key) const;
  /// `case,status,<columns...>` with 17 significant digits.
  std::string csv() const;
};

/// conjugate, sandwich, inequality, lemma24, pmbound41, pmbound43, taildom.
const std::vector<std::string>& check_names();

/// Runs the named suite on its default grid. Throws ConfigError for unknown names.
CheckReport run_check(const std::string& name, std::uint64_t seed);

CheckReport check_conjugate(std::uint64_t seed, std::size_t cases = 1000);
CheckReport check_sandwich(std::uint64_t seed, std::size_t instances = 100000);
CheckReport check_inequality(std::uint64_t seed, std::size_t quadruples = 1000000);
CheckReport check_moment_ratios();
CheckReport check_quartic_mean_bound();
CheckReport check_superlight_mean_bound();
CheckReport check_taildom();

/// Set by the environment variable RANKLAB_TEST_CORRUPT_FOOTRULE (any value):
/// the sandwich suite then reports a deliberately wrong footrule distance so
/// the failure path can be exercised end to end.
bool footrule_corruption_requested();

}  // namespace ranklab
