// ranklab command-line front end: experiments, verification suites and
// oracle comparisons. All output files are written from this thread.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "ranklab/checks.hpp"
#include "ranklab/config.hpp"
#include "ranklab/errors.hpp"
#include "ranklab/format.hpp"
#include "ranklab/harness.hpp"
#include "ranklab/oracle.hpp"

namespace fs = std::filesystem;
using namespace ranklab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;

struct SummaryWriter {
  std::ostringstream text;
  SummaryWriter() { text << "name,metric,value\n"; }
  void add(const std::string& name, const std::string& metric, double value) {
    text << name << ',' << metric << ',' << format_csv_number(value) << '\n';
  }
};

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw FileError("cannot open " + path.string() + " for writing");
  f << content;
  if (!f) throw FileError("failed writing " + path.string());
}

fs::path prepare_out(const std::string& out) {
  fs::path dir(out.empty() ? "." : out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw FileError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

// --seed wins, then RANKLAB_SEED, then the command's own default.
std::uint64_t resolve_seed(const CLI::Option* flag, std::uint64_t flag_value, std::uint64_t fallback) {
  if (flag->count() > 0) return flag_value;
  if (const char* env = std::getenv("RANKLAB_SEED"); env && *env) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError(std::string("RANKLAB_SEED is not a non-negative integer: '") + env + "'");
  }
  return fallback;
}

std::string conditions_csv(const SweepReport& report) {
  std::ostringstream out;
  out << "p,cube_root_of_mean_sigma,mean_of_cube_root_sigma\n";
  for (const auto& c : report.conditions)
    out << c.p << ',' << format_csv_number(c.cube_root_of_mean) << ','
        << format_csv_number(c.mean_of_cube_root) << '\n';
  return out.str();
}

int run_experiment(const ExperimentConfig& cfg, const fs::path& dir, const std::string& stem,
                   bool write_config) {
  const SweepReport report = run_sweep(cfg);
  write_file(dir / (stem + ".csv"), sweep_csv(report));
  write_file(dir / (stem + "_conditions.csv"), conditions_csv(report));
  if (write_config) write_file(dir / "config.txt", config_to_text(cfg));
  SummaryWriter summary;
  summary.add(stem, "seed", static_cast<double>(cfg.seed));
  summary.add(stem, "failed_replicates", static_cast<double>(report.failed_replicates));
  for (const auto& c : report.cells)
    summary.add(stem, "loss_p" + std::to_string(c.p) + "_" + c.ranker, c.loss.mean);
  write_file(dir / "summary.csv", summary.text.str());
  std::cout << "wrote " << (dir / (stem + ".csv")).string() << " (" << report.cells.size() * 3
            << " rows, " << report.failed_replicates << " failed replicates)\n";
  return kExitOk;
}

int run_check_command(const std::string& name, std::uint64_t seed, const fs::path& dir) {
  const CheckReport rep = run_check(name, seed);
  write_file(dir / (name + ".csv"), rep.csv());
  SummaryWriter summary;
  for (const auto& [k, v] : rep.summary) summary.add(name, k, v);
  summary.add(name, "passed", static_cast<double>(rep.count(CaseStatus::Pass)));
  summary.add(name, "failed", static_cast<double>(rep.count(CaseStatus::Fail)));
  summary.add(name, "skipped_precondition", static_cast<double>(rep.count(CaseStatus::SkippedPrecondition)));
  write_file(dir / "summary.csv", summary.text.str());
  if (!rep.passed()) {
    std::cerr << "check " << name << " FAILED: " << rep.count(CaseStatus::Fail) << " failing case(s)";
    std::size_t shown = 0;
    for (const auto& c : rep.cases)
      if (c.status == CaseStatus::Fail && shown++ < 5) std::cerr << (shown == 1 ? ": " : ", ") << c.label;
    std::cerr << '\n';
    return kExitCheckFailed;
  }
  std::cout << "check " << name << " passed (" << rep.count(CaseStatus::Pass) << " pass, "
            << rep.count(CaseStatus::SkippedPrecondition) << " skipped)\n";
  return kExitOk;
}

int run_oracle_command(std::size_t p, std::size_t instances, std::uint64_t seed, const fs::path& dir) {
  constexpr double kMinAgreement = 0.99;
  constexpr double kSeMultiple = 3.0;
  const OracleComparison cmp = compare_posterior_mean_to_oracle(p, instances, seed);
  std::ostringstream rows;
  rows << "instance,agree,gap,combined_se\n";
  for (const auto& c : cmp.cases)
    rows << c.instance << ',' << (c.agree ? 1 : 0) << ',' << format_csv_number(c.gap) << ','
         << format_csv_number(c.combined_se) << '\n';
  write_file(dir / "oracle_compare.csv", rows.str());
  SummaryWriter summary;
  summary.add("oracle_compare", "p", static_cast<double>(p));
  summary.add("oracle_compare", "instances", static_cast<double>(instances));
  summary.add("oracle_compare", "agreement_rate", cmp.agreement_rate());
  summary.add("oracle_compare", "disagreements_beyond_3se", static_cast<double>(cmp.beyond(kSeMultiple)));
  write_file(dir / "summary.csv", summary.text.str());
  const bool ok = cmp.agreement_rate() >= kMinAgreement && cmp.beyond(kSeMultiple) == 0;
  if (!ok) {
    std::cerr << "oracle-compare FAILED: agreement " << cmp.agreement_rate() << ", "
              << cmp.beyond(kSeMultiple) << " disagreement(s) beyond 3 SE\n";
    return kExitCheckFailed;
  }
  std::cout << "oracle-compare agreement " << cmp.agreement_rate() << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ranklab: empirical Bayes ranking experiments and verification suites"};
  app.require_subcommand(1, 1);

  std::string config_path, out_dir = ".", preset_name;
  std::uint64_t seed = 0;
  std::size_t p = 5, instances = 100;

  auto* simulate = app.add_subcommand("simulate", "run a sweep described by a config file");
  simulate->add_option("--config", config_path, "experiment config file (key = value lines)")->required();
  simulate->add_option("--out", out_dir, "output directory");
  auto* sim_seed = simulate->add_option("--seed", seed, "override the config seed");

  auto* preset = app.add_subcommand("preset", "run a packaged experiment: consistent, quartic, superlight");
  preset->add_option("--preset", preset_name, "preset name")
      ->required()
      ->check(CLI::IsMember({"consistent", "quartic", "superlight"}));
  preset->add_option("--out", out_dir, "output directory");
  auto* preset_seed = preset->add_option("--seed", seed, "seed (default 1729)");

  std::string check_help = "run a verification suite:";
  for (const auto& n : check_names()) check_help += " " + n;
  auto* check = app.add_subcommand("check", check_help);
  check->add_option("--preset", preset_name, "check name")->required();
  check->add_option("--out", out_dir, "output directory");
  auto* check_seed = check->add_option("--seed", seed, "seed for randomised suites (default 1)");

  auto* oracle = app.add_subcommand("oracle-compare",
                                    "posterior-mean ranking vs exhaustive Bayes search (hinge loss)");
  oracle->add_option("--p", p, "units per instance (2..8)");
  oracle->add_option("--instances", instances, "number of random instances");
  oracle->add_option("--out", out_dir, "output directory");
  auto* oracle_seed = oracle->add_option("--seed", seed, "seed (default 1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (simulate->parsed()) {
      ExperimentConfig cfg = load_config(config_path);
      cfg.seed = resolve_seed(sim_seed, seed, cfg.seed);
      return run_experiment(cfg, prepare_out(out_dir), "sweep", false);
    }
    if (preset->parsed()) {
      ExperimentConfig cfg = preset_by_name(preset_name);
      cfg.seed = resolve_seed(preset_seed, seed, cfg.seed);
      return run_experiment(cfg, prepare_out(out_dir), preset_name, true);
    }
    if (check->parsed()) {
      const auto& names = check_names();
      if (std::find(names.begin(), names.end(), preset_name) == names.end())
        throw ConfigError("unknown check '" + preset_name + "'");
      return run_check_command(preset_name, resolve_seed(check_seed, seed, 1), prepare_out(out_dir));
    }
    return run_oracle_command(p, instances, resolve_seed(oracle_seed, seed, 1), prepare_out(out_dir));
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const FileError& e) {
    std::cerr << "file error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const SizeLimitError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParameterDomainError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitCheckFailed;
  }
}
