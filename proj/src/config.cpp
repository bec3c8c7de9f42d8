#include "ranklab/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "ranklab/errors.hpp"
#include "ranklab/format.hpp"

namespace ranklab {

namespace {

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

// Split on commas that are not inside parentheses.
std::vector<std::string> split_top_level(const std::string& s) {
  std::vector<std::string> parts;
  int depth = 0;
  std::string cur;
  for (char c : s) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      parts.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(trim(cur));
  return parts;
}

double parse_double(const std::string& s, const std::string& what) {
  const std::string t = trim(s);
  try {
    std::size_t used = 0;
    const double v = std::stod(t, &used);
    if (used == t.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError(what + ": expected a number, got '" + t + "'");
}

std::uint64_t parse_uint(const std::string& s, const std::string& what) {
  const std::string t = trim(s);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
    throw ConfigError(what + ": expected a non-negative integer, got '" + t + "'");
  return v;
}

// "name(arg, ...)" or "name" -> (name, args).
std::pair<std::string, std::vector<std::string>> parse_call(const std::string& text,
                                                            const std::string& what) {
  const std::string t = lower(trim(text));
  const auto open = t.find('(');
  if (open == std::string::npos) return {t, {}};
  if (t.back() != ')') throw ConfigError(what + ": unbalanced parentheses in '" + t + "'");
  const std::string inner = t.substr(open + 1, t.size() - open - 2);
  std::vector<std::string> args;
  if (!trim(inner).empty()) args = split_top_level(inner);
  return {trim(t.substr(0, open)), args};
}

void expect_args(const std::vector<std::string>& args, std::size_t n, const std::string& what,
                 const std::string& name) {
  if (args.size() != n)
    throw ConfigError(what + ": '" + name + "' takes " + std::to_string(n) + " argument(s)");
}

const std::vector<std::string> kRequired = {"true_prior", "estimating_prior", "error",
                                            "sigma_schedule", "p_schedule", "rankers",
                                            "eval_loss", "scaling", "replicates", "seed"};
const std::set<std::string> kOptional = {"name", "threads"};

}  // namespace

namespace {

PriorSpec parse_prior_unchecked(const std::string& text) {
  const auto [name, args] = parse_call(text, "prior");
  if (name == "normal") {
    expect_args(args, 2, "prior", name);
    return NormalPrior{parse_double(args[0], "normal mean"), parse_double(args[1], "normal variance")};
  }
  if (name == "pareto") {
    expect_args(args, 2, "prior", name);
    return ParetoPrior{parse_double(args[0], "pareto scale"), parse_double(args[1], "pareto shape")};
  }
  expect_args(args, 0, "prior", name);
  if (name == "absexp") return AbsExpPrior{};
  if (name == "superlight") return SuperLightPrior{};
  if (name == "uniform") return UniformImproperPrior{};
  throw ConfigError("prior: unknown prior '" + name + "'");
}

}  // namespace

PriorSpec parse_prior(const std::string& text) {
  PriorSpec prior = parse_prior_unchecked(text);
  try {
    validate(prior);
  } catch (const ParameterDomainError& e) {
    throw ConfigError("prior: " + std::string(e.what()));
  }
  return prior;
}

EstimatingPrior parse_estimating_prior(const std::string& text) {
  if (lower(trim(text)) == "empirical") return EmpiricalMomentsNormal{};
  return parse_prior(text);
}

ErrorModel parse_error(const std::string& text) {
  const std::string t = lower(trim(text));
  if (t == "normal") return NormalError{};
  if (t == "quartic") return QuarticError{};
  throw ConfigError("error: unknown error model '" + t + "'");
}

SigmaSchedule parse_sigma_schedule(const std::string& text) {
  const auto [name, args] = parse_call(text, "sigma_schedule");
  using R = SigmaSchedule::Rule;
  if (name == "zero_exp_logsq") {
    expect_args(args, 0, "sigma_schedule", name);
    return {R::ZeroExpLogSquare, 0.0};
  }
  if (name == "inverse_p") {
    expect_args(args, 0, "sigma_schedule", name);
    return {R::PowerOfP, 1.0};
  }
  expect_args(args, 1, "sigma_schedule", name);
  const double v = parse_double(args[0], "sigma_schedule");
  if (name == "constant") return {R::Constant, v};
  if (name == "power" || name == "power_of_p") return {R::PowerOfP, v};
  if (name == "zero_exp_power") return {R::ZeroExpPower, v};
  throw ConfigError("sigma_schedule: unknown rule '" + name + "'");
}

RankerSpec parse_ranker(const std::string& text) {
  const auto [name, args] = parse_call(text, "rankers");
  if (name == "pvalue") {
    expect_args(args, 1, "rankers", name);
    return PValueRank{parse_double(args[0], "pvalue theta0")};
  }
  if (name == "footrule") {
    if (args.empty()) return FootruleRank{};
    expect_args(args, 1, "rankers", name);
    return FootruleRank{static_cast<std::size_t>(parse_uint(args[0], "footrule samples"))};
  }
  expect_args(args, 0, "rankers", name);
  if (name == "value") return ValueRank{};
  if (name == "posterior_mean") return PosteriorMeanRank{};
  if (name == "per") return PERRank{};
  throw ConfigError("rankers: unknown ranker '" + name + "'");
}

std::string describe(const RankerSpec& spec) {
  if (const auto* p = std::get_if<PValueRank>(&spec)) return "pvalue(" + format_number(p->theta0) + ")";
  if (const auto* f = std::get_if<FootruleRank>(&spec))
    return "footrule(" + std::to_string(f->mc_samples) + ")";
  return ranker_name(spec);
}

PairwiseLoss parse_loss(const std::string& text) {
  const auto [name, args] = parse_call(text, "eval_loss");
  if (name == "pvalue") {
    expect_args(args, 1, "eval_loss", name);
    return PValueLoss{parse_double(args[0], "pvalue theta0")};
  }
  expect_args(args, 0, "eval_loss", name);
  if (name == "hinge_diff") return HingeDiff{};
  if (name == "zero_one") return ZeroOne{};
  if (name == "per") return PERLoss{};
  throw ConfigError("eval_loss: unknown loss '" + name + "'");
}

ScalingRule parse_scaling(const std::string& text) {
  const std::string t = lower(trim(text));
  if (t == "total") return ScalingRule::Total;
  if (t == "per_unit") return ScalingRule::PerUnit;
  if (t == "per_pair") return ScalingRule::PerPair;
  throw ConfigError("scaling: unknown rule '" + t + "'");
}

ExperimentConfig parse_config(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = lower(trim(line.substr(0, eq)));
    const std::string value = trim(line.substr(eq + 1));
    const bool known = kOptional.count(key) ||
                       std::find(kRequired.begin(), kRequired.end(), key) != kRequired.end();
    if (!known) throw ConfigError("unknown key '" + key + "'");
    if (kv.count(key)) throw ConfigError("duplicate key '" + key + "'");
    if (value.empty()) throw ConfigError("empty value for key '" + key + "'");
    kv[key] = value;
  }
  for (const auto& key : kRequired)
    if (!kv.count(key)) throw ConfigError("missing required key '" + key + "'");

  ExperimentConfig cfg;
  if (kv.count("name")) cfg.name = kv["name"];
  cfg.true_prior = parse_prior(kv["true_prior"]);
  cfg.estimating_prior = parse_estimating_prior(kv["estimating_prior"]);
  cfg.error = parse_error(kv["error"]);
  cfg.sigma_schedule = parse_sigma_schedule(kv["sigma_schedule"]);
  for (const auto& part : split_top_level(kv["p_schedule"]))
    cfg.p_schedule.push_back(static_cast<std::size_t>(parse_uint(part, "p_schedule")));
  for (const auto& part : split_top_level(kv["rankers"])) cfg.rankers.push_back(parse_ranker(part));
  cfg.eval_loss = parse_loss(kv["eval_loss"]);
  cfg.scaling = parse_scaling(kv["scaling"]);
  cfg.replicates = static_cast<std::size_t>(parse_uint(kv["replicates"], "replicates"));
  cfg.seed = parse_uint(kv["seed"], "seed");
  if (kv.count("threads")) cfg.threads = static_cast<unsigned>(parse_uint(kv["threads"], "threads"));
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw FileError("cannot read config file " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_config(buf.str());
}

std::string config_to_text(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "name = " << cfg.name << '\n';
  out << "true_prior = " << describe(cfg.true_prior) << '\n';
  out << "estimating_prior = " << describe(cfg.estimating_prior) << '\n';
  out << "error = " << describe(cfg.error) << '\n';
  out << "sigma_schedule = " << cfg.sigma_schedule.describe() << '\n';
  out << "p_schedule = ";
  for (std::size_t i = 0; i < cfg.p_schedule.size(); ++i) out << (i ? ", " : "") << cfg.p_schedule[i];
  out << "\nrankers = ";
  for (std::size_t i = 0; i < cfg.rankers.size(); ++i) out << (i ? ", " : "") << describe(cfg.rankers[i]);
  out << "\neval_loss = " << describe(cfg.eval_loss) << '\n';
  out << "scaling = " << describe(cfg.scaling) << '\n';
  out << "replicates = " << cfg.replicates << '\n';
  out << "seed = " << cfg.seed << '\n';
  if (cfg.threads) out << "threads = " << cfg.threads << '\n';
  return out.str();
}

}  // namespace ranklab
