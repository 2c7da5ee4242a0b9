#pragma once

// Flat key = value experiment configuration.
//
//   # comment
//   instance = sim            # sim | hard
//   H = 20, 30                # lists: comma separated, brackets optional
//   seeds = 0..29             # inclusive integer range
//   beta = [0, 0.1, 1]
//
// Later assignments override earlier ones; CLI flags are applied on top.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "bcp/errors.hpp"
#include "bcp/mdp_models.hpp"

namespace bcp::harness {

struct InstanceSpec {
  std::string kind = "sim";  // sim | hard
  double r = 0.99;
  int num_actions = 100;
  double p1 = 0.6;
  double p2 = 0.4;
  // nullopt: alpha drawn from instance_seed, or from each run's seed when
  // instance_seed is unset too.
  std::optional<std::vector<int>> alpha;
  std::optional<std::uint64_t> instance_seed;
  InitialState initial = InitialState::kUniform;
  bool normalize_features = false;
};

struct BehaviorConfig {
  double p = 0.5;
  double kappa_min = 2.0;
  std::string adaptivity = "iid";  // iid | adaptive
  double epsilon = 0.2;
  double reward_noise_sd = 0.0;
};

struct ExperimentConfig {
  InstanceSpec instance;
  BehaviorConfig behavior;
  int k_max = 1000;
  std::vector<int> horizons{20};
  std::vector<double> betas{0.0, 1.0};
  std::string schedule = "fixed";  // fixed | theory_vi | theory_vtr
  double c1 = 1.0;
  double delta = 0.1;
  std::vector<std::uint64_t> seeds = default_seeds(30);
  double lambda = 1.0;
  std::vector<std::string> eval{"per_k", "mixture", "last"};
  int stride = 1;
  std::string solver = "bcpvi";  // bcpvi | bcpvtr
  int threads = 1;
  std::string out_dir = "out";

  static std::vector<std::uint64_t> default_seeds(int n) {
    std::vector<std::uint64_t> s(n);
    for (int i = 0; i < n; ++i) s[i] = static_cast<std::uint64_t>(i);
    return s;
  }

  bool evaluates(const std::string& selector) const {
    return std::find(eval.begin(), eval.end(), selector) != eval.end();
  }

  void validate() const {
    auto fail = [](const std::string& m) { throw ConfigError(m); };
    if (instance.kind != "sim" && instance.kind != "hard") fail("instance must be 'sim' or 'hard'");
    if (horizons.empty()) fail("H list is empty");
    if (betas.empty() && schedule == "fixed") fail("beta list is empty");
    if (seeds.empty()) fail("seeds list is empty");
    if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) fail("seeds must be distinct");
    if (k_max < 1) fail("K must be >= 1");
    if (stride < 1) fail("stride must be >= 1");
    if (threads < 1) fail("threads must be >= 1");
    if (!(lambda > 0.0)) fail("lambda must be positive");
    for (int h : horizons)
      if (h < (instance.kind == "hard" ? 2 : 1)) fail("H value " + std::to_string(h) + " is too small");
    for (double b : betas)
      if (!(b >= 0.0)) fail("beta values must be >= 0");
    if (schedule != "fixed" && schedule != "theory_vi" && schedule != "theory_vtr")
      fail("schedule must be fixed, theory_vi or theory_vtr");
    if (solver != "bcpvi" && solver != "bcpvtr") fail("solver must be bcpvi or bcpvtr");
    if (behavior.adaptivity != "iid" && behavior.adaptivity != "adaptive") fail("adaptivity must be iid or adaptive");
    if (eval.empty()) fail("eval list is empty");
    for (const auto& e : eval)
      if (e != "per_k" && e != "mixture" && e != "last") fail("eval selector '" + e + "' is unknown");
    if (instance.alpha)
      for (int h : horizons)
        if (static_cast<int>(instance.alpha->size()) != h) fail("alpha length must equal every H");
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline std::string unquote(std::string s) {
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\'')))
    return s.substr(1, s.size() - 2);
  return s;
}

inline std::vector<std::string> split_list(std::string v) {
  v = trim(v);
  if (!v.empty() && v.front() == '[') {
    if (v.back() != ']') throw ConfigError("unterminated list '" + v + "'");
    v = v.substr(1, v.size() - 2);
  }
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = unquote(trim(item));
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline double to_double(const std::string& key, const std::string& v) {
  double x = 0.0;
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || ptr != end) throw ConfigError(key + ": '" + v + "' is not a number");
  return x;
}

inline long long to_int(const std::string& key, const std::string& v) {
  long long x = 0;
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || ptr != end) throw ConfigError(key + ": '" + v + "' is not an integer");
  return x;
}

inline bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(key + ": '" + v + "' is not a boolean");
}

}  // namespace detail

// Integer list with optional inclusive ranges: "0..29", "1, 4, 7..9".
inline std::vector<long long> parse_int_list(const std::string& key, const std::string& value) {
  std::vector<long long> out;
  for (const auto& item : detail::split_list(value)) {
    const auto dots = item.find("..");
    if (dots == std::string::npos) {
      out.push_back(detail::to_int(key, item));
      continue;
    }
    const long long lo = detail::to_int(key, detail::trim(item.substr(0, dots)));
    const long long hi = detail::to_int(key, detail::trim(item.substr(dots + 2)));
    if (hi < lo) throw ConfigError(key + ": empty range '" + item + "'");
    for (long long x = lo; x <= hi; ++x) out.push_back(x);
  }
  return out;
}

inline std::vector<double> parse_real_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  for (const auto& item : detail::split_list(value)) out.push_back(detail::to_double(key, item));
  return out;
}

// Applies one key = value assignment.
inline void apply_setting(ExperimentConfig& c, const std::string& raw_key, const std::string& raw_value) {
  const std::string key = detail::trim(raw_key);
  const std::string value = detail::unquote(detail::trim(raw_value));
  auto ints = [&] { return parse_int_list(key, value); };
  if (key == "instance") {
    c.instance.kind = value;
  } else if (key == "r") {
    c.instance.r = detail::to_double(key, value);
  } else if (key == "num_actions" || key == "A") {
    c.instance.num_actions = static_cast<int>(detail::to_int(key, value));
  } else if (key == "p1") {
    c.instance.p1 = detail::to_double(key, value);
  } else if (key == "p2") {
    c.instance.p2 = detail::to_double(key, value);
  } else if (key == "alpha") {
    std::vector<int> bits;
    for (long long b : ints()) bits.push_back(static_cast<int>(b));
    c.instance.alpha = bits;
  } else if (key == "instance_seed") {
    c.instance.instance_seed = static_cast<std::uint64_t>(detail::to_int(key, value));
  } else if (key == "initial") {
    if (value == "uniform") c.instance.initial = InitialState::kUniform;
    else if (value == "zero") c.instance.initial = InitialState::kPointMassZero;
    else throw ConfigError("initial must be 'uniform' or 'zero'");
  } else if (key == "normalize") {
    c.instance.normalize_features = detail::to_bool(key, value);
  } else if (key == "p") {
    c.behavior.p = detail::to_double(key, value);
  } else if (key == "kappa_min") {
    c.behavior.kappa_min = detail::to_double(key, value);
  } else if (key == "adaptivity") {
    c.behavior.adaptivity = value;
  } else if (key == "epsilon") {
    c.behavior.epsilon = detail::to_double(key, value);
  } else if (key == "reward_noise_sd") {
    c.behavior.reward_noise_sd = detail::to_double(key, value);
  } else if (key == "K") {
    c.k_max = static_cast<int>(detail::to_int(key, value));
  } else if (key == "H") {
    c.horizons.clear();
    for (long long h : ints()) c.horizons.push_back(static_cast<int>(h));
  } else if (key == "beta") {
    c.betas = parse_real_list(key, value);
  } else if (key == "schedule") {
    c.schedule = value;
  } else if (key == "c1") {
    c.c1 = detail::to_double(key, value);
  } else if (key == "delta") {
    c.delta = detail::to_double(key, value);
  } else if (key == "seeds") {
    c.seeds.clear();
    for (long long s : ints()) {
      if (s < 0) throw ConfigError("seeds must be non-negative");
      c.seeds.push_back(static_cast<std::uint64_t>(s));
    }
  } else if (key == "num_seeds") {
    c.seeds = ExperimentConfig::default_seeds(static_cast<int>(detail::to_int(key, value)));
  } else if (key == "lambda") {
    c.lambda = detail::to_double(key, value);
  } else if (key == "eval") {
    c.eval = detail::split_list(value);
  } else if (key == "stride") {
    c.stride = static_cast<int>(detail::to_int(key, value));
  } else if (key == "solver") {
    c.solver = value;
  } else if (key == "threads") {
    c.threads = static_cast<int>(detail::to_int(key, value));
  } else if (key == "out") {
    c.out_dir = value;
  } else {
    throw ConfigError("unknown configuration key '" + key + "'");
  }
}

inline ExperimentConfig parse_config(const std::string& text, ExperimentConfig base = {}) {
  std::istringstream in(text);
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    try {
      apply_setting(base, line.substr(0, eq), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return base;
}

// The experiment grid of the published simulation.
inline ExperimentConfig fig1_full_preset() {
  ExperimentConfig c;
  c.horizons = {20, 30, 50, 80};
  c.betas = {0.0, 0.1, 0.2, 0.5, 1.0, 2.0};
  return c;
}

// Desk-scale default: one horizon, beta in {0, 1}.
inline ExperimentConfig fig1_acceptance_preset() { return ExperimentConfig{}; }

inline ExperimentConfig hard_preset() {
  ExperimentConfig c;
  c.instance.kind = "hard";
  c.instance.num_actions = 2;
  c.horizons = {10};
  c.betas = {1.0};
  c.seeds = ExperimentConfig::default_seeds(10);
  return c;
}

}  // namespace bcp::harness
