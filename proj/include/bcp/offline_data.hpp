#pragma once

// Behavior policies, offline data collection (independent and adaptive) and
// the JSON-lines dataset format.

#include <algorithm>
#include <functional>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "bcp/json_io.hpp"
#include "bcp/mdp_models.hpp"
#include "bcp/policy.hpp"
#include "bcp/rng.hpp"
#include "bcp/sampling.hpp"

namespace bcp {

// At s=0: a=0 w.p. p, a=1 w.p. 1-p. At s=1: a=0 w.p. p, every other action
// w.p. (1-p)/(A-1). Stage independent.
inline StochasticPolicy sim_behavior(double p, int num_actions, int horizon) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("sim_behavior: p must be in (0,1)");
  if (num_actions < 2) throw std::invalid_argument("sim_behavior: need at least two actions");
  StochasticPolicy mu(horizon, 2, num_actions);
  for (int h = 0; h < horizon; ++h) {
    mu.set(h, 0, 0, p);
    mu.set(h, 0, 1, 1.0 - p);
    mu.set(h, 1, 0, p);
    for (int a = 1; a < num_actions; ++a) mu.set(h, 1, a, (1.0 - p) / (num_actions - 1));
  }
  return mu;
}

// Behavior for M(p1,p2) with q = 1/kappa_min: b_1 and b_2 each w.p. q at x0
// in the first stage, 1 - 2q spread uniformly over b_3..b_A; uniform 1/A
// everywhere else.
inline StochasticPolicy hard_behavior(double kappa_min, int num_actions, int horizon) {
  if (!(kappa_min >= 2.0)) throw std::invalid_argument("hard_behavior: kappa_min must be >= 2");
  if (num_actions < 2) throw std::invalid_argument("hard_behavior: need at least two actions");
  if (num_actions == 2 && kappa_min != 2.0)
    throw std::invalid_argument("hard_behavior: with two actions q = 1/2 forces kappa_min = 2");
  const double q = 1.0 / kappa_min;
  StochasticPolicy mu = StochasticPolicy::uniform(horizon, 3, num_actions);
  mu.set(0, kX0, 0, q);
  mu.set(0, kX0, 1, q);
  for (int a = 2; a < num_actions; ++a) mu.set(0, kX0, a, (1.0 - 2.0 * q) / (num_actions - 2));
  return mu;
}

// Serializable description of how a behavior policy was built, so a dataset
// header can reproduce the support mask.
struct BehaviorSpec {
  std::string kind = "uniform";  // "sim" | "hard" | "uniform"
  double p = 0.5;
  double kappa_min = 2.0;
  int num_states = 0;
  int num_actions = 0;
  int horizon = 0;

  StochasticPolicy to_policy() const {
    if (kind == "sim") return sim_behavior(p, num_actions, horizon);
    if (kind == "hard") return hard_behavior(kappa_min, num_actions, horizon);
    if (kind == "uniform") return StochasticPolicy::uniform(horizon, num_states, num_actions);
    throw std::invalid_argument("unknown behavior kind '" + kind + "'");
  }

  json to_json() const {
    json j{{"kind", kind}, {"S", num_states}, {"A", num_actions}, {"H", horizon}};
    if (kind == "sim") j["p"] = p;
    if (kind == "hard") j["kappa_min"] = kappa_min;
    return j;
  }

  static BehaviorSpec from_json(const json& j) {
    BehaviorSpec spec;
    spec.kind = j.at("kind").get<std::string>();
    spec.num_states = j.at("S").get<int>();
    spec.num_actions = j.at("A").get<int>();
    spec.horizon = j.at("H").get<int>();
    if (j.contains("p")) spec.p = j.at("p").get<double>();
    if (j.contains("kappa_min")) spec.kappa_min = j.at("kappa_min").get<double>();
    return spec;
  }
};

struct Provenance {
  std::uint64_t seed = 0;
  json behavior = json::object();
  std::string adaptivity = "iid";  // "iid" | "adaptive"
};

// Episodes in generation order. There is deliberately no way to reorder them:
// adaptive collectors make episode k depend on episodes < k.
class OfflineDataset {
 public:
  OfflineDataset() = default;
  OfflineDataset(int horizon, std::vector<Trajectory> episodes, Provenance provenance)
      : horizon_(horizon), episodes_(std::move(episodes)), provenance_(std::move(provenance)) {
    for (std::size_t k = 0; k < episodes_.size(); ++k)
      if (static_cast<int>(episodes_[k].steps.size()) != horizon_)
        throw std::invalid_argument("episode " + std::to_string(k) + " does not have H steps");
  }

  int horizon() const { return horizon_; }
  int size() const { return static_cast<int>(episodes_.size()); }
  const Trajectory& episode(int k) const { return episodes_[k]; }
  std::span<const Trajectory> episodes() const { return episodes_; }
  const Provenance& provenance() const { return provenance_; }

  // The first n episodes, same provenance.
  OfflineDataset prefix(int n) const {
    if (n < 0 || n > size()) throw std::out_of_range("OfflineDataset::prefix");
    return OfflineDataset(horizon_, {episodes_.begin(), episodes_.begin() + n}, provenance_);
  }

  friend bool operator==(const OfflineDataset& a, const OfflineDataset& b) {
    return a.horizon_ == b.horizon_ && a.episodes_ == b.episodes_ && a.provenance_.seed == b.provenance_.seed &&
           a.provenance_.behavior == b.provenance_.behavior && a.provenance_.adaptivity == b.provenance_.adaptivity;
  }

 private:
  int horizon_ = 0;
  std::vector<Trajectory> episodes_;
  Provenance provenance_;
};

struct CollectOptions {
  double reward_noise_sd = 0.0;
  json behavior_descriptor = json::object();
};

// K iid episodes; episode k draws from Rng::stream(seed, k).
template <FiniteModel M>
OfflineDataset collect(const M& mdp, const StochasticPolicy& behavior, int num_episodes, std::uint64_t seed,
                       const CollectOptions& options = {}) {
  if (num_episodes < 0) throw std::invalid_argument("collect: K must be >= 0");
  behavior.validate();
  std::vector<Trajectory> episodes;
  episodes.reserve(num_episodes);
  for (int k = 0; k < num_episodes; ++k) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(k));
    episodes.push_back(sample_episode(mdp, behavior, rng, options.reward_noise_sd));
  }
  return OfflineDataset(mdp.horizon(), std::move(episodes), {seed, options.behavior_descriptor, "iid"});
}

// Maps the history of completed episodes to the policy for the next episode.
// Every emitted policy must stay inside declared_mask.
struct AdaptiveRule {
  SupportMask declared_mask;
  std::function<StochasticPolicy(std::span<const Trajectory>)> next_policy;
  json descriptor = json::object();
};

// (1 - eps) greedy + eps uniform over the mask, greedy on a running tabular
// Monte-Carlo estimate of Q_h(s,a) (mean observed return-to-go; unvisited
// pairs count as 0, ties to the lowest id).
inline AdaptiveRule epsilon_greedy_rule(const SupportMask& mask, double epsilon) {
  if (!(epsilon > 0.0 && epsilon <= 1.0))
    throw std::invalid_argument("epsilon_greedy_rule: epsilon must be in (0,1] to keep the mask support");
  mask.require_non_empty();
  struct State {
    std::vector<double> sum, count;
    std::size_t consumed = 0;
  };
  const int H = mask.horizon(), S = mask.num_states(), A = mask.num_actions();
  const std::size_t grid = static_cast<std::size_t>(H) * S * A;
  auto state = std::make_shared<State>(State{std::vector<double>(grid, 0.0), std::vector<double>(grid, 0.0), 0});

  AdaptiveRule rule;
  rule.declared_mask = mask;
  rule.descriptor = json{{"rule", "epsilon_greedy"}, {"epsilon", epsilon}};
  rule.next_policy = [state, mask, epsilon, H, S, A](std::span<const Trajectory> history) {
    if (history.size() < state->consumed) {
      // A new collection run: start the estimate over.
      std::fill(state->sum.begin(), state->sum.end(), 0.0);
      std::fill(state->count.begin(), state->count.end(), 0.0);
      state->consumed = 0;
    }
    for (; state->consumed < history.size(); ++state->consumed) {
      const auto& steps = history[state->consumed].steps;
      double to_go = 0.0;
      for (int h = H - 1; h >= 0; --h) {
        to_go += steps[h].reward;
        const std::size_t i = (static_cast<std::size_t>(h) * S + steps[h].state) * A + steps[h].action;
        state->sum[i] += to_go;
        state->count[i] += 1.0;
      }
    }
    StochasticPolicy pi(H, S, A);
    for (int h = 0; h < H; ++h)
      for (int s = 0; s < S; ++s) {
        const auto allowed = mask.allowed_actions(h, s);
        int greedy = allowed.front();
        double best = -std::numeric_limits<double>::infinity();
        for (int a : allowed) {
          const std::size_t i = (static_cast<std::size_t>(h) * S + s) * A + a;
          const double q = state->count[i] > 0 ? state->sum[i] / state->count[i] : 0.0;
          if (q > best) {
            best = q;
            greedy = a;
          }
        }
        for (int a : allowed) pi.set(h, s, a, epsilon / static_cast<double>(allowed.size()));
        pi.set(h, s, greedy, pi.prob(h, s, greedy) + (1.0 - epsilon));
      }
    return pi;
  };
  return rule;
}

// Episode k is drawn under rule(history of episodes < k); strictly sequential.
template <FiniteModel M>
OfflineDataset collect_adaptive(const M& mdp, const AdaptiveRule& rule, int num_episodes, std::uint64_t seed,
                                const CollectOptions& options = {}) {
  if (num_episodes < 0) throw std::invalid_argument("collect_adaptive: K must be >= 0");
  std::vector<Trajectory> episodes;
  episodes.reserve(num_episodes);
  for (int k = 0; k < num_episodes; ++k) {
    const StochasticPolicy pi = rule.next_policy(std::span<const Trajectory>(episodes));
    pi.validate();
    for (int h = 0; h < pi.horizon(); ++h)
      for (int s = 0; s < pi.num_states(); ++s)
        for (int a = 0; a < pi.num_actions(); ++a)
          if (pi.prob(h, s, a) > 0.0 && !rule.declared_mask.allows(h, s, a))
            throw std::logic_error("adaptive rule put mass outside its declared support at (h=" +
                                   std::to_string(h) + ", s=" + std::to_string(s) + ", a=" + std::to_string(a) +
                                   ") in episode " + std::to_string(k));
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(k));
    episodes.push_back(sample_episode(mdp, pi, rng, options.reward_noise_sd));
  }
  json behavior = options.behavior_descriptor;
  behavior["adaptive_rule"] = rule.descriptor;
  return OfflineDataset(mdp.horizon(), std::move(episodes), {seed, behavior, "adaptive"});
}

// ---------------------------------------------------------------------------
// JSON-lines format ("data/v1"): one header object, then one line per episode
// holding [s, a, r, s'] quadruples with r written to 17 significant digits.

inline std::string format_dataset(const OfflineDataset& data) {
  std::string out = dump_json(json{{"version", "data/v1"},
                                   {"seed", data.provenance().seed},
                                   {"K", data.size()},
                                   {"H", data.horizon()},
                                   {"behavior", data.provenance().behavior},
                                   {"adaptivity", data.provenance().adaptivity}});
  out += '\n';
  for (const auto& ep : data.episodes()) {
    out += '[';
    for (std::size_t h = 0; h < ep.steps.size(); ++h) {
      const auto& st = ep.steps[h];
      if (h) out += ',';
      out += '[' + std::to_string(st.state) + ',' + std::to_string(st.action) + ',' + format_g17(st.reward) + ',' +
             std::to_string(st.next_state) + ']';
    }
    out += "]\n";
  }
  return out;
}

inline OfflineDataset parse_dataset(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  long line_no = 0;
  if (!std::getline(in, line)) throw ParseError("empty dataset file", 1);
  ++line_no;
  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed header: ") + e.what(), line_no);
  }
  try {
    require_version(header, "data/v1");
  } catch (const ParseError& e) {
    throw ParseError(e.what(), line_no);
  }
  int K = 0, H = 0;
  Provenance prov;
  try {
    K = header.at("K").get<int>();
    H = header.at("H").get<int>();
    prov.seed = header.at("seed").get<std::uint64_t>();
    prov.behavior = header.value("behavior", json::object());
    prov.adaptivity = header.value("adaptivity", std::string("iid"));
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed header: ") + e.what(), line_no);
  }
  std::vector<Trajectory> episodes;
  episodes.reserve(K);
  for (int k = 0; k < K; ++k) {
    ++line_no;
    if (!std::getline(in, line))
      throw ParseError("file truncated: expected episode " + std::to_string(k + 1) + " of " + std::to_string(K),
                       line_no);
    Trajectory traj;
    try {
      const json ep = json::parse(line);
      if (!ep.is_array() || static_cast<int>(ep.size()) != H)
        throw ParseError("episode must hold " + std::to_string(H) + " steps", line_no);
      for (const auto& q : ep) {
        if (!q.is_array() || q.size() != 4) throw ParseError("step must be [s,a,r,s']", line_no);
        traj.steps.push_back({q[0].get<int>(), q[1].get<int>(), q[2].get<double>(), q[3].get<int>()});
      }
    } catch (const json::exception& e) {
      throw ParseError(std::string("malformed episode: ") + e.what(), line_no);
    }
    episodes.push_back(std::move(traj));
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty()) throw ParseError("unexpected content after the last episode", line_no);
  }
  return OfflineDataset(H, std::move(episodes), std::move(prov));
}

inline void save_dataset(const OfflineDataset& data, const std::string& path) {
  write_text_file(path, format_dataset(data));
}

inline OfflineDataset load_dataset(const std::string& path) { return parse_dataset(read_text_file(path)); }

}  // namespace bcp
