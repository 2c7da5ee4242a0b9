#pragma once

// Finite-horizon linear and linear-mixture MDPs, the two synthetic instance
// families, and episode simulation.
//
// Stages are 0-based throughout the library: h = 0 is the first decision
// stage and h = H - 1 the last; value tables carry a terminal row h = H.

#include <cmath>
#include <concepts>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "bcp/errors.hpp"
#include "bcp/json_io.hpp"
#include "bcp/rng.hpp"

namespace bcp {

inline constexpr double kProbSlack = 1e-10;
inline constexpr double kNegativeRoundoff = 1e-12;

// Anything the exact planner can run on: finite states/actions with explicit
// transition rows and deterministic rewards.
template <class M>
concept FiniteModel = requires(const M& m, int h, int s, int a) {
  { m.horizon() } -> std::convertible_to<int>;
  { m.num_states() } -> std::convertible_to<int>;
  { m.num_actions() } -> std::convertible_to<int>;
  { m.transition(h, s, a) } -> std::convertible_to<std::span<const double>>;
  { m.reward(h, s, a) } -> std::convertible_to<double>;
  { m.initial_dist() } -> std::convertible_to<std::span<const double>>;
};

// The part of a linear MDP a learner is allowed to see: the feature map.
template <class M>
concept FeatureOracle = requires(const M& m, int h, int s, int a) {
  { m.horizon() } -> std::convertible_to<int>;
  { m.num_states() } -> std::convertible_to<int>;
  { m.num_actions() } -> std::convertible_to<int>;
  { m.dim() } -> std::convertible_to<int>;
  { m.feature(h, s, a) } -> std::convertible_to<const Eigen::VectorXd&>;
};

namespace detail {

// Clamps tiny negative round-off, rejects real violations, renormalizes.
inline void sanitize_distribution(std::span<double> p, const std::string& where) {
  double sum = 0.0;
  for (double& x : p) {
    if (x < -kNegativeRoundoff)
      throw ModelError(where + ": negative probability " + format_g17(x));
    if (x > 1.0 + kProbSlack) throw ModelError(where + ": probability above 1: " + format_g17(x));
    if (x < 0.0) x = 0.0;
    sum += x;
  }
  if (std::abs(sum - 1.0) > kProbSlack)
    throw ModelError(where + ": probabilities sum to " + format_g17(sum));
  if (sum != 1.0)
    for (double& x : p) x /= sum;
}

inline void check_reward(double r, const std::string& where) {
  if (!(r >= -kProbSlack && r <= 1.0 + kProbSlack))
    throw ModelError(where + ": reward " + format_g17(r) + " outside [0,1]");
}

inline std::string loc(int h, int s, int a) {
  return "(h=" + std::to_string(h) + ",s=" + std::to_string(s) + ",a=" + std::to_string(a) + ")";
}

}  // namespace detail

// Linear MDP: r_h(s,a) = phi_h(s,a)·theta_h and P_h(s'|s,a) = phi_h(s,a)·nu_h(s').
// Transition rows and rewards are materialized and validated at construction.
class TabularLinearMDP {
 public:
  TabularLinearMDP(int horizon, int num_states, int num_actions, int dim,
                   std::vector<Eigen::VectorXd> features, std::vector<Eigen::VectorXd> theta,
                   std::vector<Eigen::MatrixXd> nu, std::vector<double> initial_dist)
      : horizon_(horizon),
        num_states_(num_states),
        num_actions_(num_actions),
        dim_(dim),
        features_(std::move(features)),
        theta_(std::move(theta)),
        nu_(std::move(nu)),
        initial_(std::move(initial_dist)) {
    if (horizon_ < 1 || num_states_ < 1 || num_actions_ < 1 || dim_ < 1)
      throw std::invalid_argument("TabularLinearMDP: sizes must be positive");
    const std::size_t grid = static_cast<std::size_t>(horizon_) * num_states_ * num_actions_;
    if (features_.size() != grid) throw std::invalid_argument("TabularLinearMDP: feature table size");
    if (theta_.size() != static_cast<std::size_t>(horizon_) ||
        nu_.size() != static_cast<std::size_t>(horizon_))
      throw std::invalid_argument("TabularLinearMDP: theta/nu must have one entry per stage");
    if (initial_.size() != static_cast<std::size_t>(num_states_))
      throw std::invalid_argument("TabularLinearMDP: initial distribution size");
    for (const auto& f : features_)
      if (f.size() != dim_) throw std::invalid_argument("TabularLinearMDP: feature dimension");
    for (int h = 0; h < horizon_; ++h) {
      if (theta_[h].size() != dim_) throw std::invalid_argument("TabularLinearMDP: theta dimension");
      if (nu_[h].rows() != num_states_ || nu_[h].cols() != dim_)
        throw std::invalid_argument("TabularLinearMDP: nu must be S x d");
    }
    detail::sanitize_distribution(initial_, "initial distribution");

    transitions_.resize(grid * num_states_);
    rewards_.resize(grid);
    for (int h = 0; h < horizon_; ++h)
      for (int s = 0; s < num_states_; ++s)
        for (int a = 0; a < num_actions_; ++a) {
          const auto& phi = feature(h, s, a);
          const std::size_t i = index(h, s, a);
          double* row = &transitions_[i * num_states_];
          for (int sp = 0; sp < num_states_; ++sp) row[sp] = nu_[h].row(sp).dot(phi);
          detail::sanitize_distribution({row, static_cast<std::size_t>(num_states_)},
                                        "transition " + detail::loc(h, s, a));
          const double r = phi.dot(theta_[h]);
          detail::check_reward(r, detail::loc(h, s, a));
          rewards_[i] = r;
        }
  }

  int horizon() const { return horizon_; }
  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }
  int dim() const { return dim_; }

  const Eigen::VectorXd& feature(int h, int s, int a) const { return features_[index(h, s, a)]; }
  const Eigen::VectorXd& theta(int h) const { return theta_[h]; }
  const Eigen::MatrixXd& nu(int h) const { return nu_[h]; }

  std::span<const double> transition(int h, int s, int a) const {
    return {&transitions_[index(h, s, a) * num_states_], static_cast<std::size_t>(num_states_)};
  }
  double reward(int h, int s, int a) const { return rewards_[index(h, s, a)]; }
  std::span<const double> initial_dist() const { return initial_; }

 private:
  std::size_t index(int h, int s, int a) const {
    return (static_cast<std::size_t>(h) * num_states_ + s) * num_actions_ + a;
  }

  int horizon_, num_states_, num_actions_, dim_;
  std::vector<Eigen::VectorXd> features_;
  std::vector<Eigen::VectorXd> theta_;
  std::vector<Eigen::MatrixXd> nu_;
  std::vector<double> initial_;
  std::vector<double> transitions_;
  std::vector<double> rewards_;
};

// Linear mixture MDP: P_h(s'|s,a) = phi(s'|s,a)·w*_h with known deterministic rewards.
class MixtureMDP {
 public:
  MixtureMDP(int horizon, int num_states, int num_actions, int dim,
             std::vector<Eigen::VectorXd> basis_table, std::vector<Eigen::VectorXd> w_star, double c_w,
             std::vector<double> rewards, std::vector<double> initial_dist)
      : horizon_(horizon),
        num_states_(num_states),
        num_actions_(num_actions),
        dim_(dim),
        basis_(std::move(basis_table)),
        w_star_(std::move(w_star)),
        c_w_(c_w),
        rewards_(std::move(rewards)),
        initial_(std::move(initial_dist)) {
    if (horizon_ < 1 || num_states_ < 1 || num_actions_ < 1 || dim_ < 1)
      throw std::invalid_argument("MixtureMDP: sizes must be positive");
    const std::size_t grid = static_cast<std::size_t>(horizon_) * num_states_ * num_actions_;
    if (basis_.size() != grid * num_states_) throw std::invalid_argument("MixtureMDP: basis table size");
    if (rewards_.size() != grid) throw std::invalid_argument("MixtureMDP: reward table size");
    if (w_star_.size() != static_cast<std::size_t>(horizon_))
      throw std::invalid_argument("MixtureMDP: w_star must have one entry per stage");
    if (initial_.size() != static_cast<std::size_t>(num_states_))
      throw std::invalid_argument("MixtureMDP: initial distribution size");
    if (!(c_w_ > 0.0)) throw std::invalid_argument("MixtureMDP: C_w must be positive");
    for (const auto& f : basis_)
      if (f.size() != dim_) throw std::invalid_argument("MixtureMDP: basis dimension");
    for (const auto& w : w_star_) {
      if (w.size() != dim_) throw std::invalid_argument("MixtureMDP: w_star dimension");
      if (w.norm() > c_w_ * (1.0 + 1e-12)) throw ModelError("MixtureMDP: ||w_star|| exceeds C_w");
    }
    detail::sanitize_distribution(initial_, "initial distribution");

    transitions_.resize(grid * num_states_);
    for (int h = 0; h < horizon_; ++h)
      for (int s = 0; s < num_states_; ++s)
        for (int a = 0; a < num_actions_; ++a) {
          const std::size_t i = index(h, s, a);
          double* row = &transitions_[i * num_states_];
          for (int sp = 0; sp < num_states_; ++sp) row[sp] = basis(h, s, a, sp).dot(w_star_[h]);
          detail::sanitize_distribution({row, static_cast<std::size_t>(num_states_)},
                                        "mixture transition " + detail::loc(h, s, a));
          detail::check_reward(rewards_[i], detail::loc(h, s, a));
        }
  }

  int horizon() const { return horizon_; }
  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }
  int dim() const { return dim_; }
  double c_w() const { return c_w_; }

  // phi(s'|s,a) at stage h.
  const Eigen::VectorXd& basis(int h, int s, int a, int next_state) const {
    return basis_[index(h, s, a) * num_states_ + next_state];
  }
  const Eigen::VectorXd& w_star(int h) const { return w_star_[h]; }

  std::span<const double> transition(int h, int s, int a) const {
    return {&transitions_[index(h, s, a) * num_states_], static_cast<std::size_t>(num_states_)};
  }
  double reward(int h, int s, int a) const { return rewards_[index(h, s, a)]; }
  std::span<const double> initial_dist() const { return initial_; }

 private:
  std::size_t index(int h, int s, int a) const {
    return (static_cast<std::size_t>(h) * num_states_ + s) * num_actions_ + a;
  }

  int horizon_, num_states_, num_actions_, dim_;
  std::vector<Eigen::VectorXd> basis_;
  std::vector<Eigen::VectorXd> w_star_;
  double c_w_;
  std::vector<double> rewards_;
  std::vector<double> initial_;
  std::vector<double> transitions_;
};

// phi_V(s,a) = sum_{s'} phi(s'|s,a) V(s').
inline Eigen::VectorXd phi_v(const MixtureMDP& m, std::span<const double> value, int h, int s, int a) {
  if (value.size() != static_cast<std::size_t>(m.num_states()))
    throw std::invalid_argument("phi_v: value vector must have one entry per state");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(m.dim());
  for (int sp = 0; sp < m.num_states(); ++sp)
    if (value[sp] != 0.0) out += value[sp] * m.basis(h, s, a, sp);
  return out;
}

struct Step {
  int state = 0;
  int action = 0;
  double reward = 0.0;
  int next_state = 0;

  friend bool operator==(const Step&, const Step&) = default;
};

struct Trajectory {
  std::vector<Step> steps;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

// ---------------------------------------------------------------------------
// Instance builders

enum class InitialState { kUniform, kPointMassZero };

struct SimMdpOptions {
  InitialState initial = InitialState::kUniform;
  // Rescale phi to unit norm (theta and nu absorb the factor). Off reproduces
  // the published construction, where ||phi|| = 3.
  bool normalize_features = false;
};

// iid Bernoulli(1/2) bits for the XOR pattern of the simulation MDP.
inline std::vector<int> random_alpha(int horizon, std::uint64_t instance_seed) {
  Rng rng = Rng::stream(instance_seed, 0xA1FAULL);
  std::vector<int> bits(horizon);
  for (auto& b : bits) b = rng.bernoulli(0.5) ? 1 : 0;
  return bits;
}

// Two-state chain with d = 10 features [u_a, delta(s,a), 1 - delta(s,a)] where
// u_a is the +-1 binary encoding of a (least significant bit first) and
// delta(s,a) = 1 iff 1{s=0} == 1{a=0}.
inline TabularLinearMDP build_sim_mdp(double r_param, const std::vector<int>& alpha, int num_actions,
                                      const SimMdpOptions& options = {}) {
  if (!(r_param > 0.0 && r_param < 1.0)) throw std::invalid_argument("build_sim_mdp: r must be in (0,1)");
  if (num_actions < 2 || num_actions > 256)
    throw std::invalid_argument("build_sim_mdp: num_actions must be in [2, 256]");
  if (alpha.empty()) throw std::invalid_argument("build_sim_mdp: alpha must have length H >= 1");
  for (int b : alpha)
    if (b != 0 && b != 1) throw std::invalid_argument("build_sim_mdp: alpha entries must be bits");

  const int horizon = static_cast<int>(alpha.size());
  constexpr int kStates = 2;
  constexpr int kDim = 10;
  const double scale = options.normalize_features ? 1.0 / 3.0 : 1.0;

  std::vector<Eigen::VectorXd> features;
  features.reserve(static_cast<std::size_t>(horizon) * kStates * num_actions);
  for (int h = 0; h < horizon; ++h)
    for (int s = 0; s < kStates; ++s)
      for (int a = 0; a < num_actions; ++a) {
        Eigen::VectorXd phi(kDim);
        for (int bit = 0; bit < 8; ++bit) phi[bit] = ((a >> bit) & 1) ? 1.0 : -1.0;
        const bool delta = (s == 0) == (a == 0);
        phi[8] = delta ? 1.0 : 0.0;
        phi[9] = delta ? 0.0 : 1.0;
        features.push_back(phi * scale);
      }

  std::vector<Eigen::VectorXd> theta(horizon, Eigen::VectorXd::Zero(kDim));
  std::vector<Eigen::MatrixXd> nu(horizon, Eigen::MatrixXd::Zero(kStates, kDim));
  for (int h = 0; h < horizon; ++h) {
    theta[h][8] = r_param / scale;
    theta[h][9] = (1.0 - r_param) / scale;
    for (int sp = 0; sp < kStates; ++sp) {
      nu[h](sp, 8) = static_cast<double>((1 - sp) ^ alpha[h]) / scale;
      nu[h](sp, 9) = static_cast<double>(sp ^ alpha[h]) / scale;
    }
  }

  std::vector<double> d1 = options.initial == InitialState::kUniform ? std::vector<double>{0.5, 0.5}
                                                                     : std::vector<double>{1.0, 0.0};
  return TabularLinearMDP(horizon, kStates, num_actions, kDim, std::move(features), std::move(theta),
                          std::move(nu), std::move(d1));
}

// Tabular MDP realized as a linear MDP with one-hot (s,a) features, d = S*A.
// transitions is [h][s][a][s'] flattened; rewards is [h][s][a] flattened.
inline TabularLinearMDP make_one_hot_mdp(int horizon, int num_states, int num_actions,
                                         const std::vector<double>& transitions,
                                         const std::vector<double>& rewards,
                                         std::vector<double> initial_dist) {
  const int dim = num_states * num_actions;
  const std::size_t grid = static_cast<std::size_t>(horizon) * dim;
  if (transitions.size() != grid * num_states || rewards.size() != grid)
    throw std::invalid_argument("make_one_hot_mdp: table sizes");
  std::vector<Eigen::VectorXd> features;
  features.reserve(grid);
  std::vector<Eigen::VectorXd> theta(horizon, Eigen::VectorXd::Zero(dim));
  std::vector<Eigen::MatrixXd> nu(horizon, Eigen::MatrixXd::Zero(num_states, dim));
  for (int h = 0; h < horizon; ++h)
    for (int s = 0; s < num_states; ++s)
      for (int a = 0; a < num_actions; ++a) {
        const int j = s * num_actions + a;
        features.push_back(Eigen::VectorXd::Unit(dim, j));
        const std::size_t i = static_cast<std::size_t>(h) * dim + j;
        theta[h][j] = rewards[i];
        for (int sp = 0; sp < num_states; ++sp) nu[h](sp, j) = transitions[i * num_states + sp];
      }
  return TabularLinearMDP(horizon, num_states, num_actions, dim, std::move(features), std::move(theta),
                          std::move(nu), std::move(initial_dist));
}

// Hard-instance state ids.
inline constexpr int kX0 = 0;
inline constexpr int kX1 = 1;
inline constexpr int kX2 = 2;

// M(p1, p2): from x0 at the first stage action b_i reaches x1 w.p. p_i (p_i =
// min{p1,p2} for i >= 3) and x2 otherwise; x1 and x2 are absorbing; reward is
// 1 in x1 from the second stage on. x0 is never occupied after the first
// stage; its later rows move to x2 so it carries no action gap.
inline TabularLinearMDP build_hard_mdp(double p1, double p2, int horizon, int num_actions = 2) {
  if (!(p1 > 0.0 && p1 < 1.0 && p2 > 0.0 && p2 < 1.0))
    throw std::invalid_argument("build_hard_mdp: p1, p2 must be in (0,1)");
  if (p1 == p2) throw std::invalid_argument("build_hard_mdp: p1 == p2 gives a zero action gap");
  if (horizon < 2) throw std::invalid_argument("build_hard_mdp: horizon must be >= 2");
  if (num_actions < 2) throw std::invalid_argument("build_hard_mdp: need at least two actions");

  constexpr int kStates = 3;
  const std::size_t grid = static_cast<std::size_t>(horizon) * kStates * num_actions;
  std::vector<double> transitions(grid * kStates, 0.0);
  std::vector<double> rewards(grid, 0.0);
  auto at = [&](int h, int s, int a) { return (static_cast<std::size_t>(h) * kStates + s) * num_actions + a; };
  for (int h = 0; h < horizon; ++h)
    for (int a = 0; a < num_actions; ++a) {
      const double p = a == 0 ? p1 : (a == 1 ? p2 : std::min(p1, p2));
      double* x0 = &transitions[at(h, kX0, a) * kStates];
      if (h == 0) {
        x0[kX1] = p;
        x0[kX2] = 1.0 - p;
      } else {
        x0[kX2] = 1.0;
      }
      transitions[at(h, kX1, a) * kStates + kX1] = 1.0;
      transitions[at(h, kX2, a) * kStates + kX2] = 1.0;
      if (h >= 1) rewards[at(h, kX1, a)] = 1.0;
    }
  return make_one_hot_mdp(horizon, kStates, num_actions, transitions, rewards, {1.0, 0.0, 0.0});
}

// Canonical mixture realization of a tabular model: phi(s'|s,a) is a scaled
// one-hot vector over the (s,a,s') triple and w*_h the scaled transition
// table. The scale is the power of two 2^-m with 4^m >= S, so ||phi_V|| <= 1
// for V in [0,1] and the reconstruction phi·w* = P is exact.
template <FiniteModel M>
MixtureMDP as_mixture(const M& mdp) {
  const int horizon = mdp.horizon();
  const int num_states = mdp.num_states();
  const int num_actions = mdp.num_actions();
  const int dim = num_states * num_actions * num_states;
  int m = 0;
  while ((1 << (2 * m)) < num_states) ++m;
  const double scale = std::ldexp(1.0, -m);

  std::vector<Eigen::VectorXd> basis;
  basis.reserve(static_cast<std::size_t>(horizon) * dim);
  std::vector<Eigen::VectorXd> w_star(horizon, Eigen::VectorXd::Zero(dim));
  std::vector<double> rewards;
  rewards.reserve(static_cast<std::size_t>(horizon) * num_states * num_actions);
  for (int h = 0; h < horizon; ++h)
    for (int s = 0; s < num_states; ++s)
      for (int a = 0; a < num_actions; ++a) {
        const auto row = mdp.transition(h, s, a);
        for (int sp = 0; sp < num_states; ++sp) {
          const int j = (s * num_actions + a) * num_states + sp;
          basis.push_back(Eigen::VectorXd::Unit(dim, j) * scale);
          w_star[h][j] = row[sp] / scale;
        }
        rewards.push_back(mdp.reward(h, s, a));
      }
  double c_w = 0.0;
  for (const auto& w : w_star) c_w = std::max(c_w, w.norm());
  const auto d1 = mdp.initial_dist();
  return MixtureMDP(horizon, num_states, num_actions, dim, std::move(basis), std::move(w_star),
                    c_w > 0.0 ? c_w : 1.0, std::move(rewards), std::vector<double>(d1.begin(), d1.end()));
}

// ---------------------------------------------------------------------------
// Serialization ("mdp/v1")

inline json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

inline Eigen::VectorXd vector_from_json(const json& j, int expected) {
  if (!j.is_array() || static_cast<int>(j.size()) != expected)
    throw ParseError("vector of length " + std::to_string(expected) + " expected", 0);
  Eigen::VectorXd v(expected);
  for (int i = 0; i < expected; ++i) v[i] = j[i].get<double>();
  return v;
}

inline json to_json(const TabularLinearMDP& m) {
  json phi = json::array(), theta = json::array(), nu = json::array();
  for (int h = 0; h < m.horizon(); ++h) {
    json stage = json::array();
    for (int s = 0; s < m.num_states(); ++s) {
      json row = json::array();
      for (int a = 0; a < m.num_actions(); ++a) row.push_back(vector_to_json(m.feature(h, s, a)));
      stage.push_back(std::move(row));
    }
    phi.push_back(std::move(stage));
    theta.push_back(vector_to_json(m.theta(h)));
    json nu_h = json::array();
    for (int sp = 0; sp < m.num_states(); ++sp) nu_h.push_back(vector_to_json(m.nu(h).row(sp).transpose()));
    nu.push_back(std::move(nu_h));
  }
  const auto d1 = m.initial_dist();
  return json{{"version", "mdp/v1"}, {"kind", "linear"},  {"H", m.horizon()},
              {"S", m.num_states()}, {"A", m.num_actions()}, {"d", m.dim()},
              {"phi", phi},          {"theta", theta},       {"nu", nu},
              {"d1", std::vector<double>(d1.begin(), d1.end())}};
}

inline json to_json(const MixtureMDP& m) {
  json basis = json::array(), w = json::array(), r = json::array();
  for (int h = 0; h < m.horizon(); ++h) {
    json stage = json::array(), rstage = json::array();
    for (int s = 0; s < m.num_states(); ++s) {
      json row = json::array(), rrow = json::array();
      for (int a = 0; a < m.num_actions(); ++a) {
        json cell = json::array();
        for (int sp = 0; sp < m.num_states(); ++sp) cell.push_back(vector_to_json(m.basis(h, s, a, sp)));
        row.push_back(std::move(cell));
        rrow.push_back(m.reward(h, s, a));
      }
      stage.push_back(std::move(row));
      rstage.push_back(std::move(rrow));
    }
    basis.push_back(std::move(stage));
    r.push_back(std::move(rstage));
    w.push_back(vector_to_json(m.w_star(h)));
  }
  const auto d1 = m.initial_dist();
  return json{{"version", "mdp/v1"}, {"kind", "mixture"}, {"H", m.horizon()}, {"S", m.num_states()},
              {"A", m.num_actions()}, {"d", m.dim()},      {"phi3", basis},     {"w_star", w},
              {"C_w", m.c_w()},       {"r", r},            {"d1", std::vector<double>(d1.begin(), d1.end())}};
}

inline TabularLinearMDP linear_mdp_from_json(const json& doc) {
  require_version(doc, "mdp/v1");
  if (doc.value("kind", "") != "linear") throw ParseError("expected an mdp of kind 'linear'", 0);
  try {
    const int H = doc.at("H").get<int>(), S = doc.at("S").get<int>(), A = doc.at("A").get<int>(),
              d = doc.at("d").get<int>();
    std::vector<Eigen::VectorXd> features, theta;
    std::vector<Eigen::MatrixXd> nu;
    const auto& phi = doc.at("phi");
    for (int h = 0; h < H; ++h) {
      for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) features.push_back(vector_from_json(phi.at(h).at(s).at(a), d));
      theta.push_back(vector_from_json(doc.at("theta").at(h), d));
      Eigen::MatrixXd nu_h(S, d);
      for (int sp = 0; sp < S; ++sp) nu_h.row(sp) = vector_from_json(doc.at("nu").at(h).at(sp), d).transpose();
      nu.push_back(std::move(nu_h));
    }
    return TabularLinearMDP(H, S, A, d, std::move(features), std::move(theta), std::move(nu),
                            doc.at("d1").get<std::vector<double>>());
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed mdp/v1 document: ") + e.what(), 0);
  }
}

inline MixtureMDP mixture_mdp_from_json(const json& doc) {
  require_version(doc, "mdp/v1");
  if (doc.value("kind", "") != "mixture") throw ParseError("expected an mdp of kind 'mixture'", 0);
  try {
    const int H = doc.at("H").get<int>(), S = doc.at("S").get<int>(), A = doc.at("A").get<int>(),
              d = doc.at("d").get<int>();
    std::vector<Eigen::VectorXd> basis, w;
    std::vector<double> r;
    for (int h = 0; h < H; ++h) {
      for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
          for (int sp = 0; sp < S; ++sp)
            basis.push_back(vector_from_json(doc.at("phi3").at(h).at(s).at(a).at(sp), d));
          r.push_back(doc.at("r").at(h).at(s).at(a).get<double>());
        }
      w.push_back(vector_from_json(doc.at("w_star").at(h), d));
    }
    return MixtureMDP(H, S, A, d, std::move(basis), std::move(w), doc.at("C_w").get<double>(), std::move(r),
                      doc.at("d1").get<std::vector<double>>());
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed mdp/v1 document: ") + e.what(), 0);
  }
}

}  // namespace bcp
