#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bcp/errors.hpp"

namespace bcp {

inline constexpr double kPolicyRowSlack = 1e-9;
inline constexpr double kSupportTolerance = 1e-12;

// pi_h(a|s) for every stage and state, stored [h][s][a].
class StochasticPolicy {
 public:
  StochasticPolicy() = default;
  StochasticPolicy(int horizon, int num_states, int num_actions)
      : horizon_(horizon),
        num_states_(num_states),
        num_actions_(num_actions),
        prob_(static_cast<std::size_t>(horizon) * num_states * num_actions, 0.0) {}

  static StochasticPolicy uniform(int horizon, int num_states, int num_actions) {
    StochasticPolicy p(horizon, num_states, num_actions);
    for (double& x : p.prob_) x = 1.0 / num_actions;
    return p;
  }

  int horizon() const { return horizon_; }
  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }

  double prob(int h, int s, int a) const { return prob_[index(h, s) + a]; }
  void set(int h, int s, int a, double p) { prob_[index(h, s) + a] = p; }

  std::span<const double> row(int h, int s) const {
    return {&prob_[index(h, s)], static_cast<std::size_t>(num_actions_)};
  }
  std::span<double> row(int h, int s) { return {&prob_[index(h, s)], static_cast<std::size_t>(num_actions_)}; }

  // Throws unless every row is a distribution within 1e-9.
  void validate() const {
    for (int h = 0; h < horizon_; ++h)
      for (int s = 0; s < num_states_; ++s) {
        double sum = 0.0;
        for (double p : row(h, s)) {
          if (!(p >= 0.0)) throw std::invalid_argument(where(h, s) + " has a negative or NaN entry");
          sum += p;
        }
        if (std::abs(sum - 1.0) > kPolicyRowSlack)
          throw std::invalid_argument(where(h, s) + " sums to " + std::to_string(sum));
      }
  }

  friend bool operator==(const StochasticPolicy&, const StochasticPolicy&) = default;

 private:
  std::size_t index(int h, int s) const {
    return (static_cast<std::size_t>(h) * num_states_ + s) * num_actions_;
  }
  static std::string where(int h, int s) {
    return "policy row (h=" + std::to_string(h) + ", s=" + std::to_string(s) + ")";
  }

  int horizon_ = 0, num_states_ = 0, num_actions_ = 0;
  std::vector<double> prob_;
};

// One action per (h, s).
class DeterministicPolicy {
 public:
  DeterministicPolicy() = default;
  DeterministicPolicy(int horizon, int num_states)
      : horizon_(horizon), num_states_(num_states), action_(static_cast<std::size_t>(horizon) * num_states, 0) {}

  int horizon() const { return horizon_; }
  int num_states() const { return num_states_; }

  int action(int h, int s) const { return action_[static_cast<std::size_t>(h) * num_states_ + s]; }
  void set(int h, int s, int a) { action_[static_cast<std::size_t>(h) * num_states_ + s] = a; }

  std::span<const int> actions() const { return action_; }

  StochasticPolicy to_stochastic(int num_actions) const {
    StochasticPolicy p(horizon_, num_states_, num_actions);
    for (int h = 0; h < horizon_; ++h)
      for (int s = 0; s < num_states_; ++s) p.set(h, s, action(h, s), 1.0);
    return p;
  }

  friend bool operator==(const DeterministicPolicy&, const DeterministicPolicy&) = default;

 private:
  int horizon_ = 0, num_states_ = 0;
  std::vector<int> action_;
};

// The actions a learner may use at each (h, s): supp(mu_h(.|s)).
class SupportMask {
 public:
  SupportMask() = default;
  SupportMask(int horizon, int num_states, int num_actions)
      : horizon_(horizon),
        num_states_(num_states),
        num_actions_(num_actions),
        allowed_(static_cast<std::size_t>(horizon) * num_states * num_actions, 0) {}

  static SupportMask full(int horizon, int num_states, int num_actions) {
    SupportMask m(horizon, num_states, num_actions);
    for (auto& x : m.allowed_) x = 1;
    return m;
  }

  int horizon() const { return horizon_; }
  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }

  bool allows(int h, int s, int a) const { return allowed_[index(h, s) + a] != 0; }
  void allow(int h, int s, int a, bool on = true) { allowed_[index(h, s) + a] = on ? 1 : 0; }

  std::vector<int> allowed_actions(int h, int s) const {
    std::vector<int> out;
    for (int a = 0; a < num_actions_; ++a)
      if (allows(h, s, a)) out.push_back(a);
    return out;
  }

  // Throws if some (h, s) has no allowed action.
  void require_non_empty() const {
    for (int h = 0; h < horizon_; ++h)
      for (int s = 0; s < num_states_; ++s) {
        bool any = false;
        for (int a = 0; a < num_actions_ && !any; ++a) any = allows(h, s, a);
        if (!any)
          throw std::invalid_argument("support mask is empty at (h=" + std::to_string(h) +
                                      ", s=" + std::to_string(s) + ")");
      }
  }

  friend bool operator==(const SupportMask&, const SupportMask&) = default;

 private:
  std::size_t index(int h, int s) const {
    return (static_cast<std::size_t>(h) * num_states_ + s) * num_actions_;
  }

  int horizon_ = 0, num_states_ = 0, num_actions_ = 0;
  std::vector<std::uint8_t> allowed_;
};

// {a : mu_h(a|s) > 1e-12}; throws on an empty row.
inline SupportMask support_of(const StochasticPolicy& behavior) {
  SupportMask mask(behavior.horizon(), behavior.num_states(), behavior.num_actions());
  for (int h = 0; h < behavior.horizon(); ++h)
    for (int s = 0; s < behavior.num_states(); ++s)
      for (int a = 0; a < behavior.num_actions(); ++a)
        if (behavior.prob(h, s, a) > kSupportTolerance) mask.allow(h, s, a);
  mask.require_non_empty();
  return mask;
}

}  // namespace bcp
