#pragma once

#include "bcp/mdp_models.hpp"
#include "bcp/policy.hpp"
#include "bcp/rng.hpp"

namespace bcp {

// s_1 ~ d1, a_h ~ pi_h(.|s_h), s_{h+1} ~ P_h(.|s_h, a_h); rewards are the
// model's deterministic mean rewards plus optional N(0, noise_sd^2) noise.
template <FiniteModel M>
Trajectory sample_episode(const M& mdp, const StochasticPolicy& policy, Rng& rng, double reward_noise_sd = 0.0) {
  if (policy.horizon() != mdp.horizon() || policy.num_states() != mdp.num_states() ||
      policy.num_actions() != mdp.num_actions())
    throw std::invalid_argument("sample_episode: policy shape does not match the model");
  Trajectory traj;
  traj.steps.reserve(mdp.horizon());
  int state = rng.categorical(mdp.initial_dist());
  for (int h = 0; h < mdp.horizon(); ++h) {
    const int action = rng.categorical(policy.row(h, state));
    const int next = rng.categorical(mdp.transition(h, state, action));
    double reward = mdp.reward(h, state, action);
    if (reward_noise_sd > 0.0) {
      // Box-Muller on two fresh uniforms.
      const double u1 = 1.0 - rng.uniform();
      const double u2 = rng.uniform();
      reward += reward_noise_sd * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }
    traj.steps.push_back({state, action, reward, next});
    state = next;
  }
  return traj;
}

}  // namespace bcp
