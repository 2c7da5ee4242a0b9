#pragma once

// Bootstrapped, constrained, pessimistic value iteration over linear MDPs and
// its value-targeted-regression counterpart over linear mixture MDPs.
//
// Both produce one member per data prefix: member k (k = 1..K+1) is fit on
// episodes 1..k-1 only, and at every (h, s) picks the best action inside the
// behavior support by the clipped lower-confidence estimate
//
//   Q_hat_h(s,a) = clip(<phi, w_h> - beta_k ||phi||_{Sigma_h^-1}, 0, H - h + 1).

#include <algorithm>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "bcp/beta_schedule.hpp"
#include "bcp/ensemble.hpp"
#include "bcp/mdp_models.hpp"
#include "bcp/offline_data.hpp"
#include "bcp/policy.hpp"
#include "bcp/ridge_core.hpp"
#include "bcp/rng.hpp"

namespace bcp {

// Per-(k, h) view of the estimates, handed to FitOptions::observer.
struct StageTrace {
  int k = 1;
  int h = 0;
  double beta = 0.0;
  std::span<const double> q_hat;  // [s][a]
  std::span<const double> v_hat;  // [s]
  const Eigen::VectorXd* weights = nullptr;
};

struct FitOptions {
  double lambda = 1.0;
  // Compute only members k = 1, 1 + stride, 1 + 2 stride, ... and K + 1.
  int stride = 1;
  std::function<void(const StageTrace&)> observer;
};

inline bool member_selected(int k, int num_episodes, int stride) {
  return k == 1 || k == num_episodes + 1 || (k - 1) % stride == 0;
}

namespace detail {

inline void check_fit_inputs(const OfflineDataset& data, int H, int S, int A, const SupportMask& mask,
                             const FitOptions& options) {
  if (data.horizon() != H) throw std::invalid_argument("fit: dataset episode length does not match the horizon");
  if (mask.horizon() != H || mask.num_states() != S || mask.num_actions() != A)
    throw std::invalid_argument("fit: support mask shape does not match the model");
  mask.require_non_empty();
  if (!(options.lambda > 0.0)) throw std::invalid_argument("fit: lambda must be positive");
  if (options.stride < 1) throw std::invalid_argument("fit: stride must be >= 1");
  for (int k = 0; k < data.size(); ++k)
    for (const auto& st : data.episode(k).steps)
      if (st.state < 0 || st.state >= S || st.next_state < 0 || st.next_state >= S || st.action < 0 ||
          st.action >= A)
        throw std::invalid_argument("fit: episode " + std::to_string(k) + " has an out-of-range id");
}

// argmax over the allowed actions, lowest id on ties; writes V_hat_h.
inline void constrained_greedy(const SupportMask& mask, int h, int S, int A, std::span<const double> q,
                               DeterministicPolicy& policy, std::span<double> v) {
  for (int s = 0; s < S; ++s) {
    int best = -1;
    for (int a = 0; a < A; ++a) {
      if (!mask.allows(h, s, a)) continue;
      if (best < 0 || q[s * A + a] > q[s * A + best]) best = a;
    }
    policy.set(h, s, best);
    v[s] = q[s * A + best];
  }
}

inline double clip_value(double q, int h, int H) { return std::clamp(q, 0.0, static_cast<double>(H - h)); }

}  // namespace detail

// The learner sees only the feature map of `features`, never its rewards or
// transitions. Sigma_h is grown incrementally across k; the regression
// right-hand side is rebuilt for every (k, h) from per-next-state feature sums
//   b = sum_t phi_t r_t + sum_{s'} V_hat_{h+1}(s') sum_{t: s_{h+1}^t = s'} phi_t.
template <FeatureOracle F>
PolicyEnsemble bcpvi_fit(const OfflineDataset& data, const F& features, const SupportMask& mask,
                         const BetaSchedule& schedule, const FitOptions& options = {}) {
  const int H = features.horizon(), S = features.num_states(), A = features.num_actions(), d = features.dim();
  detail::check_fit_inputs(data, H, S, A, mask, options);
  const int K = data.size();

  std::vector<RidgeState> ridge(H, RidgeState(d, options.lambda));
  std::vector<Eigen::VectorXd> reward_sum(H, Eigen::VectorXd::Zero(d));
  std::vector<Eigen::VectorXd> next_sum(static_cast<std::size_t>(H) * S, Eigen::VectorXd::Zero(d));
  std::vector<double> q(static_cast<std::size_t>(S) * A), v_next(S), v_cur(S);

  PolicyEnsemble ensemble(K, mask);
  for (int k = 1; k <= K + 1; ++k) {
    if (k >= 2) {
      const auto& steps = data.episode(k - 2).steps;
      for (int h = 0; h < H; ++h) {
        const auto& phi = features.feature(h, steps[h].state, steps[h].action);
        ridge[h].update(phi);
        reward_sum[h].noalias() += steps[h].reward * phi;
        next_sum[static_cast<std::size_t>(h) * S + steps[h].next_state] += phi;
      }
    }
    if (!member_selected(k, K, options.stride)) continue;

    const double beta = schedule.at(k);
    DeterministicPolicy policy(H, S);
    std::fill(v_next.begin(), v_next.end(), 0.0);
    for (int h = H - 1; h >= 0; --h) {
      Eigen::VectorXd b = reward_sum[h];
      if (h + 1 < H)
        for (int sp = 0; sp < S; ++sp)
          if (v_next[sp] != 0.0) b.noalias() += v_next[sp] * next_sum[static_cast<std::size_t>(h) * S + sp];
      const Eigen::VectorXd w = ridge[h].solve(b);
      for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
          const auto& phi = features.feature(h, s, a);
          double q_bar = phi.dot(w);
          if (beta != 0.0) q_bar -= beta * ridge[h].elliptical_norm(phi);
          q[s * A + a] = detail::clip_value(q_bar, h, H);
        }
      detail::constrained_greedy(mask, h, S, A, q, policy, v_cur);
      if (options.observer) options.observer(StageTrace{k, h, beta, q, v_cur, &w});
      std::swap(v_next, v_cur);
    }
    ensemble.add(std::move(policy), MemberMeta{k, beta, options.lambda, k - 1});
  }
  return ensemble;
}

// Value-targeted regression: the regressors phi_{V_hat_{h+1}}(s,a) fold the
// current value estimate, so Sigma is rebuilt for every (k, h). Observations
// are aggregated per (s, a, s') count, which leaves Sigma and the targets
// unchanged. Rewards are the model's known rewards, added to the regression
// prediction: Q_bar = r + <phi_V, w> - beta ||phi_V||.
inline PolicyEnsemble bcpvtr_fit(const OfflineDataset& data, const MixtureMDP& model, const SupportMask& mask,
                                 const BetaSchedule& schedule, const FitOptions& options = {}) {
  const int H = model.horizon(), S = model.num_states(), A = model.num_actions(), d = model.dim();
  detail::check_fit_inputs(data, H, S, A, mask, options);
  const int K = data.size();

  std::vector<double> counts(static_cast<std::size_t>(H) * S * A * S, 0.0);
  auto count_at = [&](int h, int s, int a, int sp) -> double& {
    return counts[((static_cast<std::size_t>(h) * S + s) * A + a) * S + sp];
  };
  std::vector<double> q(static_cast<std::size_t>(S) * A), v_next(S), v_cur(S);
  std::vector<Eigen::VectorXd> folded(static_cast<std::size_t>(S) * A);

  PolicyEnsemble ensemble(K, mask);
  for (int k = 1; k <= K + 1; ++k) {
    if (k >= 2)
      for (int h = 0; h < H; ++h) {
        const auto& st = data.episode(k - 2).steps[h];
        count_at(h, st.state, st.action, st.next_state) += 1.0;
      }
    if (!member_selected(k, K, options.stride)) continue;

    const double beta = schedule.at(k);
    DeterministicPolicy policy(H, S);
    std::fill(v_next.begin(), v_next.end(), 0.0);
    for (int h = H - 1; h >= 0; --h) {
      RidgeState ridge(d, options.lambda);
      TargetSum target(d);
      for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
          auto& phi = folded[s * A + a];
          phi = phi_v(model, v_next, h, s, a);
          double n = 0.0;
          for (int sp = 0; sp < S; ++sp) {
            const double c = count_at(h, s, a, sp);
            if (c == 0.0) continue;
            n += c;
            target.add(phi, c * v_next[sp]);
          }
          if (n > 0.0) ridge.add_weighted(phi, n);
        }
      ridge.refactorize();
      const Eigen::VectorXd w = ridge.solve(target);
      for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
          const auto& phi = folded[s * A + a];
          double q_bar = model.reward(h, s, a) + phi.dot(w);
          if (beta != 0.0) q_bar -= beta * ridge.elliptical_norm(phi);
          q[s * A + a] = detail::clip_value(q_bar, h, H);
        }
      detail::constrained_greedy(mask, h, S, A, q, policy, v_cur);
      if (options.observer) options.observer(StageTrace{k, h, beta, q, v_cur, &w});
      std::swap(v_next, v_cur);
    }
    ensemble.add(std::move(policy), MemberMeta{k, beta, options.lambda, k - 1});
  }
  return ensemble;
}

// ---------------------------------------------------------------------------
// Structural checks shared by tests, the harness and the acceptance suite.

// Every member's action at every (h, s) lies in the mask.
inline bool support_respected(const PolicyEnsemble& ensemble) {
  for (std::size_t i = 0; i < ensemble.size(); ++i)
    for (int h = 0; h < ensemble.horizon(); ++h)
      for (int s = 0; s < ensemble.num_states(); ++s)
        if (!ensemble.mask().allows(h, s, ensemble.at(i).action(h, s))) return false;
  return true;
}

// Refits on episodes 1..k-1 for `samples` randomly chosen computed members and
// checks each refit's last member equals the stored member k.
template <class Fit>
bool prefix_measurable(const OfflineDataset& data, const PolicyEnsemble& ensemble, Fit&& refit, int samples,
                       std::uint64_t seed) {
  Rng rng(seed);
  for (int i = 0; i < samples && ensemble.size() > 0; ++i) {
    const auto idx = static_cast<std::size_t>(rng.next_u64() % ensemble.size());
    const int k = ensemble.meta_at(idx).k;
    const PolicyEnsemble again = refit(data.prefix(k - 1));
    if (!(again.last() == ensemble.at(idx))) return false;
  }
  return true;
}

}  // namespace bcp
