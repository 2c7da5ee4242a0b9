#pragma once

// Output of the pessimistic solvers: one deterministic policy per data prefix,
// plus the mixture and last-iteration views over them.

#include <algorithm>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "bcp/json_io.hpp"
#include "bcp/planner_oracle.hpp"
#include "bcp/policy.hpp"

namespace bcp {

struct MemberMeta {
  int k = 1;               // 1-based member index
  double beta = 0.0;       // beta_k used for the bonus
  double lambda = 1.0;
  int prefix_length = 0;   // number of episodes the member was fit on (k - 1)

  friend bool operator==(const MemberMeta&, const MemberMeta&) = default;
};

class PolicyEnsemble {
 public:
  PolicyEnsemble() = default;
  PolicyEnsemble(int num_episodes, SupportMask mask) : num_episodes_(num_episodes), mask_(std::move(mask)) {}

  // K, the number of episodes in the dataset; full ensembles hold K + 1 members.
  int num_episodes() const { return num_episodes_; }
  int horizon() const { return mask_.horizon(); }
  int num_states() const { return mask_.num_states(); }
  int num_actions() const { return mask_.num_actions(); }
  const SupportMask& mask() const { return mask_; }

  void add(DeterministicPolicy policy, MemberMeta meta) {
    if (!members_.empty() && meta.k <= meta_.back().k)
      throw std::logic_error("PolicyEnsemble: members must be added in increasing k");
    members_.push_back(std::move(policy));
    meta_.push_back(meta);
  }

  // Only the members that were computed (all of 1..K+1 unless a stride was used).
  std::size_t size() const { return members_.size(); }
  const DeterministicPolicy& at(std::size_t i) const { return members_[i]; }
  const MemberMeta& meta_at(std::size_t i) const { return meta_[i]; }
  std::span<const MemberMeta> meta() const { return meta_; }

  bool has_member(int k) const { return find(k).has_value(); }

  const DeterministicPolicy& member(int k) const {
    const auto i = find(k);
    if (!i) throw std::out_of_range("PolicyEnsemble: member " + std::to_string(k) + " was not computed");
    return members_[*i];
  }

  const DeterministicPolicy& last() const { return member(num_episodes_ + 1); }

  friend bool operator==(const PolicyEnsemble&, const PolicyEnsemble&) = default;

 private:
  std::optional<std::size_t> find(int k) const {
    auto it = std::lower_bound(meta_.begin(), meta_.end(), k, [](const MemberMeta& m, int key) { return m.k < key; });
    if (it == meta_.end() || it->k != k) return std::nullopt;
    return static_cast<std::size_t>(it - meta_.begin());
  }

  int num_episodes_ = 0;
  SupportMask mask_;
  std::vector<DeterministicPolicy> members_;
  std::vector<MemberMeta> meta_;
};

// Uniform selection over members 1..K, evaluated at the policy level:
// SubOpt(mixture) is the mean of the members' sub-optimalities.
struct MixturePolicy {
  std::vector<DeterministicPolicy> members;

  // Per-state probability mixing, a different object than the uniform
  // selection above; exposed for comparison only.
  StochasticPolicy state_mixture(int num_actions) const {
    StochasticPolicy p(members.front().horizon(), members.front().num_states(), num_actions);
    const double w = 1.0 / static_cast<double>(members.size());
    for (const auto& m : members)
      for (int h = 0; h < m.horizon(); ++h)
        for (int s = 0; s < m.num_states(); ++s) p.set(h, s, m.action(h, s), p.prob(h, s, m.action(h, s)) + w);
    return p;
  }
};

using EvaluablePolicy = std::variant<DeterministicPolicy, MixturePolicy>;

struct Selector {
  enum class Kind { kMixture, kLast, kMember };
  Kind kind = Kind::kLast;
  int k = 0;

  static Selector mixture() { return {Kind::kMixture, 0}; }
  static Selector last() { return {Kind::kLast, 0}; }
  static Selector member(int k) { return {Kind::kMember, k}; }
};

inline EvaluablePolicy extract(const PolicyEnsemble& ensemble, Selector which) {
  switch (which.kind) {
    case Selector::Kind::kLast:
      return ensemble.last();
    case Selector::Kind::kMember:
      if (which.k < 1 || which.k > ensemble.num_episodes() + 1)
        throw std::out_of_range("extract: member index " + std::to_string(which.k) + " out of range");
      return ensemble.member(which.k);
    case Selector::Kind::kMixture: {
      MixturePolicy mix;
      for (std::size_t i = 0; i < ensemble.size(); ++i)
        if (ensemble.meta_at(i).k <= ensemble.num_episodes()) mix.members.push_back(ensemble.at(i));
      if (mix.members.empty()) throw std::out_of_range("extract: the mixture needs K >= 1");
      return mix;
    }
  }
  throw std::logic_error("extract: bad selector");
}

template <FiniteModel M>
double suboptimality(const M& mdp, const EvaluablePolicy& policy, const ValueTable& optimal) {
  if (const auto* det = std::get_if<DeterministicPolicy>(&policy)) return suboptimality(mdp, *det, optimal);
  const auto& mix = std::get<MixturePolicy>(policy);
  double total = 0.0;
  for (const auto& m : mix.members) total += suboptimality(mdp, m, optimal);
  return total / static_cast<double>(mix.members.size());
}

struct EnsembleSuboptimality {
  std::vector<int> k;             // member indices, ascending
  std::vector<double> per_member;  // SubOpt(pi^k)
  std::optional<double> mixture;   // mean over computed members with k <= K
  double last = 0.0;               // SubOpt(pi^{K+1})
};

template <FiniteModel M>
EnsembleSuboptimality ensemble_suboptimality(const M& mdp, const PolicyEnsemble& ensemble, const ValueTable& optimal) {
  EnsembleSuboptimality out;
  double mix_sum = 0.0;
  int mix_count = 0;
  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    const double v = suboptimality(mdp, ensemble.at(i), optimal);
    out.k.push_back(ensemble.meta_at(i).k);
    out.per_member.push_back(v);
    if (ensemble.meta_at(i).k <= ensemble.num_episodes()) {
      mix_sum += v;
      ++mix_count;
    }
  }
  if (mix_count > 0) out.mixture = mix_sum / mix_count;
  if (!out.k.empty() && out.k.back() == ensemble.num_episodes() + 1) out.last = out.per_member.back();
  return out;
}

template <FiniteModel M>
EnsembleSuboptimality ensemble_suboptimality(const M& mdp, const PolicyEnsemble& ensemble) {
  return ensemble_suboptimality(mdp, ensemble, optimal_plan(mdp).values);
}

// ---------------------------------------------------------------------------
// "ens/v1"

inline json ensemble_to_json(const PolicyEnsemble& e) {
  json members = json::array();
  for (std::size_t i = 0; i < e.size(); ++i) {
    const auto& m = e.meta_at(i);
    json actions = json::array();
    for (int h = 0; h < e.horizon(); ++h) {
      json row = json::array();
      for (int s = 0; s < e.num_states(); ++s) row.push_back(e.at(i).action(h, s));
      actions.push_back(std::move(row));
    }
    members.push_back(
        json{{"k", m.k}, {"beta", m.beta}, {"lambda", m.lambda}, {"prefix", m.prefix_length}, {"actions", actions}});
  }
  json mask = json::array();
  for (int h = 0; h < e.horizon(); ++h) {
    json row = json::array();
    for (int s = 0; s < e.num_states(); ++s) row.push_back(e.mask().allowed_actions(h, s));
    mask.push_back(std::move(row));
  }
  return json{{"version", "ens/v1"}, {"K", e.num_episodes()}, {"H", e.horizon()}, {"S", e.num_states()},
              {"A", e.num_actions()}, {"mask", mask},          {"members", members}};
}

inline PolicyEnsemble ensemble_from_json(const json& doc) {
  require_version(doc, "ens/v1");
  try {
    const int H = doc.at("H").get<int>(), S = doc.at("S").get<int>(), A = doc.at("A").get<int>();
    SupportMask mask(H, S, A);
    for (int h = 0; h < H; ++h)
      for (int s = 0; s < S; ++s)
        for (int a : doc.at("mask").at(h).at(s).get<std::vector<int>>()) mask.allow(h, s, a);
    PolicyEnsemble e(doc.at("K").get<int>(), std::move(mask));
    for (const auto& m : doc.at("members")) {
      DeterministicPolicy p(H, S);
      for (int h = 0; h < H; ++h)
        for (int s = 0; s < S; ++s) p.set(h, s, m.at("actions").at(h).at(s).get<int>());
      e.add(std::move(p), MemberMeta{m.at("k").get<int>(), m.at("beta").get<double>(), m.at("lambda").get<double>(),
                                     m.at("prefix").get<int>()});
    }
    return e;
  } catch (const json::exception& ex) {
    throw ParseError(std::string("malformed ens/v1 document: ") + ex.what(), 0);
  }
}

}  // namespace bcp
