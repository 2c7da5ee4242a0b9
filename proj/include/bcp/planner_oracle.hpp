#pragma once

// Exact backward induction, policy evaluation, occupancy measures and the
// instance diagnostics (gaps, concentrability, spanning features, Sigma*).

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "bcp/json_io.hpp"
#include "bcp/mdp_models.hpp"
#include "bcp/policy.hpp"

namespace bcp {

inline constexpr double kGapTolerance = 1e-9;
inline constexpr double kRankTolerance = 1e-9;
inline constexpr double kSpanResidualTolerance = 1e-8;
inline constexpr double kSuboptSlack = 1e-10;

// V[h][s] for h = 0..H (row H is the terminal zero row) and Q[h][s][a].
class ValueTable {
 public:
  ValueTable() = default;
  ValueTable(int horizon, int num_states, int num_actions)
      : horizon_(horizon),
        num_states_(num_states),
        num_actions_(num_actions),
        v_(static_cast<std::size_t>(horizon + 1) * num_states, 0.0),
        q_(static_cast<std::size_t>(horizon) * num_states * num_actions, 0.0) {}

  int horizon() const { return horizon_; }
  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }

  double v(int h, int s) const { return v_[static_cast<std::size_t>(h) * num_states_ + s]; }
  double& v(int h, int s) { return v_[static_cast<std::size_t>(h) * num_states_ + s]; }
  double q(int h, int s, int a) const { return q_[qi(h, s, a)]; }
  double& q(int h, int s, int a) { return q_[qi(h, s, a)]; }

  std::span<const double> v_row(int h) const {
    return {&v_[static_cast<std::size_t>(h) * num_states_], static_cast<std::size_t>(num_states_)};
  }

 private:
  std::size_t qi(int h, int s, int a) const {
    return (static_cast<std::size_t>(h) * num_states_ + s) * num_actions_ + a;
  }

  int horizon_ = 0, num_states_ = 0, num_actions_ = 0;
  std::vector<double> v_, q_;
};

struct OptimalPlan {
  ValueTable values;
  DeterministicPolicy policy;
};

namespace detail {

template <FiniteModel M>
double backup(const M& mdp, const ValueTable& table, int h, int s, int a) {
  const auto row = mdp.transition(h, s, a);
  double next = 0.0;
  for (int sp = 0; sp < mdp.num_states(); ++sp) next += row[sp] * table.v(h + 1, sp);
  return mdp.reward(h, s, a) + next;
}

template <class P>
void check_policy_shape(const P& policy, int horizon, int num_states) {
  if (policy.horizon() != horizon || policy.num_states() != num_states)
    throw std::invalid_argument("policy shape does not match the model");
}

}  // namespace detail

// Q*_h = r_h + P_h V*_{h+1}; ties in the greedy action go to the lowest id.
template <FiniteModel M>
OptimalPlan optimal_plan(const M& mdp) {
  const int H = mdp.horizon(), S = mdp.num_states(), A = mdp.num_actions();
  OptimalPlan plan{ValueTable(H, S, A), DeterministicPolicy(H, S)};
  for (int h = H - 1; h >= 0; --h)
    for (int s = 0; s < S; ++s) {
      int best = 0;
      for (int a = 0; a < A; ++a) {
        plan.values.q(h, s, a) = detail::backup(mdp, plan.values, h, s, a);
        if (plan.values.q(h, s, a) > plan.values.q(h, s, best)) best = a;
      }
      plan.policy.set(h, s, best);
      plan.values.v(h, s) = plan.values.q(h, s, best);
    }
  return plan;
}

template <FiniteModel M>
ValueTable evaluate_policy(const M& mdp, const StochasticPolicy& policy) {
  const int H = mdp.horizon(), S = mdp.num_states(), A = mdp.num_actions();
  detail::check_policy_shape(policy, H, S);
  if (policy.num_actions() != A) throw std::invalid_argument("policy action count does not match the model");
  policy.validate();
  ValueTable table(H, S, A);
  for (int h = H - 1; h >= 0; --h)
    for (int s = 0; s < S; ++s) {
      double v = 0.0;
      for (int a = 0; a < A; ++a) {
        table.q(h, s, a) = detail::backup(mdp, table, h, s, a);
        v += policy.prob(h, s, a) * table.q(h, s, a);
      }
      table.v(h, s) = v;
    }
  return table;
}

template <FiniteModel M>
ValueTable evaluate_policy(const M& mdp, const DeterministicPolicy& policy) {
  const int H = mdp.horizon(), S = mdp.num_states(), A = mdp.num_actions();
  detail::check_policy_shape(policy, H, S);
  ValueTable table(H, S, A);
  for (int h = H - 1; h >= 0; --h)
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) table.q(h, s, a) = detail::backup(mdp, table, h, s, a);
      const int a = policy.action(h, s);
      if (a < 0 || a >= A) throw std::invalid_argument("deterministic policy action out of range");
      table.v(h, s) = table.q(h, s, a);
    }
  return table;
}

template <FiniteModel M>
double start_value(const M& mdp, const ValueTable& table) {
  const auto d1 = mdp.initial_dist();
  double v = 0.0;
  for (int s = 0; s < mdp.num_states(); ++s) v += d1[s] * table.v(0, s);
  return v;
}

// E_{s1 ~ d1}[V*_1(s1) - V^pi_1(s1)] against a precomputed optimal table.
template <FiniteModel M, class Policy>
double suboptimality(const M& mdp, const Policy& policy, const ValueTable& optimal) {
  const double gap = start_value(mdp, optimal) - start_value(mdp, evaluate_policy(mdp, policy));
  if (gap < -kSuboptSlack) throw NumericError("negative sub-optimality " + format_g17(gap));
  return gap;
}

template <FiniteModel M, class Policy>
double suboptimality(const M& mdp, const Policy& policy) {
  return suboptimality(mdp, policy, optimal_plan(mdp).values);
}

// dsa[h][s][a] and ds[h][s] for h = 0..H-1.
class OccupancyTable {
 public:
  OccupancyTable() = default;
  OccupancyTable(int horizon, int num_states, int num_actions)
      : horizon_(horizon),
        num_states_(num_states),
        num_actions_(num_actions),
        ds_(static_cast<std::size_t>(horizon) * num_states, 0.0),
        dsa_(static_cast<std::size_t>(horizon) * num_states * num_actions, 0.0) {}

  int horizon() const { return horizon_; }
  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }

  double ds(int h, int s) const { return ds_[static_cast<std::size_t>(h) * num_states_ + s]; }
  double& ds(int h, int s) { return ds_[static_cast<std::size_t>(h) * num_states_ + s]; }
  double dsa(int h, int s, int a) const { return dsa_[(static_cast<std::size_t>(h) * num_states_ + s) * num_actions_ + a]; }
  double& dsa(int h, int s, int a) { return dsa_[(static_cast<std::size_t>(h) * num_states_ + s) * num_actions_ + a]; }

 private:
  int horizon_ = 0, num_states_ = 0, num_actions_ = 0;
  std::vector<double> ds_, dsa_;
};

template <FiniteModel M>
OccupancyTable occupancy(const M& mdp, const StochasticPolicy& policy) {
  const int H = mdp.horizon(), S = mdp.num_states(), A = mdp.num_actions();
  detail::check_policy_shape(policy, H, S);
  policy.validate();
  OccupancyTable occ(H, S, A);
  const auto d1 = mdp.initial_dist();
  for (int s = 0; s < S; ++s) occ.ds(0, s) = d1[s];
  for (int h = 0; h < H; ++h)
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        const double mass = occ.ds(h, s) * policy.prob(h, s, a);
        occ.dsa(h, s, a) = mass;
        if (h + 1 < H && mass != 0.0) {
          const auto row = mdp.transition(h, s, a);
          for (int sp = 0; sp < S; ++sp) occ.ds(h + 1, sp) += mass * row[sp];
        }
      }
    }
  return occ;
}

template <FiniteModel M>
OccupancyTable occupancy(const M& mdp, const DeterministicPolicy& policy) {
  return occupancy(mdp, policy.to_stochastic(mdp.num_actions()));
}

// ---------------------------------------------------------------------------
// Diagnostics

struct InstanceDiagnostics {
  // nullopt when every action is optimal everywhere.
  std::optional<double> delta_min;
  std::vector<double> kappa;       // +inf where OPC fails at that stage
  double kappa_sum = 0.0;
  std::vector<double> kappa_prod;  // prefix products kappa_{1:h}
  bool opc_holds = true;
  bool unique_optimal = true;
  bool spanning_features = true;
  std::vector<Eigen::MatrixXd> sigma_star;
  std::vector<std::optional<double>> lambda_plus;
  double gap_support = 0.0;
};

namespace detail {

// Residual of projecting v onto the column space of basis.
inline double span_residual(const Eigen::MatrixXd& basis, const Eigen::VectorXd& v) {
  if (basis.cols() == 0) return v.norm();
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(basis);
  cod.setThreshold(kRankTolerance);
  const Eigen::VectorXd x = cod.solve(v);
  return (basis * x - v).norm();
}

}  // namespace detail

// Everything is computed from the lowest-id optimal policy of optimal_plan.
template <class M>
  requires FiniteModel<M> && FeatureOracle<M>
InstanceDiagnostics diagnostics(const M& mdp, const StochasticPolicy& mu) {
  const int H = mdp.horizon(), S = mdp.num_states(), A = mdp.num_actions(), d = mdp.dim();
  const OptimalPlan plan = optimal_plan(mdp);
  const OccupancyTable star = occupancy(mdp, plan.policy);
  const OccupancyTable behavior = occupancy(mdp, mu);

  InstanceDiagnostics out;
  for (int h = 0; h < H; ++h)
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) {
        const double gap = plan.values.v(h, s) - plan.values.q(h, s, a);
        if (gap > kGapTolerance && (!out.delta_min || gap < *out.delta_min)) out.delta_min = gap;
      }

  double prod = 1.0;
  for (int h = 0; h < H; ++h) {
    double kappa = 0.0;
    bool covered = true;
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(d, d);
    for (int s = 0; s < S; ++s) {
      bool first_optimal_seen = false;
      for (int a = 0; a < A; ++a) {
        const double dstar = star.dsa(h, s, a);
        const double dmu = behavior.dsa(h, s, a);
        if (dmu > kSupportTolerance) {
          kappa = std::max(kappa, dstar / dmu);
        } else if (dstar > kSupportTolerance) {
          covered = false;
          out.gap_support += dstar;
        }
        if (dstar > 0.0) sigma += dstar * mdp.feature(h, s, a) * mdp.feature(h, s, a).transpose();
        if (star.ds(h, s) > kSupportTolerance &&
            plan.values.v(h, s) - plan.values.q(h, s, a) <= kGapTolerance) {
          if (first_optimal_seen) out.unique_optimal = false;
          first_optimal_seen = true;
        }
      }
    }
    out.opc_holds = out.opc_holds && covered;
    const double k_h = covered ? kappa : std::numeric_limits<double>::infinity();
    out.kappa.push_back(k_h);
    out.kappa_sum += k_h;
    prod *= k_h;
    out.kappa_prod.push_back(prod);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma, Eigen::EigenvaluesOnly);
    const Eigen::VectorXd ev = eig.eigenvalues();
    const double top = ev.size() > 0 ? ev.maxCoeff() : 0.0;
    std::optional<double> lp;
    if (top > 0.0)
      for (Eigen::Index i = 0; i < ev.size(); ++i)
        if (ev[i] > kRankTolerance * top) {
          lp = ev[i];
          break;
        }
    out.lambda_plus.push_back(lp);
    out.sigma_star.push_back(std::move(sigma));

    // span{phi*_h(s) : s in S^mu_h} must lie inside span{phi*_h(s) : s in S*_h}.
    std::vector<Eigen::VectorXd> star_cols;
    for (int s = 0; s < S; ++s)
      if (star.ds(h, s) > kSupportTolerance) star_cols.push_back(mdp.feature(h, s, plan.policy.action(h, s)));
    Eigen::MatrixXd basis(d, static_cast<Eigen::Index>(star_cols.size()));
    for (std::size_t j = 0; j < star_cols.size(); ++j) basis.col(static_cast<Eigen::Index>(j)) = star_cols[j];
    for (int s = 0; s < S; ++s) {
      if (behavior.ds(h, s) <= kSupportTolerance) continue;
      const Eigen::VectorXd& v = mdp.feature(h, s, plan.policy.action(h, s));
      if (detail::span_residual(basis, v) >= kSpanResidualTolerance * std::max(1.0, v.norm()))
        out.spanning_features = false;
    }
  }
  return out;
}

// "diag/v1" report; +inf is written as the string "inf".
inline json diagnostics_to_json(const InstanceDiagnostics& diag) {
  json sigma = json::array();
  for (const auto& m : diag.sigma_star) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
      rows.push_back(std::move(row));
    }
    sigma.push_back(std::move(rows));
  }
  json lambda_plus = json::array();
  for (const auto& lp : diag.lambda_plus) lambda_plus.push_back(lp ? json(*lp) : json(nullptr));
  return json{{"version", "diag/v1"},
              {"delta_min", diag.delta_min ? json(*diag.delta_min) : json(nullptr)},
              {"all_actions_optimal", !diag.delta_min.has_value()},
              {"kappa", diag.kappa},
              {"kappa_sum", diag.kappa_sum},
              {"kappa_prod", diag.kappa_prod},
              {"opc_holds", diag.opc_holds},
              {"unique_optimal", diag.unique_optimal},
              {"spanning_features", diag.spanning_features},
              {"lambda_plus", lambda_plus},
              {"gap_support", diag.gap_support},
              {"sigma_star", sigma}};
}

}  // namespace bcp
