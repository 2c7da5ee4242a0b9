// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include "bcp/harness/config.hpp"
#include "bcp/harness/runner.hpp"
#include "bcp/mdp_models.hpp"
#include "bcp/offline_data.hpp"
#include "bcp/pessimistic_solvers.hpp"
#include "bcp/planner_oracle.hpp"
#include "bcp/ridge_core.hpp"
#include "../oracles.hpp"

using namespace bcp;
using namespace bcp::harness;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

int failures = 0;

void report(int id, const char* title, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out.pass = false;
    out.detail = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget_s > 0 && secs > budget_s) {
    out.pass = false;
    out.note("runtime " + num(secs) + " s over the " + num(budget_s) + " s budget");
  }
  if (!out.pass) ++failures;
  std::printf("CRITERION %d %s: %s (%.2f s) %s\n", id, out.pass ? "PASS" : "FAIL", title, secs, out.detail.c_str());
  std::fflush(stdout);
}

// Ensembles fitted by criteria 6-8, checked exhaustively by criterion 5.
struct SupportLedger {
  std::mutex lock;
  long ensembles = 0, actions = 0, violations = 0;

  void record(const PolicyEnsemble& e) {
    long n = 0, bad = 0;
    for (std::size_t i = 0; i < e.size(); ++i)
      for (int h = 0; h < e.horizon(); ++h)
        for (int s = 0; s < e.num_states(); ++s) {
          ++n;
          if (!e.mask().allows(h, s, e.at(i).action(h, s))) ++bad;
        }
    std::lock_guard<std::mutex> g(lock);
    ++ensembles;
    actions += n;
    violations += bad;
  }
} support_ledger;

// mean over seeds of a per-row column, keyed by (beta, k)
std::map<std::pair<double, int>, double> seed_means(const std::vector<ResultRow>& rows, bool mixture) {
  std::map<std::pair<double, int>, std::pair<double, int>> acc;
  for (const auto& r : rows) {
    auto& a = acc[{r.beta, r.k}];
    a.first += mixture ? r.subopt_mixture_upto_k : r.subopt_member_k;
    a.second += 1;
  }
  std::map<std::pair<double, int>, double> out;
  for (const auto& [key, a] : acc) out[key] = a.first / a.second;
  return out;
}

ExperimentConfig fig1_config() {
  ExperimentConfig c = fig1_acceptance_preset();
  c.instance.r = 0.99;
  c.instance.num_actions = 100;
  c.behavior.p = 0.5;
  c.horizons = {20};
  c.betas = {0.0, 1.0};
  c.k_max = 1000;
  c.seeds = ExperimentConfig::default_seeds(30);
  return c;
}

std::string fig1_csv;

Outcome criterion1() {
  Outcome o;
  const auto m = build_hard_mdp(0.6, 0.4, 10, 2);
  const auto plan = optimal_plan(m);
  auto check = [&](const char* name, double got, double want) {
    o.require(std::abs(got - want) <= 1e-10, std::string(name) + " = " + format_g17(got) + " != " + num(want));
  };
  check("V*(x0)", plan.values.v(0, kX0), 5.4);
  check("Q*(x0,b2)", plan.values.q(0, kX0, 1), 3.6);
  const auto diag = diagnostics(m, hard_behavior(2.0, 2, 10));
  o.require(diag.delta_min.has_value(), "no gap found");
  if (diag.delta_min) check("delta_min", *diag.delta_min, 1.8);
  const auto occ = occupancy(m, plan.policy);
  for (int h = 1; h < 10; ++h) check("d*(x1)", occ.ds(h, kX1), 0.6);
  DeterministicPolicy b2(10, 3);
  for (int h = 0; h < 10; ++h)
    for (int s = 0; s < 3; ++s) b2.set(h, s, 1);
  check("SubOpt(always b2)", suboptimality(m, b2, plan.values), 1.8);
  check("SubOpt(uniform)", suboptimality(m, StochasticPolicy::uniform(10, 3, 2), plan.values), 0.9);
  if (o.pass) o.note("all six closed forms within 1e-10");
  return o;
}

Outcome criterion2() {
  Outcome o;
  std::mt19937_64 g(20240601);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    std::uniform_int_distribution<int> sa(1, 3), hh(1, 4);
    const int S = sa(g), A = sa(g), H = hh(g);
    const auto m = oracle::random_mdp(g, H, S, A);
    const auto pi = oracle::random_policy(g, H, S, A);
    const auto plan = optimal_plan(m);
    const double e1 = std::abs(start_value(m, evaluate_policy(m, pi)) - oracle::enumerate_value(m, pi));
    const double e2 = std::abs(start_value(m, plan.values) - oracle::best_deterministic_value(m));
    const double e3 = std::abs(start_value(m, evaluate_policy(m, plan.policy)) - oracle::enumerate_value(m, plan.policy.to_stochastic(A)));
    worst = std::max({worst, e1, e2, e3});
  }
  o.require(worst <= 1e-10, "max deviation " + format_g17(worst));
  o.note("20 MDPs, max deviation " + num(worst));
  return o;
}

Outcome criterion3() {
  Outcome o;
  std::mt19937_64 g(3);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_int_distribution<int> len(1, 500);
  double worst_inv = 0.0, worst_res = 0.0;
  const int d = 10;
  for (int stream = 0; stream < 100; ++stream) {
    RidgeState r(d, 1.0);
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Identity(d, d);
    const int L = len(g);
    for (int t = 0; t < L; ++t) {
      Eigen::VectorXd phi(d);
      for (int i = 0; i < d; ++i) phi[i] = n(g);
      r.update(phi);
      sigma += phi * phi.transpose();
      if ((t + 1) % 50 == 0 || t + 1 == L) {
        worst_inv = std::max(worst_inv, (r.sigma_inv() - sigma.inverse()).lpNorm<Eigen::Infinity>());
        Eigen::VectorXd b(d);
        for (int i = 0; i < d; ++i) b[i] = 10.0 * n(g);
        const Eigen::VectorXd w = r.solve(b);
        worst_res = std::max(worst_res, (sigma * w - b).norm() / (1.0 + b.norm()));
      }
    }
  }
  o.require(worst_inv <= 1e-8, "inverse deviation " + format_g17(worst_inv));
  o.require(worst_res <= 1e-7, "relative residual " + format_g17(worst_res));
  o.note("max inverse deviation " + num(worst_inv) + ", max relative solve residual " + num(worst_res));
  return o;
}

Outcome criterion4() {
  Outcome o;
  std::mt19937_64 g(4);
  std::normal_distribution<double> n(0.0, 1.0);
  const int d = 10, K = 1000;
  const double bound = 2.0 * d * std::log(1.0 + static_cast<double>(K) / d);
  double worst = 0.0;
  for (int stream = 0; stream < 20; ++stream) {
    RidgeState r(d, 1.0);
    double total = 0.0;
    for (int k = 0; k < K; ++k) {
      Eigen::VectorXd phi(d);
      for (int i = 0; i < d; ++i) phi[i] = n(g);
      phi /= phi.norm();
      total += r.quadratic_form(phi);
      r.update(phi);
    }
    worst = std::max(worst, total);
  }
  o.require(worst <= bound, "potential " + num(worst) + " exceeds " + num(bound));
  o.note("max potential " + num(worst) + " <= bound " + num(bound));
  return o;
}

Outcome criterion6() {
  Outcome o;
  const ExperimentConfig c = fig1_config();
  const RunOutput run = run_fig1(c, [](const CellArtifacts& a) { support_ledger.record(*a.ensemble); });
  o.require(run.failed_cells == 0, std::to_string(run.failed_cells) + " failed cells");
  fig1_csv = format_results_csv(run.rows);
  const auto mean = seed_means(run.rows, false);
  const double b0 = mean.at({0.0, 1000}), b1 = mean.at({1.0, 1000});
  o.require(b1 < b0, "(a) beta=1 mean " + num(b1) + " is not below beta=0 mean " + num(b0));
  o.note("(a) mean SubOpt at k=1000: beta=1 " + num(b1) + ", beta=0 " + num(b0));

  std::map<std::uint64_t, bool> settled;
  std::map<std::uint64_t, bool> zero_from_here;
  for (auto it = run.rows.rbegin(); it != run.rows.rend(); ++it) {
    if (it->beta != 1.0 || it->k > 1000) continue;
    auto [pos, fresh] = zero_from_here.try_emplace(it->seed, true);
    pos->second = pos->second && it->subopt_member_k <= 1e-9;
    if (pos->second) settled[it->seed] = true;
  }
  int reached = 0;
  for (std::uint64_t s : c.seeds) reached += settled.count(s) ? 1 : 0;
  o.require(reached * 10 >= 8 * static_cast<int>(c.seeds.size()),
            "(b) only " + std::to_string(reached) + "/30 seeds settle at zero");
  o.note("(b) " + std::to_string(reached) + "/30 seeds settle at SubOpt <= 1e-9");

  const double m5 = mean.at({1.0, 5}), m100 = mean.at({1.0, 100});
  o.require(m100 < 0.2 * m5, "(c) mean at k=100 " + num(m100) + " not below 0.2 x " + num(m5));
  o.note("(c) beta=1 mean at k=5 " + num(m5) + ", at k=100 " + num(m100));
  return o;
}

Outcome criterion7() {
  Outcome o;
  ExperimentConfig c = hard_preset();
  c.instance.p1 = 0.6;
  c.instance.p2 = 0.4;
  c.instance.num_actions = 2;
  c.behavior.kappa_min = 2.0;
  c.horizons = {10};
  c.k_max = 1000;
  c.seeds = ExperimentConfig::default_seeds(10);
  const RunOutput run = run_hard(c, [](const CellArtifacts& a) { support_ledger.record(*a.ensemble); });
  o.require(run.failed_cells == 0, std::to_string(run.failed_cells) + " failed cells");
  const double beta = c.betas.front();
  const auto mix = seed_means(run.rows, true);
  const double m100 = mix.at({beta, 100}), m1000 = mix.at({beta, 1000});
  o.require(m1000 <= 0.5 * m100, "mixture at k=1000 " + num(m1000) + " above 0.5 x " + num(m100));
  o.note("mixture mean k=100 " + num(m100) + ", k=1000 " + num(m1000));

  const auto member = seed_means(run.rows, false);
  std::vector<double> windows;
  for (int start = 1; start + 49 <= c.k_max; start += 50) {
    double s = 0.0;
    for (int k = start; k < start + 50; ++k) s += member.at({beta, k});
    windows.push_back(s / 50.0);
  }
  std::string curve;
  bool monotone = true;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    curve += (i ? "," : "") + num(windows[i]);
    if (i > 0 && windows[i] > windows[i - 1]) monotone = false;
  }
  o.require(monotone, "window-50 member means increase somewhere");
  o.note("window-50 member means [" + curve + "]");
  return o;
}

Outcome criterion8() {
  Outcome o;
  const int H = 6, K = 500;
  const auto base = build_hard_mdp(0.6, 0.4, H, 2);
  const auto mix = as_mixture(base);
  const auto mu = hard_behavior(2.0, 2, H);
  const auto mask = support_of(mu);
  const auto schedule = BetaSchedule::fixed(0.5);
  int hits = 0;
  bool clipped = true, measurable = true;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto data = collect(base, mu, K, seed);
    FitOptions opt;
    opt.observer = [&](const StageTrace& t) {
      for (double q : t.q_hat) clipped = clipped && q >= 0.0 && q <= H - t.h;
    };
    const auto ens = bcpvtr_fit(data, mix, mask, schedule, opt);
    support_ledger.record(ens);
    if (ens.last().action(0, kX0) == 0) ++hits;
    measurable = measurable && prefix_measurable(
                                   data, ens, [&](const OfflineDataset& d) { return bcpvtr_fit(d, mix, mask, schedule); },
                                   3, 1000 + seed);
  }
  o.require(hits >= 4, "b_1 chosen in only " + std::to_string(hits) + "/5 seeds");
  o.require(clipped, "an estimate left [0, H - h]");
  o.require(measurable, "a refit on a prefix disagreed with its member");
  o.note("last-iterate picks b_1 in " + std::to_string(hits) + "/5 seeds; clipping and prefix spot checks " +
         (clipped && measurable ? "hold" : "broken"));
  return o;
}

Outcome criterion5() {
  Outcome o;
  o.require(support_ledger.ensembles > 0, "no ensembles recorded");
  o.require(support_ledger.violations == 0, std::to_string(support_ledger.violations) + " actions outside supp(mu)");
  o.note(std::to_string(support_ledger.ensembles) + " ensembles, " + std::to_string(support_ledger.actions) +
         " (member, h, s) actions, " + std::to_string(support_ledger.violations) + " outside the support");
  return o;
}

Outcome criterion9() {
  Outcome o;
  const std::string again = format_results_csv(run_fig1(fig1_config()).rows);
  o.require(!fig1_csv.empty(), "criterion 6 produced no CSV");
  o.require(again == fig1_csv, "CSV bytes differ between runs");
  o.note(std::to_string(again.size()) + " bytes, identical");
  return o;
}

}  // namespace

int main() {
  report(1, "closed-form oracle suite", 1.0, criterion1);
  report(2, "brute-force DP equivalence", 10.0, criterion2);
  report(3, "ridge oracle equivalence", 10.0, criterion3);
  report(4, "elliptical potential bound", 5.0, criterion4);
  report(6, "simulation sweep qualitative reproduction", 900.0, criterion6);
  report(7, "gap-regime rate check", 120.0, criterion7);
  report(8, "value-targeted regression consistency", 120.0, criterion8);
  report(5, "support invariant over criteria 6-8", 0.0, criterion5);
  report(9, "determinism of the simulation sweep CSV", 0.0, criterion9);
  std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
