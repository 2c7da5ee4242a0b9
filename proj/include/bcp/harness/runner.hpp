#pragma once

// Sweep runner: one cell per (H, beta, seed). Each cell collects its dataset,
// fits once and evaluates every computed member against the exact planner.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "bcp/beta_schedule.hpp"
#include "bcp/ensemble.hpp"
#include "bcp/errors.hpp"
#include "bcp/harness/config.hpp"
#include "bcp/json_io.hpp"
#include "bcp/mdp_models.hpp"
#include "bcp/offline_data.hpp"
#include "bcp/pessimistic_solvers.hpp"
#include "bcp/planner_oracle.hpp"

namespace bcp::harness {

struct ResultRow {
  std::string instance_id;
  int H = 0;
  double beta = 0.0;       // NaN for theory schedules
  std::string beta_label;  // what the CSV carries in the beta column
  std::uint64_t seed = 0;
  int k = 0;               // 0 on error rows
  double subopt_member_k = 0.0;
  double subopt_mixture_upto_k = 0.0;  // mean over computed members 1..min(k, K)
  double runtime_ms = 0.0;             // whole cell; written to timings.csv only
  std::string error;                   // non-empty marks an error row
};

struct CellTiming {
  std::string instance_id;
  int H = 0;
  std::string beta_label;
  std::uint64_t seed = 0;
  double runtime_ms = 0.0;
};

struct RunOutput {
  std::vector<ResultRow> rows;
  std::vector<CellTiming> timings;
  json diagnostics = json::array();  // one entry per (H, instance) for hard runs
  int failed_cells = 0;
  bool numeric_failure = false;
};

// Cell-level hook for callers that want the fitted objects. Runs on the
// worker threads, so it must synchronize its own state.
struct CellArtifacts {
  int H = 0;
  double beta = 0.0;
  std::uint64_t seed = 0;
  const PolicyEnsemble* ensemble = nullptr;
  const OfflineDataset* data = nullptr;
};
using CellObserver = std::function<void(const CellArtifacts&)>;

inline std::string instance_id(const ExperimentConfig& c) {
  if (c.instance.kind == "hard")
    return "hard_p" + format_shortest(c.instance.p1) + "_" + format_shortest(c.instance.p2) + "_A" +
           std::to_string(c.instance.num_actions);
  return "sim_r" + format_shortest(c.instance.r) + "_A" + std::to_string(c.instance.num_actions);
}

inline TabularLinearMDP build_instance(const ExperimentConfig& c, int H, std::uint64_t seed) {
  if (c.instance.kind == "hard") return build_hard_mdp(c.instance.p1, c.instance.p2, H, c.instance.num_actions);
  const std::vector<int> alpha =
      c.instance.alpha ? *c.instance.alpha : random_alpha(H, c.instance.instance_seed.value_or(seed));
  return build_sim_mdp(c.instance.r, alpha, c.instance.num_actions,
                       SimMdpOptions{c.instance.initial, c.instance.normalize_features});
}

inline BehaviorSpec behavior_spec(const ExperimentConfig& c, int H) {
  BehaviorSpec spec;
  spec.kind = c.instance.kind;
  spec.p = c.behavior.p;
  spec.kappa_min = c.behavior.kappa_min;
  spec.num_states = c.instance.kind == "hard" ? 3 : 2;
  spec.num_actions = c.instance.num_actions;
  spec.horizon = H;
  return spec;
}

inline OfflineDataset collect_for(const ExperimentConfig& c, const TabularLinearMDP& mdp, int H, std::uint64_t seed) {
  const BehaviorSpec spec = behavior_spec(c, H);
  const StochasticPolicy mu = spec.to_policy();
  CollectOptions opts{c.behavior.reward_noise_sd, spec.to_json()};
  if (c.behavior.adaptivity == "adaptive")
    return collect_adaptive(mdp, epsilon_greedy_rule(support_of(mu), c.behavior.epsilon), c.k_max, seed, opts);
  return collect(mdp, mu, c.k_max, seed, opts);
}

// Beta column entries of the sweep: fixed values, or one theory schedule.
struct BetaCell {
  double beta = 0.0;
  std::string label;
};

inline std::vector<BetaCell> beta_cells(const ExperimentConfig& c) {
  if (c.schedule != "fixed") return {BetaCell{std::numeric_limits<double>::quiet_NaN(), c.schedule}};
  std::vector<BetaCell> out;
  for (double b : c.betas) out.push_back({b, format_shortest(b)});
  return out;
}

inline BetaSchedule make_schedule(const ExperimentConfig& c, const BetaCell& cell, int dim, int H, double c_w) {
  if (c.schedule == "theory_vi") return BetaSchedule::theory_vi(c.c1, c.delta, dim, H);
  if (c.schedule == "theory_vtr") return BetaSchedule::theory_vtr(c.delta, dim, H, c.lambda, c_w);
  return BetaSchedule::fixed(cell.beta);
}

inline std::vector<ResultRow> run_cell(const ExperimentConfig& c, int H, const BetaCell& bc, std::uint64_t seed,
                                       const CellObserver& observer = {}) {
  const TabularLinearMDP mdp = build_instance(c, H, seed);
  const OfflineDataset data = collect_for(c, mdp, H, seed);
  const SupportMask mask = support_of(behavior_spec(c, H).to_policy());
  FitOptions fit{c.lambda, c.stride, {}};

  PolicyEnsemble ensemble;
  if (c.solver == "bcpvtr") {
    const MixtureMDP mix = as_mixture(mdp);
    ensemble = bcpvtr_fit(data, mix, mask, make_schedule(c, bc, mix.dim(), H, mix.c_w()), fit);
  } else {
    ensemble = bcpvi_fit(data, mdp, mask, make_schedule(c, bc, mdp.dim(), H, 0.0), fit);
  }
  if (!support_respected(ensemble)) throw NumericError("fitted member left the behavior support");
  if (observer) observer(CellArtifacts{H, bc.beta, seed, &ensemble, &data});

  const ValueTable optimal = optimal_plan(mdp).values;
  const std::string id = instance_id(c);
  std::vector<ResultRow> rows;
  double mix_sum = 0.0;
  int mix_count = 0;
  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    const int k = ensemble.meta_at(i).k;
    const double v = suboptimality(mdp, ensemble.at(i), optimal);
    if (k <= c.k_max) {
      mix_sum += v;
      ++mix_count;
    }
    ResultRow row;
    row.instance_id = id;
    row.H = H;
    row.beta = bc.beta;
    row.beta_label = bc.label;
    row.seed = seed;
    row.k = k;
    row.subopt_member_k = v;
    row.subopt_mixture_upto_k = mix_count > 0 ? mix_sum / mix_count : v;
    rows.push_back(std::move(row));
  }
  if (!c.evaluates("per_k")) {
    // Only the summary views: keep the final row.
    rows.erase(rows.begin(), rows.end() - 1);
  }
  return rows;
}

namespace detail {

inline double beta_order(const ResultRow& r) {
  return std::isnan(r.beta) ? std::numeric_limits<double>::infinity() : r.beta;
}

inline void sort_rows(std::vector<ResultRow>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
    return std::make_tuple(a.instance_id, a.H, beta_order(a), a.seed, a.k) <
           std::make_tuple(b.instance_id, b.H, beta_order(b), b.seed, b.k);
  });
}

}  // namespace detail

// Runs every (H, beta, seed) cell on a pool of c.threads workers. A failing
// cell yields one error row instead of its member rows.
inline RunOutput run_sweep(const ExperimentConfig& c, const CellObserver& observer = {}) {
  c.validate();
  struct Cell {
    int H;
    BetaCell beta;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (int H : c.horizons)
    for (const auto& b : beta_cells(c))
      for (std::uint64_t s : c.seeds) cells.push_back({H, b, s});

  RunOutput out;
  std::mutex lock;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      const Cell& cell = cells[i];
      const auto t0 = std::chrono::steady_clock::now();
      std::vector<ResultRow> rows;
      bool numeric = false;
      try {
        rows = run_cell(c, cell.H, cell.beta, cell.seed, observer);
      } catch (const std::exception& e) {
        numeric = dynamic_cast<const NumericError*>(&e) != nullptr;
        ResultRow err;
        err.instance_id = instance_id(c);
        err.H = cell.H;
        err.beta = cell.beta.beta;
        err.beta_label = cell.beta.label;
        err.seed = cell.seed;
        err.subopt_member_k = std::numeric_limits<double>::quiet_NaN();
        err.subopt_mixture_upto_k = std::numeric_limits<double>::quiet_NaN();
        err.error = e.what();
        rows.push_back(std::move(err));
      }
      const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      for (auto& r : rows) r.runtime_ms = ms;
      std::lock_guard<std::mutex> g(lock);
      if (!rows.empty() && !rows.front().error.empty()) {
        ++out.failed_cells;
        out.numeric_failure = out.numeric_failure || numeric;
      }
      out.timings.push_back({instance_id(c), cell.H, cell.beta.label, cell.seed, ms});
      out.rows.insert(out.rows.end(), std::make_move_iterator(rows.begin()), std::make_move_iterator(rows.end()));
    }
  };
  const int n = std::min<int>(c.threads, static_cast<int>(cells.size()));
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  detail::sort_rows(out.rows);
  std::sort(out.timings.begin(), out.timings.end(), [](const CellTiming& a, const CellTiming& b) {
    return std::tie(a.H, a.beta_label, a.seed) < std::tie(b.H, b.beta_label, b.seed);
  });
  return out;
}

inline RunOutput run_fig1(const ExperimentConfig& c, const CellObserver& observer = {}) {
  if (c.instance.kind != "sim") throw ConfigError("fig1 expects instance = sim");
  return run_sweep(c, observer);
}

// Same sweep over M(p1, p2); adds one diagnostics record per H.
inline RunOutput run_hard(const ExperimentConfig& c, const CellObserver& observer = {}) {
  if (c.instance.kind != "hard") throw ConfigError("hard expects instance = hard");
  RunOutput out = run_sweep(c, observer);
  for (int H : c.horizons) {
    json d;
    try {
      const TabularLinearMDP mdp = build_hard_mdp(c.instance.p1, c.instance.p2, H, c.instance.num_actions);
      d = diagnostics_to_json(diagnostics(mdp, behavior_spec(c, H).to_policy()));
    } catch (const std::invalid_argument& e) {
      d = json{{"error", e.what()}};
    }
    d["instance_id"] = instance_id(c);
    d["H"] = H;
    out.diagnostics.push_back(std::move(d));
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV

inline constexpr const char* kResultsSchema = "# bcp results/v1";
inline constexpr const char* kResultsColumns =
    "instance_id,H,beta,seed,k,subopt_member_k,subopt_mixture_upto_k,error";

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch == '\n' ? ' ' : ch;
  }
  return out + "\"";
}

inline std::string format_results_csv(const std::vector<ResultRow>& rows) {
  std::string out = std::string(kResultsSchema) + "\n" + kResultsColumns + "\n";
  for (const auto& r : rows) {
    out += csv_escape(r.instance_id) + ',' + std::to_string(r.H) + ',' + r.beta_label + ',' +
           std::to_string(r.seed) + ',' + std::to_string(r.k) + ',' + format_shortest(r.subopt_member_k) + ',' +
           format_shortest(r.subopt_mixture_upto_k) + ',' + csv_escape(r.error) + '\n';
  }
  return out;
}

inline std::string format_timings_csv(const std::vector<CellTiming>& timings) {
  std::string out = "# bcp timings/v1\ninstance_id,H,beta,seed,runtime_ms\n";
  for (const auto& t : timings) {
    char ms[32];
    std::snprintf(ms, sizeof ms, "%.3f", t.runtime_ms);
    out += csv_escape(t.instance_id) + ',' + std::to_string(t.H) + ',' + t.beta_label + ',' +
           std::to_string(t.seed) + ',' + ms + '\n';
  }
  return out;
}

}  // namespace bcp::harness
