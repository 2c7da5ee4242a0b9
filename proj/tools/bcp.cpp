// bcp: command-line front end for the experiment harness.
//
// Exit codes: 0 success, 2 configuration error, 3 numeric-invariant failure,
// 1 anything else (I/O, parse errors).

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "bcp/errors.hpp"
#include "bcp/harness/aggregate.hpp"
#include "bcp/harness/config.hpp"
#include "bcp/harness/runner.hpp"
#include "bcp/harness/svg_plot.hpp"
#include "bcp/json_io.hpp"
#include "bcp/mdp_models.hpp"
#include "bcp/offline_data.hpp"
#include "bcp/pessimistic_solvers.hpp"
#include "bcp/planner_oracle.hpp"

namespace fs = std::filesystem;
using namespace bcp;
using namespace bcp::harness;

namespace {

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> stride, threads, k;
  std::optional<std::string> beta, horizons;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "configuration file (key = value)");
  cmd->add_option("--seed", o.seed, "run seed; replaces the seeds list");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--stride", o.stride, "evaluate every N-th member");
  cmd->add_option("--threads", o.threads, "worker threads");
  cmd->add_option("--beta", o.beta, "comma-separated beta list");
  cmd->add_option("--H", o.horizons, "comma-separated horizon list");
  cmd->add_option("--K", o.k, "number of episodes");
}

ExperimentConfig resolve(ExperimentConfig base, const Overrides& o) {
  if (!o.config_path.empty()) {
    std::string text;
    try {
      text = read_text_file(o.config_path);
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
    base = parse_config(text, base);
  }
  if (o.seed) base.seeds = {*o.seed};
  if (o.out) base.out_dir = *o.out;
  if (o.stride) base.stride = *o.stride;
  if (o.threads) base.threads = *o.threads;
  if (o.k) base.k_max = *o.k;
  if (o.beta) apply_setting(base, "beta", *o.beta);
  if (o.horizons) apply_setting(base, "H", *o.horizons);
  base.validate();
  return base;
}

std::string in_dir(const std::string& dir, const std::string& name) {
  fs::create_directories(dir);
  return (fs::path(dir) / name).string();
}

int write_run(const RunOutput& run, const ExperimentConfig& c) {
  const std::string results = in_dir(c.out_dir, "results.csv");
  write_text_file(results, format_results_csv(run.rows));
  write_text_file(in_dir(c.out_dir, "timings.csv"), format_timings_csv(run.timings));
  if (!run.diagnostics.empty()) write_text_file(in_dir(c.out_dir, "diagnostics.json"), dump_json(run.diagnostics) + "\n");
  std::cout << "wrote " << run.rows.size() << " rows to " << results << "\n";
  if (run.failed_cells > 0) {
    std::cerr << run.failed_cells << " cell(s) failed; see the error column\n";
    return run.numeric_failure ? 3 : 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bootstrapped constrained pessimistic value iteration toolkit"};
  app.require_subcommand(1);

  Overrides o_sim, o_fit, o_diag, o_fig1, o_hard;
  auto* sim = app.add_subcommand("simulate", "build an instance and collect an offline dataset");
  add_common(sim, o_sim);
  int sim_h = 0;
  sim->add_option("--horizon", sim_h, "horizon (defaults to the first H of the config)");

  auto* fit = app.add_subcommand("fit", "run a solver on a dataset file");
  add_common(fit, o_fit);
  std::string fit_data, fit_model;
  fit->add_option("--data", fit_data, "dataset produced by simulate")->required();
  fit->add_option("--model", fit_model, "model JSON produced by simulate")->required();

  auto* diag = app.add_subcommand("diag", "emit instance diagnostics as JSON");
  add_common(diag, o_diag);
  std::string diag_model;
  diag->add_option("--model", diag_model, "model JSON (defaults to the configured instance)");

  auto* fig1 = app.add_subcommand("fig1", "sweep on the simulation MDP");
  add_common(fig1, o_fig1);
  bool full = false;
  fig1->add_flag("--full", full, "start from the full published grid instead of the desk-scale default");

  auto* hard = app.add_subcommand("hard", "sweep on the two-armed hard instance");
  add_common(hard, o_hard);

  auto* agg = app.add_subcommand("aggregate", "mean and std over seeds");
  std::string agg_in, agg_out;
  agg->add_option("results", agg_in, "results.csv")->required();
  agg->add_option("--out", agg_out, "summary CSV path (stdout when omitted)");

  auto* plot = app.add_subcommand("plot", "SVG chart of a summary");
  std::string plot_in, plot_out = "plot.svg", metric = "member";
  bool log_x = false;
  plot->add_option("summary", plot_in, "summary CSV from aggregate")->required();
  plot->add_option("--out", plot_out, "SVG path");
  plot->add_option("--metric", metric, "member | mixture")->check(CLI::IsMember({"member", "mixture"}));
  plot->add_flag("--log-x", log_x, "logarithmic k axis");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*sim) {
      const ExperimentConfig c = resolve({}, o_sim);
      const int H = sim_h > 0 ? sim_h : c.horizons.front();
      const std::uint64_t seed = c.seeds.front();
      const TabularLinearMDP mdp = build_instance(c, H, seed);
      const OfflineDataset data = collect_for(c, mdp, H, seed);
      save_dataset(data, in_dir(c.out_dir, "data.jsonl"));
      write_text_file(in_dir(c.out_dir, "model.json"), dump_json(to_json(mdp)) + "\n");
      std::cout << "wrote " << data.size() << " episodes to " << in_dir(c.out_dir, "data.jsonl") << "\n";
      return 0;
    }
    if (*fit) {
      const ExperimentConfig c = resolve({}, o_fit);
      const OfflineDataset data = load_dataset(fit_data);
      const TabularLinearMDP mdp = linear_mdp_from_json(json::parse(read_text_file(fit_model)));
      const BehaviorSpec spec = BehaviorSpec::from_json(data.provenance().behavior);
      const SupportMask mask = support_of(spec.to_policy());
      const BetaCell bc = beta_cells(c).front();
      FitOptions opts{c.lambda, c.stride, {}};
      PolicyEnsemble ens;
      if (c.solver == "bcpvtr") {
        const MixtureMDP mix = as_mixture(mdp);
        ens = bcpvtr_fit(data, mix, mask, make_schedule(c, bc, mix.dim(), mdp.horizon(), mix.c_w()), opts);
      } else {
        ens = bcpvi_fit(data, mdp, mask, make_schedule(c, bc, mdp.dim(), mdp.horizon(), 0.0), opts);
      }
      write_text_file(in_dir(c.out_dir, "ensemble.json"), dump_json(ensemble_to_json(ens)) + "\n");
      const auto sub = ensemble_suboptimality(mdp, ens);
      std::cout << "members " << ens.size() << ", SubOpt(last) " << format_shortest(sub.last);
      if (sub.mixture) std::cout << ", SubOpt(mixture) " << format_shortest(*sub.mixture);
      std::cout << "\n";
      return 0;
    }
    if (*diag) {
      const ExperimentConfig c = resolve({}, o_diag);
      const int H = c.horizons.front();
      const TabularLinearMDP mdp = diag_model.empty() ? build_instance(c, H, c.seeds.front())
                                                      : linear_mdp_from_json(json::parse(read_text_file(diag_model)));
      const StochasticPolicy mu = behavior_spec(c, mdp.horizon()).to_policy();
      std::cout << dump_json(diagnostics_to_json(diagnostics(mdp, mu))) << "\n";
      return 0;
    }
    if (*fig1) {
      const ExperimentConfig c = resolve(full ? fig1_full_preset() : fig1_acceptance_preset(), o_fig1);
      return write_run(run_fig1(c), c);
    }
    if (*hard) {
      const ExperimentConfig c = resolve(hard_preset(), o_hard);
      return write_run(run_hard(c), c);
    }
    if (*agg) {
      const Summary s = aggregate(parse_results_csv(read_text_file(agg_in)));
      std::cerr << format_missing(s);
      if (agg_out.empty()) std::cout << format_summary_csv(s);
      else write_text_file(agg_out, format_summary_csv(s));
      return 0;
    }
    if (*plot) {
      PlotOptions opt;
      opt.metric = metric == "mixture" ? PlotOptions::Metric::kMixture : PlotOptions::Metric::kMember;
      opt.log_x = log_x;
      emit_plot(parse_summary_csv(read_text_file(plot_in)), plot_out, opt);
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric invariant failed: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
