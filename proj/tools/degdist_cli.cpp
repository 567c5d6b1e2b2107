// degdist: estimate degree distributions of a graph from a sample of it.
//
// Exit codes: 0 success, 1 usage, 2 I/O, 3 invalid argument, 4 numerical
// failure, 5 anything else.

#include <cmath>
#include <cstdlib>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "degdist/pipeline.hpp"

namespace {

using degdist::RunConfig;

// Flag values that map onto optional config fields.
struct Extras {
  std::string config_path;
  std::string design;
  int bound = -1;
  int max_bandwidth = -1;
  double lambda = std::numeric_limits<double>::quiet_NaN();
};

void add_common(CLI::App* cmd, RunConfig& c, Extras& x) {
  cmd->add_option("--config", x.config_path, "JSON run config; supersedes every other flag");
  cmd->add_option("--seed", c.seed, "master seed");
  cmd->add_option("-o,--out", c.output_dir, "output directory (default: $DEGDIST_OUT/<command>)");
}

void add_graph_source(CLI::App* cmd, RunConfig& c) {
  cmd->add_option("--graph", c.graph_path, "edge-list file; otherwise a graph is generated");
  cmd->add_option("--model", c.model, "generator: er or two_block")->capture_default_str();
  cmd->add_option("--vertices", c.vertex_count, "n_v for generated graphs / counts input")->capture_default_str();
  cmd->add_option("--mean-degree", c.mean_degree, "mean degree of generated graphs")->capture_default_str();
}

void add_sampling(CLI::App* cmd, RunConfig& c, Extras& x) {
  cmd->add_option("--design", x.design, "ego, snowball1, induced, incident or random_walk");
  cmd->add_option("--rate", c.rate, "sampling rate p (random walk: edge fraction)")->capture_default_str();
  cmd->add_flag("--coverage", c.rate_is_coverage, "snowball: --rate is the target vertex coverage");
  cmd->add_option("--edge-budget", c.edge_budget, "random walk: distinct edges to collect");
  cmd->add_option("--total-edges", c.total_edges, "random walk from counts: n_e of the full graph");
}

void add_estimator(CLI::App* cmd, RunConfig& c, Extras& x) {
  cmd->add_option("-M,--bound", x.bound, "explicit truncation degree M");
  cmd->add_option("--bound-factor", c.bound.factor, "M = factor * reference degree")->capture_default_str();
  cmd->add_option("--bound-reference", c.bound.reference, "auto, observed or true")->capture_default_str();
  cmd->add_option("--lambda", x.lambda, "fixed penalty weight (skips SURE)");
  cmd->add_option("--lambda-grid", c.estimator.lambda_grid, "SURE grid")->delimiter(',');
  cmd->add_option("--target-condition", c.estimator.target_condition, "condition number of C_hat")
      ->capture_default_str();
  cmd->add_option("--max-bandwidth", x.max_bandwidth, "largest LSCV bandwidth tried");
  cmd->add_option("--epsilon", c.estimator.epsilon, "SURE perturbation scale")->capture_default_str();
  cmd->add_option("--replicates", c.estimator.replicates, "SURE Monte Carlo replicates K")->capture_default_str();
  cmd->add_option("--kkt-tol", c.estimator.kkt_tolerance, "QP KKT tolerance")->capture_default_str();
  cmd->add_option("--max-iter", c.estimator.max_iterations, "QP iteration cap (0: 50(M+1))");
}

RunConfig finalize(RunConfig c, const Extras& x, const std::string& command) {
  if (!x.config_path.empty()) {
    c = degdist::read_config_file(x.config_path);
  } else {
    if (!x.design.empty()) c.design = degdist::parse_design(x.design);
    if (x.bound >= 0) c.bound.bound = x.bound;
    if (x.max_bandwidth >= 0) c.estimator.max_bandwidth = x.max_bandwidth;
    if (!std::isnan(x.lambda)) c.estimator.lambda = x.lambda;
  }
  if (c.output_dir.empty()) {
    const char* root = std::getenv("DEGDIST_OUT");
    c.output_dir = std::string(root != nullptr && *root != '\0' ? root : "degdist_out") + "/" + command;
  }
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Degree-distribution estimation from sampled graphs"};
  app.require_subcommand(1);

  RunConfig cfg;
  Extras extras;

  auto* generate = app.add_subcommand("generate", "generate a random graph");
  add_common(generate, cfg, extras);
  add_graph_source(generate, cfg);

  auto* sample = app.add_subcommand("sample", "draw one sample from a graph");
  add_common(sample, cfg, extras);
  add_graph_source(sample, cfg);
  add_sampling(sample, cfg, extras);

  auto* estimate = app.add_subcommand("estimate", "estimate the degree distribution");
  add_common(estimate, cfg, extras);
  add_graph_source(estimate, cfg);
  add_sampling(estimate, cfg, extras);
  add_estimator(estimate, cfg, extras);
  estimate->add_option("--counts", cfg.counts_path, "observed counts CSV (degree,count) instead of a graph");

  auto* simulate = app.add_subcommand("simulate", "repeated sample/estimate trials with K-S summaries");
  add_common(simulate, cfg, extras);
  add_graph_source(simulate, cfg);
  add_sampling(simulate, cfg, extras);
  add_estimator(simulate, cfg, extras);
  simulate->add_option("--trials", cfg.trials, "trials per configuration")->capture_default_str();
  simulate->add_option("--threads", cfg.threads, "worker threads (0: all cores)");
  simulate->add_option("--designs", cfg.sweep_designs, "sweep over designs")->delimiter(',');
  simulate->add_option("--rates", cfg.sweep_rates, "sweep over rates")->delimiter(',');
  simulate->add_option("--models", cfg.sweep_models, "sweep over graph models")->delimiter(',');
  simulate->add_option("--sizes", cfg.sweep_vertex_counts, "sweep over n_v")->delimiter(',');
  simulate->add_flag("--record-runtime", cfg.record_runtime, "add per-trial wall time (not reproducible)");

  auto* bounds = app.add_subcommand("bounds", "epidemic-threshold bounds");
  add_common(bounds, cfg, extras);
  bounds->add_option("--graph", cfg.graph_path, "edge-list file (adds the lambda1 line)");
  bounds->add_option("--estimate", cfg.estimate_path, "estimate.csv from the estimate command");
  bounds->add_option("--column", cfg.estimate_column, "column of the estimate file")->capture_default_str();
  bounds->add_option("--counts", cfg.counts_path, "degree,count CSV");

  auto* diagnose = app.add_subcommand("diagnose", "operator spectrum and Poisson noise diagnostics");
  add_common(diagnose, cfg, extras);
  diagnose->add_option("--graph", cfg.graph_path, "edge-list file for the Poisson diagnostics");
  add_sampling(diagnose, cfg, extras);
  diagnose->add_option("-M,--bound", extras.bound, "truncation degree M");
  diagnose->add_option("--bound-factor", cfg.bound.factor, "M = factor * true max degree")->capture_default_str();
  diagnose->add_option("--degrees", cfg.degrees, "degrees for the Poisson fits")->delimiter(',');
  diagnose->add_option("--poisson-trials", cfg.poisson_trials, "samples for the Poisson fits")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const std::string name = app.get_subcommands().front()->get_name();
    const RunConfig run = finalize(cfg, extras, name);
    if (name == "generate") degdist::cmd_generate(run);
    if (name == "sample") degdist::cmd_sample(run);
    if (name == "estimate") degdist::cmd_estimate(run);
    if (name == "simulate") degdist::cmd_simulate(run);
    if (name == "bounds") degdist::cmd_bounds(run);
    if (name == "diagnose") degdist::cmd_diagnose(run);
    std::cout << run.output_dir << '\n';
    return 0;
  } catch (const degdist::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const degdist::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const degdist::NumericalError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 5;
  }
}
