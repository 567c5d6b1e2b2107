#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "degdist/estimator.hpp"
#include "degdist/graph.hpp"
#include "degdist/metrics.hpp"
#include "degdist/operator.hpp"
#include "degdist/samplers.hpp"
#include "degdist/smoothing.hpp"
#include "degdist/sure.hpp"

namespace degdist {

struct EstimatorSettings {
  std::optional<double> lambda;     ///< fixed lambda; skips SURE
  std::vector<double> lambda_grid;  ///< empty: default grid around the pilot value
  double target_condition = 20.0;   ///< condition number of C_hat
  std::optional<int> max_bandwidth;
  double epsilon = 0.1;
  int replicates = 100;
  double kkt_tolerance = 1e-8;
  int max_iterations = 0;
};

/// How the truncation degree M is chosen.
///   "observed": factor * max observed degree (scaled by 1/p for induced and
///               incident, by n_e / n*_e for the random walk)
///   "true":     factor * true max degree (needs the graph)
///   "auto":     "true" in simulations, "observed" otherwise
struct BoundPolicy {
  std::optional<int> bound;
  double factor = 1.1;
  std::string reference = "auto";
};

/// Everything a command needs. Serializes to JSON; re-running a saved config
/// reproduces the same files.
struct RunConfig {
  // Input: an edge list, an observed-counts CSV, or a generated graph.
  std::string graph_path;
  std::string counts_path;  ///< "degree,count" CSV of N*
  std::string estimate_path;
  std::string estimate_column = "estimate";
  std::string model = "er";  ///< er | two_block
  int vertex_count = 1000;
  double mean_degree = 10.0;

  Design design = Design::induced;
  double rate = 0.3;
  /// For snowball: `rate` is the target expected coverage |V*| / n_v and the
  /// seed rate is calibrated from the graph.
  bool rate_is_coverage = false;
  std::int64_t edge_budget = 0;  ///< random walk; 0 means round(rate * n_e)
  std::int64_t total_edges = 0;  ///< random walk from counts: n_e

  BoundPolicy bound;
  EstimatorSettings estimator;

  int trials = 100;
  int poisson_trials = 2000;
  std::vector<int> degrees;  ///< diagnose: degrees for the Poisson fits
  std::uint64_t seed = 1;
  int threads = 0;  ///< 0: hardware concurrency
  bool record_runtime = false;
  std::string output_dir;

  // Simulation sweep axes; an empty list uses the scalar field above.
  std::vector<std::string> sweep_designs;
  std::vector<double> sweep_rates;
  std::vector<std::string> sweep_models;
  std::vector<int> sweep_vertex_counts;
};

std::string config_to_json(const RunConfig& config);
RunConfig config_from_json(const std::string& text);
RunConfig read_config_file(const std::string& path);

/// Graph named by the config: read from graph_path or generated from
/// (model, vertex_count, mean_degree) with derive_seed(seed, 0).
Graph load_or_generate_graph(const RunConfig& config);

/// Seed of trial t: derive_seed(derive_seed(seed, 1), t).
std::uint64_t trial_seed(std::uint64_t master, int trial);

/// Rate and edge budget actually used when sampling `g`.
SampleParams resolve_sample_params(const RunConfig& config, const Graph& g);

/// Truncation degree from the policy; never below the max observed degree,
/// never above n_v - 1 (unless observed degrees force it).
int choose_bound(const RunConfig& config, double seed_rate, double edge_fraction, int max_observed,
                 std::optional<int> true_max, int vertex_count, bool simulating);

/// Operator for the design; the random walk needs both edge counts.
SamplingOperator operator_for(Design design, double seed_rate, std::int64_t total_edges,
                              std::int64_t sampled_edges, int bound);

struct Estimation {
  int bound = 0;
  Matrix op;
  Vector observed;
  CovarianceApprox covariance;
  std::optional<SureCurve> curve;
  double lambda = 0.0;
  QPSolution solution;
  Vector smoothed_baseline;  ///< LSCV-smoothed N*, rescaled to sum n_v
  bool census = false;       ///< identity operator: N* returned unchanged
};

/// covariance -> SURE (unless lambda is fixed) -> QP. `observed` has length
/// M + 1 matching `op`.
Estimation estimate_counts(const SamplingOperator& op, const Vector& observed, double vertex_count,
                           const EstimatorSettings& settings, std::uint64_t seed);

struct TrialRecord {
  int trial = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  int bound = 0;
  double ks_sample = 0.0;
  double ks_smoothed = 0.0;
  double ks_estimate = 0.0;
  double lambda = 0.0;
  double runtime_seconds = 0.0;
};

struct TrialOutcome {
  TrialRecord record;
  SampleResult sample;
  Estimation estimation;
};

/// Samples `truth` with `sample_seed`, estimates, and scores against the truth.
TrialOutcome run_trial(const Graph& truth, const RunConfig& config, const SampleParams& params, int trial,
                       std::uint64_t sample_seed, bool simulating);

struct ColumnSummary {
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double iqr = 0.0;
};

/// Linear-interpolation quantile of a nonempty sample.
double quantile(std::vector<double> values, double prob);
ColumnSummary summarize(const std::vector<double>& values);

struct SimulationSummary {
  Design design = Design::ego;
  std::string model;
  int vertex_count = 0;
  double rate = 0.0;
  double seed_rate = 0.0;
  std::int64_t edge_budget = 0;
  int trials = 0;
  int failures = 0;
  ColumnSummary ks_sample;
  ColumnSummary ks_smoothed;
  ColumnSummary ks_estimate;
  ColumnSummary lambda;
  std::vector<TrialRecord> records;
};

/// `trials` independent samples of one graph, run on a worker pool. Records
/// are ordered by trial index whatever the scheduling.
SimulationSummary simulate(const Graph& truth, const RunConfig& config);

// Commands. Each writes into config.output_dir (created if needed) and ends
// with manifest.json. Failures are rethrown with the stage name prefixed.
void cmd_generate(const RunConfig& config);
void cmd_sample(const RunConfig& config);
void cmd_estimate(const RunConfig& config);
void cmd_simulate(const RunConfig& config);
void cmd_bounds(const RunConfig& config);
void cmd_diagnose(const RunConfig& config);

/// "degree,count" CSV (header optional) into a dense count vector.
Vector read_counts_csv(const std::string& path);
/// Named numeric column of a CSV with a header row.
Vector read_csv_column(const std::string& path, const std::string& column);

}  // namespace degdist
