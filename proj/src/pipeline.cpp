#include "degdist/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <thread>

#include "degdist/graph_io.hpp"
#include "degdist/variance_oracle.hpp"
#include "json.hpp"

namespace degdist {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Rethrows with the pipeline stage in front, keeping the error class.
template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  const auto label = [name](const std::exception& e) { return std::string("[") + name + "] " + e.what(); };
  try {
    return f();
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(label(e));
  } catch (const NumericalError& e) {
    throw NumericalError(label(e));
  } catch (const IoError& e) {
    throw IoError(label(e));
  }
}

std::string fmt(double x) {
  std::ostringstream s;
  s << std::setprecision(17) << x;
  return s.str();
}

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    out.push_back(cell);
  }
  return out;
}

double parse_number(const std::string& s, const std::string& path) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw InvalidArgument(path + ": not a number: '" + s + "'");
  }
}

// Writes files under one run directory and remembers them for the manifest.
class RunDir {
 public:
  explicit RunDir(const std::string& dir) : dir_(dir.empty() ? fs::path("degdist_out") : fs::path(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create output directory " + dir_.string() + ": " + ec.message());
  }

  std::ofstream open(const std::string& name) {
    std::ofstream out(dir_ / name, std::ios::binary);
    if (!out) throw IoError("cannot write " + (dir_ / name).string());
    out << std::setprecision(17);
    files_.push_back(name);
    return out;
  }

  void write_json(const std::string& name, const json& j) {
    auto out = open(name);
    out << j.dump(2) << '\n';
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  void add_file(const std::string& name) { files_.push_back(name); }

  void manifest(const std::string& command, const RunConfig& config, const std::string& status,
                const std::string& error, const json& extra) {
    json m;
    m["command"] = command;
    m["status"] = status;
    if (!error.empty()) m["error"] = error;
    m["config"] = json::parse(config_to_json(config));
    m["files"] = files_;
    if (!extra.is_null()) m["details"] = extra;
    std::ofstream out(dir_ / "manifest.json", std::ios::binary);
    if (!out) throw IoError("cannot write manifest in " + dir_.string());
    out << m.dump(2) << '\n';
  }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
};

// Runs a command body; on failure leaves a manifest that marks the run failed.
template <class F>
void run_command(const std::string& command, const RunConfig& config, F&& body) {
  RunDir dir(config.output_dir);
  json extra;
  try {
    body(dir, extra);
  } catch (const std::exception& e) {
    dir.manifest(command, config, "failed", e.what(), extra);
    throw;
  }
  dir.manifest(command, config, "ok", "", extra);
}

void write_counts(std::ofstream& out, const Vector& counts) {
  out << "degree,count\n";
  for (Eigen::Index k = 0; k < counts.size(); ++k) out << k << ',' << fmt(counts[k]) << '\n';
}

json bounds_json(const BoundsReport& r) {
  json j;
  j["m1"] = r.m1;
  j["m2"] = r.m2;
  j["u"] = r.u;
  j["edge_count"] = r.edge_count;
  j["vertex_count"] = r.vertex_count;
  j["inv_m1"] = number_or_null(r.inv_m1);
  j["inv_sqrt_m2"] = number_or_null(r.inv_sqrt_m2);
  j["inv_u"] = number_or_null(r.inv_u);
  j["lambda1"] = r.lambda1 ? json(*r.lambda1) : json(nullptr);
  j["inv_lambda1"] = r.inv_lambda1 ? number_or_null(*r.inv_lambda1) : json(nullptr);
  j["degenerate"] = r.degenerate;
  return j;
}

json summary_json(const ColumnSummary& s) {
  return {{"median", s.median}, {"q1", s.q1}, {"q3", s.q3}, {"iqr", s.iqr}};
}

LabeledGraph load_labeled(const RunConfig& config) {
  if (!config.graph_path.empty()) return read_edge_list_file(config.graph_path);
  LabeledGraph out;
  out.graph = load_or_generate_graph(config);
  out.labels.resize(static_cast<std::size_t>(out.graph.vertex_count()));
  for (std::size_t i = 0; i < out.labels.size(); ++i) out.labels[i] = static_cast<std::int64_t>(i);
  return out;
}

Vector pad(const Vector& v, Eigen::Index size) {
  Vector out = Vector::Zero(std::max(size, v.size()));
  out.head(v.size()) = v;
  return out;
}

bool is_identity(const Matrix& m) {
  return m.rows() == m.cols() && (m - Matrix::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff() == 0.0;
}

}  // namespace

// ---- configuration --------------------------------------------------------

std::string config_to_json(const RunConfig& c) {
  json j;
  j["graph_path"] = c.graph_path;
  j["counts_path"] = c.counts_path;
  j["estimate_path"] = c.estimate_path;
  j["estimate_column"] = c.estimate_column;
  j["model"] = c.model;
  j["vertex_count"] = c.vertex_count;
  j["mean_degree"] = c.mean_degree;
  j["design"] = std::string(to_string(c.design));
  j["rate"] = c.rate;
  j["rate_is_coverage"] = c.rate_is_coverage;
  j["edge_budget"] = c.edge_budget;
  j["total_edges"] = c.total_edges;
  j["bound"] = c.bound.bound ? json(*c.bound.bound) : json(nullptr);
  j["bound_factor"] = c.bound.factor;
  j["bound_reference"] = c.bound.reference;
  const EstimatorSettings& e = c.estimator;
  j["lambda"] = e.lambda ? json(*e.lambda) : json(nullptr);
  j["lambda_grid"] = e.lambda_grid;
  j["target_condition"] = e.target_condition;
  j["max_bandwidth"] = e.max_bandwidth ? json(*e.max_bandwidth) : json(nullptr);
  j["epsilon"] = e.epsilon;
  j["replicates"] = e.replicates;
  j["kkt_tolerance"] = e.kkt_tolerance;
  j["max_iterations"] = e.max_iterations;
  j["trials"] = c.trials;
  j["poisson_trials"] = c.poisson_trials;
  j["degrees"] = c.degrees;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["record_runtime"] = c.record_runtime;
  j["output_dir"] = c.output_dir;
  j["sweep_designs"] = c.sweep_designs;
  j["sweep_rates"] = c.sweep_rates;
  j["sweep_models"] = c.sweep_models;
  j["sweep_vertex_counts"] = c.sweep_vertex_counts;
  return j.dump(2);
}

RunConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw InvalidArgument("config must be a JSON object");
  const json defaults = json::parse(config_to_json(RunConfig{}));
  for (const auto& item : j.items())
    if (!defaults.contains(item.key())) throw InvalidArgument("unknown config key '" + item.key() + "'");

  RunConfig c;
  try {
    c.graph_path = j.value("graph_path", c.graph_path);
    c.counts_path = j.value("counts_path", c.counts_path);
    c.estimate_path = j.value("estimate_path", c.estimate_path);
    c.estimate_column = j.value("estimate_column", c.estimate_column);
    c.model = j.value("model", c.model);
    c.vertex_count = j.value("vertex_count", c.vertex_count);
    c.mean_degree = j.value("mean_degree", c.mean_degree);
    if (j.contains("design")) c.design = parse_design(j.at("design").get<std::string>());
    c.rate = j.value("rate", c.rate);
    c.rate_is_coverage = j.value("rate_is_coverage", c.rate_is_coverage);
    c.edge_budget = j.value("edge_budget", c.edge_budget);
    c.total_edges = j.value("total_edges", c.total_edges);
    if (j.contains("bound") && !j.at("bound").is_null()) c.bound.bound = j.at("bound").get<int>();
    c.bound.factor = j.value("bound_factor", c.bound.factor);
    c.bound.reference = j.value("bound_reference", c.bound.reference);
    EstimatorSettings& e = c.estimator;
    if (j.contains("lambda") && !j.at("lambda").is_null()) e.lambda = j.at("lambda").get<double>();
    e.lambda_grid = j.value("lambda_grid", e.lambda_grid);
    e.target_condition = j.value("target_condition", e.target_condition);
    if (j.contains("max_bandwidth") && !j.at("max_bandwidth").is_null())
      e.max_bandwidth = j.at("max_bandwidth").get<int>();
    e.epsilon = j.value("epsilon", e.epsilon);
    e.replicates = j.value("replicates", e.replicates);
    e.kkt_tolerance = j.value("kkt_tolerance", e.kkt_tolerance);
    e.max_iterations = j.value("max_iterations", e.max_iterations);
    c.trials = j.value("trials", c.trials);
    c.poisson_trials = j.value("poisson_trials", c.poisson_trials);
    c.degrees = j.value("degrees", c.degrees);
    c.seed = j.value("seed", c.seed);
    c.threads = j.value("threads", c.threads);
    c.record_runtime = j.value("record_runtime", c.record_runtime);
    c.output_dir = j.value("output_dir", c.output_dir);
    c.sweep_designs = j.value("sweep_designs", c.sweep_designs);
    c.sweep_rates = j.value("sweep_rates", c.sweep_rates);
    c.sweep_models = j.value("sweep_models", c.sweep_models);
    c.sweep_vertex_counts = j.value("sweep_vertex_counts", c.sweep_vertex_counts);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("config field has the wrong type: ") + e.what());
  }
  if (c.bound.reference != "auto" && c.bound.reference != "observed" && c.bound.reference != "true")
    throw InvalidArgument("bound_reference must be auto, observed or true");
  return c;
}

RunConfig read_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return config_from_json(text.str());
}

Graph load_or_generate_graph(const RunConfig& config) {
  if (!config.graph_path.empty()) return read_edge_list_file(config.graph_path).graph;
  const std::uint64_t seed = derive_seed(config.seed, 0);
  const double edges = static_cast<double>(edges_for_mean_degree(config.vertex_count, config.mean_degree));
  if (config.model == "er") return generate_er(config.vertex_count, static_cast<std::int64_t>(edges), seed);
  if (config.model == "two_block") return generate_two_block(config.vertex_count, edges, BlockRatio{}, seed);
  throw InvalidArgument("unknown graph model '" + config.model + "' (expected er or two_block)");
}

std::uint64_t trial_seed(std::uint64_t master, int trial) {
  return derive_seed(derive_seed(master, 1), static_cast<std::uint64_t>(trial));
}

SampleParams resolve_sample_params(const RunConfig& config, const Graph& g) {
  SampleParams p;
  p.rate = config.rate;
  if (config.design == Design::snowball1 && config.rate_is_coverage) p.rate = calibrate_snowball_rate(g, config.rate);
  if (config.design == Design::random_walk) {
    const std::int64_t ne = g.edge_count();
    p.edge_budget = config.edge_budget > 0
                        ? config.edge_budget
                        : std::max<std::int64_t>(1, std::llround(config.rate * static_cast<double>(ne)));
    p.rate = ne > 0 ? static_cast<double>(p.edge_budget) / static_cast<double>(ne) : config.rate;
  }
  return p;
}

int choose_bound(const RunConfig& config, double seed_rate, double edge_fraction, int max_observed,
                 std::optional<int> true_max, int vertex_count, bool simulating) {
  max_observed = std::max(max_observed, 0);
  if (config.bound.bound) {
    if (*config.bound.bound < max_observed)
      throw InvalidArgument("explicit M=" + std::to_string(*config.bound.bound) + " is below the max observed degree " +
                            std::to_string(max_observed));
    return *config.bound.bound;
  }
  if (!(config.bound.factor >= 1.0)) throw InvalidArgument("bound factor must be >= 1");
  std::string ref = config.bound.reference;
  if (ref == "auto") ref = simulating && true_max ? "true" : "observed";
  double target = 0.0;
  if (ref == "true") {
    if (!true_max) throw InvalidArgument("bound_reference=true needs the true graph");
    target = config.bound.factor * *true_max;
  } else {
    double scale = 1.0;
    if (config.design == Design::induced || config.design == Design::incident) scale = 1.0 / seed_rate;
    if (config.design == Design::random_walk) scale = 1.0 / edge_fraction;
    target = config.bound.factor * max_observed * scale;
  }
  int m = static_cast<int>(std::ceil(target - 1e-9));
  if (vertex_count > 1) m = std::min(m, vertex_count - 1);
  m = std::max(m, std::min(2, std::max(vertex_count - 1, 0)));
  return std::max(m, max_observed);
}

SamplingOperator operator_for(Design design, double seed_rate, std::int64_t total_edges, std::int64_t sampled_edges,
                              int bound) {
  if (design == Design::random_walk) return build_random_walk_operator(total_edges, sampled_edges, bound);
  return build_operator(design, seed_rate, bound);
}

// ---- estimation -----------------------------------------------------------

Estimation estimate_counts(const SamplingOperator& op, const Vector& observed, double vertex_count,
                           const EstimatorSettings& settings, std::uint64_t seed) {
  if (observed.size() != op.matrix().cols())
    throw InvalidArgument("observed counts have length " + std::to_string(observed.size()) + " but M+1=" +
                          std::to_string(op.matrix().cols()));
  Estimation est;
  est.bound = op.bound();
  est.op = op.matrix();
  est.observed = observed;

  if (is_identity(est.op)) {
    // Census: nothing to invert and no sampling noise.
    est.census = true;
    est.solution.n_hat = observed;
    est.solution.converged = true;
    est.smoothed_baseline = observed;
    est.covariance.smoothed = observed;
    est.covariance.diagonal = Vector::Ones(observed.size());
    return est;
  }

  est.covariance = stage("covariance", [&] {
    return build_covariance(observed, settings.target_condition, settings.max_bandwidth);
  });
  est.smoothed_baseline = smooth_counts(observed, est.covariance.bandwidth);
  if (est.smoothed_baseline.sum() > 0.0) est.smoothed_baseline *= vertex_count / est.smoothed_baseline.sum();

  const PwlsProblem problem(est.op, est.covariance.inverse_diagonal(), vertex_count);
  SolverOptions options;
  options.kkt_tolerance = settings.kkt_tolerance;
  options.max_iterations = settings.max_iterations;

  if (settings.lambda) {
    est.lambda = *settings.lambda;
  } else {
    SureConfig sure;
    sure.epsilon = settings.epsilon;
    sure.replicates = settings.replicates;
    sure.lambda_grid = settings.lambda_grid;
    sure.seed = seed;
    est.curve = stage("sure", [&] { return select_lambda(problem, observed, sure, options); });
    est.lambda = est.curve->argmin_lambda;
  }
  est.solution = stage("solve", [&] { return problem.solve(observed, est.lambda, options); });
  if (!est.solution.converged)
    throw NumericalError("[solve] active-set solver did not converge (KKT residual " + fmt(est.solution.kkt_residual) +
                         ")");
  return est;
}

TrialOutcome run_trial(const Graph& truth, const RunConfig& config, const SampleParams& params, int trial,
                       std::uint64_t sample_seed, bool simulating) {
  const auto start = std::chrono::steady_clock::now();
  TrialOutcome out;
  out.record.trial = trial;
  out.record.seed = sample_seed;
  out.sample = stage("sample", [&] { return sample(config.design, truth, params, sample_seed); });

  const DegreeCounts true_counts = degree_counts(truth);
  const double edge_fraction =
      truth.edge_count() > 0 ? static_cast<double>(params.edge_budget) / static_cast<double>(truth.edge_count()) : 1.0;
  const int bound = stage("bound", [&] {
    return choose_bound(config, params.rate, edge_fraction, out.sample.observed_counts.max_occupied(),
                        truth.max_degree(), truth.vertex_count(), simulating);
  });
  const std::int64_t sampled_edges =
      config.design == Design::random_walk ? params.edge_budget : out.sample.sampled_graph.edge_count();
  const SamplingOperator op =
      stage("operator", [&] { return operator_for(config.design, params.rate, truth.edge_count(), sampled_edges, bound); });
  const Vector observed = out.sample.counts(bound).values();
  out.estimation = estimate_counts(op, observed, truth.vertex_count(), config.estimator, derive_seed(sample_seed, 2));

  const Vector& t = true_counts.values();
  out.record.bound = bound;
  out.record.ks_sample = observed.sum() > 0.0 ? ks_d_statistic(observed, t) : 1.0;
  out.record.ks_smoothed = out.estimation.smoothed_baseline.sum() > 0.0 ? ks_d_statistic(out.estimation.smoothed_baseline, t) : 1.0;
  out.record.ks_estimate = ks_d_statistic(out.estimation.solution.n_hat, t);
  out.record.lambda = out.estimation.lambda;
  out.record.ok = true;
  if (config.record_runtime)
    out.record.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

double quantile(std::vector<double> values, double prob) {
  if (values.empty()) throw InvalidArgument("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = prob * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

ColumnSummary summarize(const std::vector<double>& values) {
  ColumnSummary s;
  if (values.empty()) {
    s.median = s.q1 = s.q3 = s.iqr = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  s.median = quantile(values, 0.5);
  s.q1 = quantile(values, 0.25);
  s.q3 = quantile(values, 0.75);
  s.iqr = s.q3 - s.q1;
  return s;
}

SimulationSummary simulate(const Graph& truth, const RunConfig& config) {
  if (config.trials < 1) throw InvalidArgument("trials must be >= 1");
  const SampleParams params = stage("calibrate", [&] { return resolve_sample_params(config, truth); });
  SimulationSummary summary;
  summary.design = config.design;
  summary.model = config.graph_path.empty() ? config.model : config.graph_path;
  summary.vertex_count = truth.vertex_count();
  summary.rate = config.rate;
  summary.seed_rate = params.rate;
  summary.edge_budget = params.edge_budget;
  summary.trials = config.trials;
  summary.records.resize(static_cast<std::size_t>(config.trials));

  unsigned workers = config.threads > 0 ? static_cast<unsigned>(config.threads) : std::thread::hardware_concurrency();
  workers = std::max(1u, std::min(workers, static_cast<unsigned>(config.trials)));
  std::atomic<int> next{0};
  const auto work = [&] {
    for (int t = next++; t < config.trials; t = next++) {
      const std::uint64_t seed = trial_seed(config.seed, t);
      try {
        summary.records[t] = run_trial(truth, config, params, t, seed, true).record;
      } catch (const std::exception& e) {
        TrialRecord r;
        r.trial = t;
        r.seed = seed;
        r.ok = false;
        r.error = e.what();
        summary.records[t] = r;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < workers; ++i) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();

  std::vector<double> ks_s, ks_k, ks_e, lam;
  for (const TrialRecord& r : summary.records) {
    if (!r.ok) {
      ++summary.failures;
      continue;
    }
    ks_s.push_back(r.ks_sample);
    ks_k.push_back(r.ks_smoothed);
    ks_e.push_back(r.ks_estimate);
    lam.push_back(r.lambda);
  }
  summary.ks_sample = summarize(ks_s);
  summary.ks_smoothed = summarize(ks_k);
  summary.ks_estimate = summarize(ks_e);
  summary.lambda = summarize(lam);
  return summary;
}

// ---- file helpers ---------------------------------------------------------

Vector read_counts_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  std::vector<std::pair<long, double>> rows;
  std::string line;
  long max_degree = -1;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split(line, ',');
    if (cells.size() < 2) throw InvalidArgument(path + ": expected 'degree,count' rows");
    if (rows.empty() && cells[0] == "degree") continue;
    const double d = parse_number(cells[0], path);
    const double c = parse_number(cells[1], path);
    if (d < 0 || d != std::floor(d)) throw InvalidArgument(path + ": degree must be a non-negative integer");
    if (c < 0) throw InvalidArgument(path + ": counts must be non-negative");
    rows.emplace_back(static_cast<long>(d), c);
    max_degree = std::max(max_degree, static_cast<long>(d));
  }
  if (rows.empty()) throw InvalidArgument(path + ": no counts");
  Vector out = Vector::Zero(max_degree + 1);
  for (const auto& [d, c] : rows) out[d] += c;
  return out;
}

Vector read_csv_column(const std::string& path, const std::string& column) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument(path + ": empty file");
  const auto header = split(line, ',');
  const auto it = std::find(header.begin(), header.end(), column);
  if (it == header.end()) throw InvalidArgument(path + ": no column named '" + column + "'");
  const auto idx = static_cast<std::size_t>(it - header.begin());
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() <= idx) throw InvalidArgument(path + ": short row");
    values.push_back(parse_number(cells[idx], path));
  }
  if (values.empty()) throw InvalidArgument(path + ": no data rows");
  return Eigen::Map<Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

// ---- commands -------------------------------------------------------------

void cmd_generate(const RunConfig& config) {
  run_command("generate", config, [&](RunDir& dir, json& extra) {
    const Graph g = stage("generate", [&] { return load_or_generate_graph(config); });
    {
      auto out = dir.open("graph.edges");
      write_edge_list(out, g);
    }
    {
      auto out = dir.open("degree_counts.csv");
      write_counts(out, degree_counts(g).values());
    }
    extra["vertex_count"] = g.vertex_count();
    extra["edge_count"] = g.edge_count();
    extra["max_degree"] = g.max_degree();
    extra["graph_seed"] = derive_seed(config.seed, 0);
  });
}

void cmd_sample(const RunConfig& config) {
  run_command("sample", config, [&](RunDir& dir, json& extra) {
    const LabeledGraph lg = stage("load", [&] { return load_labeled(config); });
    const Graph& g = lg.graph;
    const SampleParams params = stage("calibrate", [&] { return resolve_sample_params(config, g); });
    const std::uint64_t seed = trial_seed(config.seed, 0);
    const SampleResult s = stage("sample", [&] { return sample(config.design, g, params, seed); });
    {
      auto out = dir.open("sampled.edges");
      out << "# sampled subgraph: " << s.included_count() << " vertices, " << s.sampled_graph.edge_count()
          << " edges (labels of the input graph)\n";
      for (std::size_t i = 0; i < s.included.size(); ++i)
        if (s.observed_degree[i] == 0) out << lg.labels[s.included[i]] << '\n';
      for (const Edge& e : s.sampled_graph.edges()) out << lg.labels[e.u] << ' ' << lg.labels[e.v] << '\n';
    }
    {
      auto out = dir.open("observed_counts.csv");
      write_counts(out, s.observed_counts.values());
    }
    {
      auto out = dir.open("included.csv");
      out << "vertex,observed_degree,true_degree\n";
      for (std::size_t i = 0; i < s.included.size(); ++i)
        out << lg.labels[s.included[i]] << ',' << s.observed_degree[i] << ',' << g.degree(s.included[i]) << '\n';
    }
    {
      // Dense index used internally -> label in the input file.
      auto out = dir.open("labels.csv");
      out << "index,label\n";
      for (std::size_t i = 0; i < lg.labels.size(); ++i) out << i << ',' << lg.labels[i] << '\n';
    }
    json j;
    j["design"] = std::string(to_string(config.design));
    j["rate"] = config.rate;
    j["seed_rate"] = params.rate;
    j["edge_budget"] = params.edge_budget;
    j["seed"] = seed;
    j["vertex_count"] = g.vertex_count();
    j["edge_count"] = g.edge_count();
    j["included_vertices"] = s.included_count();
    j["sampled_edges"] = s.sampled_graph.edge_count();
    j["max_observed_degree"] = s.observed_counts.max_occupied();
    const Vector& oc = s.observed_counts.values();
    j["observed_counts"] = std::vector<double>(oc.data(), oc.data() + oc.size());
    dir.write_json("sample.json", j);
    extra = j;
  });
}

void cmd_estimate(const RunConfig& config) {
  run_command("estimate", config, [&](RunDir& dir, json& extra) {
    Estimation est;
    std::optional<Vector> truth;
    json diag;
    if (!config.counts_path.empty()) {
      const Vector raw = stage("load", [&] { return read_counts_csv(config.counts_path); });
      const double nv = config.vertex_count;
      if (raw.sum() > nv) throw InvalidArgument("observed counts exceed vertex_count");
      const DegreeCounts counts(raw);
      double edge_fraction = 1.0;
      std::int64_t budget = config.edge_budget;
      if (config.design == Design::random_walk) {
        if (config.total_edges < 1) throw InvalidArgument("random walk estimation needs total_edges");
        if (budget < 1) budget = std::llround(config.rate * static_cast<double>(config.total_edges));
        edge_fraction = static_cast<double>(budget) / static_cast<double>(config.total_edges);
      }
      const int bound = stage("bound", [&] {
        return choose_bound(config, config.rate, edge_fraction, counts.max_occupied(), std::nullopt,
                            config.vertex_count, false);
      });
      const SamplingOperator op =
          stage("operator", [&] { return operator_for(config.design, config.rate, config.total_edges, budget, bound); });
      est = estimate_counts(op, counts.resized(bound).values(), nv, config.estimator, derive_seed(config.seed, 2));
      diag["seed_rate"] = config.rate;
      diag["vertex_count"] = nv;
    } else {
      const Graph g = stage("load", [&] { return load_or_generate_graph(config); });
      const SampleParams params = stage("calibrate", [&] { return resolve_sample_params(config, g); });
      TrialOutcome outcome = run_trial(g, config, params, 0, trial_seed(config.seed, 0), false);
      est = std::move(outcome.estimation);
      truth = degree_counts(g).values();
      diag["seed_rate"] = params.rate;
      diag["edge_budget"] = params.edge_budget;
      diag["vertex_count"] = g.vertex_count();
      diag["edge_count"] = g.edge_count();
      diag["sample_seed"] = outcome.record.seed;
      diag["included_vertices"] = outcome.sample.included_count();
      diag["ks"] = {{"sample", outcome.record.ks_sample},
                    {"smoothed", outcome.record.ks_smoothed},
                    {"estimate", outcome.record.ks_estimate}};
    }

    {
      auto out = dir.open("estimate.csv");
      out << "degree,observed,smoothed,estimate" << (truth ? ",truth" : "") << '\n';
      const Vector t = truth ? pad(*truth, est.observed.size()) : Vector();
      const Eigen::Index rows = std::max(est.observed.size(), t.size());
      for (Eigen::Index k = 0; k < rows; ++k) {
        const auto at = [k](const Vector& v) { return k < v.size() ? v[k] : 0.0; };
        out << k << ',' << fmt(at(est.observed)) << ',' << fmt(at(est.smoothed_baseline)) << ','
            << fmt(at(est.solution.n_hat));
        if (truth) out << ',' << fmt(at(t));
        out << '\n';
      }
    }
    if (est.curve) {
      auto out = dir.open("sure_curve.csv");
      out << "lambda,wmse_hat,divergence,std_error,converged\n";
      for (const SurePoint& p : est.curve->points)
        out << fmt(p.lambda) << ',' << fmt(p.wmse_hat) << ',' << fmt(p.divergence) << ',' << fmt(p.div_std_error)
            << ',' << (p.converged ? 1 : 0) << '\n';
    }
    diag["design"] = std::string(to_string(config.design));
    diag["bound"] = est.bound;
    diag["census"] = est.census;
    diag["lambda"] = est.lambda;
    diag["lambda_source"] = est.census ? "census" : (est.curve ? "sure" : "fixed");
    diag["covariance"] = {{"bandwidth", est.covariance.bandwidth},
                          {"delta", est.covariance.delta},
                          {"condition_number", est.covariance.condition_number()}};
    diag["operator_condition_number"] = number_or_null(spectral(est.op).condition_number);
    diag["solver"] = {{"converged", est.solution.converged},
                      {"iterations", est.solution.iterations},
                      {"kkt_residual", est.solution.kkt_residual},
                      {"objective", est.solution.objective},
                      {"active_set", est.solution.active_set}};
    dir.write_json("diagnostics.json", diag);
    extra = {{"bound", est.bound}, {"lambda", est.lambda}};
  });
}

void cmd_simulate(const RunConfig& config) {
  run_command("simulate", config, [&](RunDir& dir, json& extra) {
    const std::vector<std::string> designs =
        config.sweep_designs.empty() ? std::vector<std::string>{std::string(to_string(config.design))}
                                     : config.sweep_designs;
    const std::vector<double> rates = config.sweep_rates.empty() ? std::vector<double>{config.rate} : config.sweep_rates;
    const std::vector<std::string> models =
        config.graph_path.empty() && !config.sweep_models.empty() ? config.sweep_models
                                                                  : std::vector<std::string>{config.model};
    const std::vector<int> sizes = config.graph_path.empty() && !config.sweep_vertex_counts.empty()
                                       ? config.sweep_vertex_counts
                                       : std::vector<int>{config.vertex_count};

    auto trials_out = dir.open("trials.csv");
    trials_out << "model,vertex_count,design,rate,trial,seed,ok,bound,ks_sample,ks_smoothed,ks_estimate,lambda"
               << (config.record_runtime ? ",runtime_seconds" : "") << ",error\n";
    auto summary_out = dir.open("summary.csv");
    summary_out << "model,vertex_count,design,rate,seed_rate,trials,failures";
    for (const char* col : {"ks_sample", "ks_smoothed", "ks_estimate", "lambda"})
      summary_out << ',' << col << "_median," << col << "_iqr";
    summary_out << '\n';

    json runs = json::array();
    for (const std::string& model : models) {
      for (int n : sizes) {
        RunConfig graph_cfg = config;
        graph_cfg.model = model;
        graph_cfg.vertex_count = n;
        const Graph g = stage("generate", [&] { return load_or_generate_graph(graph_cfg); });
        for (const std::string& design_name : designs) {
          for (double rate : rates) {
            RunConfig cfg = graph_cfg;
            cfg.design = parse_design(design_name);
            cfg.rate = rate;
            const SimulationSummary s = simulate(g, cfg);
            const std::string design_str(to_string(cfg.design));
            for (const TrialRecord& r : s.records) {
              std::string err = r.error;
              std::replace(err.begin(), err.end(), ',', ';');
              std::replace(err.begin(), err.end(), '\n', ' ');
              trials_out << s.model << ',' << n << ',' << design_str << ',' << fmt(rate) << ',' << r.trial << ','
                         << r.seed << ',' << (r.ok ? 1 : 0) << ',' << r.bound << ',' << fmt(r.ks_sample) << ','
                         << fmt(r.ks_smoothed) << ',' << fmt(r.ks_estimate) << ',' << fmt(r.lambda);
              if (config.record_runtime) trials_out << ',' << fmt(r.runtime_seconds);
              trials_out << ',' << err << '\n';
            }
            summary_out << s.model << ',' << n << ',' << design_str << ',' << fmt(rate) << ',' << fmt(s.seed_rate)
                        << ',' << s.trials << ',' << s.failures;
            for (const ColumnSummary* c : {&s.ks_sample, &s.ks_smoothed, &s.ks_estimate, &s.lambda})
              summary_out << ',' << fmt(c->median) << ',' << fmt(c->iqr);
            summary_out << '\n';
            runs.push_back({{"model", s.model},
                            {"vertex_count", n},
                            {"edge_count", g.edge_count()},
                            {"design", design_str},
                            {"rate", rate},
                            {"seed_rate", s.seed_rate},
                            {"edge_budget", s.edge_budget},
                            {"trials", s.trials},
                            {"failures", s.failures},
                            {"ks_sample", summary_json(s.ks_sample)},
                            {"ks_smoothed", summary_json(s.ks_smoothed)},
                            {"ks_estimate", summary_json(s.ks_estimate)},
                            {"lambda", summary_json(s.lambda)}});
          }
        }
      }
    }
    dir.write_json("summary.json", runs);
    extra["runs"] = runs.size();
  });
}

void cmd_bounds(const RunConfig& config) {
  run_command("bounds", config, [&](RunDir& dir, json& extra) {
    BoundsReport report;
    std::string source;
    if (!config.graph_path.empty()) {
      const Graph g = stage("load", [&] { return read_edge_list_file(config.graph_path).graph; });
      report = stage("bounds", [&] { return epidemic_bounds(g); });
      source = "graph";
    } else if (!config.estimate_path.empty()) {
      const Vector v = stage("load", [&] { return read_csv_column(config.estimate_path, config.estimate_column); });
      report = stage("bounds", [&] { return epidemic_bounds(v); });
      source = "estimate";
    } else if (!config.counts_path.empty()) {
      const Vector v = stage("load", [&] { return read_counts_csv(config.counts_path); });
      report = stage("bounds", [&] { return epidemic_bounds(v); });
      source = "counts";
    } else {
      throw InvalidArgument("bounds needs a graph, an estimate or a counts file");
    }
    json j = bounds_json(report);
    j["source"] = source;
    dir.write_json("bounds.json", j);
    auto out = dir.open("bounds.csv");
    out << "quantity,value\n";
    out << "inv_m1," << fmt(report.inv_m1) << '\n';
    out << "inv_sqrt_m2," << fmt(report.inv_sqrt_m2) << '\n';
    if (report.inv_lambda1) out << "inv_lambda1," << fmt(*report.inv_lambda1) << '\n';
    out << "inv_u," << fmt(report.inv_u) << '\n';
    extra["source"] = source;
  });
}

void cmd_diagnose(const RunConfig& config) {
  run_command("diagnose", config, [&](RunDir& dir, json& extra) {
    std::optional<Graph> g;
    if (!config.graph_path.empty()) g = stage("load", [&] { return read_edge_list_file(config.graph_path).graph; });
    int bound = 0;
    if (config.bound.bound) {
      bound = *config.bound.bound;
    } else if (g) {
      bound = static_cast<int>(std::ceil(config.bound.factor * g->max_degree() - 1e-9));
    } else {
      throw InvalidArgument("diagnose needs an explicit M or a graph");
    }
    std::int64_t total = g ? g->edge_count() : config.total_edges;
    std::int64_t budget = config.edge_budget;
    if (config.design == Design::random_walk && budget < 1)
      budget = std::llround(config.rate * static_cast<double>(total));
    const SamplingOperator op =
        stage("operator", [&] { return operator_for(config.design, config.rate, total, budget, bound); });
    const SpectralDiagnostics sd = stage("spectral", [&] { return spectral(op); });
    {
      auto out = dir.open("spectrum.csv");
      out << "index,singular_value\n";
      for (Eigen::Index i = 0; i < sd.singular_values.size(); ++i) out << i << ',' << fmt(sd.singular_values[i]) << '\n';
    }
    {
      auto out = dir.open("operator.csv");
      for (Eigen::Index r = 0; r < op.matrix().rows(); ++r) {
        for (Eigen::Index c = 0; c < op.matrix().cols(); ++c) out << (c ? "," : "") << fmt(op.matrix()(r, c));
        out << '\n';
      }
    }
    json j;
    j["design"] = std::string(to_string(config.design));
    j["rate"] = op.rate();
    j["bound"] = bound;
    j["condition_number"] = number_or_null(sd.condition_number);
    j["singular_value_max"] = sd.singular_values[0];
    j["singular_value_min"] = sd.singular_values[sd.singular_values.size() - 1];
    if (is_subgraph_design(config.design)) j["eigenvalue_ratio"] = number_or_null(triangular_eigenvalue_ratio(op.matrix()));
    std::vector<double> col_sums;
    for (Eigen::Index c = 0; c < op.matrix().cols(); ++c) col_sums.push_back(op.matrix().col(c).sum());
    j["column_sums"] = col_sums;

    if (g && config.design == Design::induced) {
      std::vector<int> degrees = config.degrees;
      if (degrees.empty()) {
        const DegreeCounts t = degree_counts(*g);
        double mean = 0.0;
        for (Eigen::Index k = 0; k < t.size(); ++k) mean += static_cast<double>(k) * t[k];
        mean /= t.total();
        const int centre = static_cast<int>(std::lround(config.rate * mean));
        for (int k = std::max(0, centre - 2); k <= centre + 2; ++k) degrees.push_back(k);
      }
      const std::uint64_t seed = derive_seed(config.seed, 3);
      json fits = json::array();
      for (const MarginalFit& f : induced_marginal_fits(*g, config.rate, degrees, config.poisson_trials, seed)) {
        fits.push_back({{"k", f.k},
                        {"expected", f.expected},
                        {"mc_mean", f.mc_mean},
                        {"mc_variance", f.mc_variance},
                        {"tv_distance", f.tv_distance},
                        {"histogram", f.histogram},
                        {"qq", f.qq}});
      }
      json tails = json::array();
      for (int k : degrees) {
        const PoissonDiagnostics pd = poisson_diagnostics(*g, config.rate, k, std::max(config.poisson_trials, 1000), seed);
        tails.push_back({{"k", pd.k},
                         {"lambda", pd.lambda},
                         {"sum_pi_squared", pd.sum_pi_squared},
                         {"mc_mean", pd.mc_mean},
                         {"mc_variance", pd.mc_variance},
                         {"chen_stein_bound", pd.chen_stein_bound},
                         {"tv_distance", pd.tv_distance},
                         {"mc_margin", pd.mc_margin}});
      }
      dir.write_json("poisson.json", {{"trials", config.poisson_trials}, {"marginals", fits}, {"tail_counts", tails}});
    }
    dir.write_json("diagnostics.json", j);
    extra["bound"] = bound;
  });
}

}  // namespace degdist
