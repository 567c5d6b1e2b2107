// Acceptance checks. `acceptance` runs everything; `acceptance <id>` runs one
// criterion (1a, 1b, 2, ..., 9). Prints one PASS/FAIL line per criterion and
// exits nonzero if any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "degdist/estimator.hpp"
#include "degdist/graph.hpp"
#include "degdist/metrics.hpp"
#include "degdist/operator.hpp"
#include "degdist/pipeline.hpp"
#include "degdist/samplers.hpp"
#include "degdist/smoothing.hpp"
#include "degdist/sure.hpp"
#include "degdist/variance_oracle.hpp"
#include "oracles.hpp"

using namespace degdist;
namespace fs = std::filesystem;

namespace {

struct Result {
  bool pass = true;
  std::ostringstream detail;
};

using Check = std::function<void(Result&)>;

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// 1a: column-sum identities for every design.
void column_sums(Result& r) {
  double worst = 0.0;
  for (int step = 1; step <= 19; ++step) {
    const double p = 0.05 * step;
    const double q = 1 - p;
    for (int bound = 0; bound <= 50; ++bound) {
      const Matrix ego = build_operator(Design::ego, p, bound).matrix();
      const Matrix snow = build_operator(Design::snowball1, p, bound).matrix();
      const Matrix ind = build_operator(Design::induced, p, bound).matrix();
      const Matrix inc = build_operator(Design::incident, p, bound).matrix();
      for (int j = 0; j <= bound; ++j) {
        worst = std::max(worst, std::abs(ego.col(j).sum() - p));
        worst = std::max(worst, std::abs(snow.col(j).sum() - (1 - std::pow(q, j + 1))));
        worst = std::max(worst, std::abs(ind.col(j).sum() - p));
        worst = std::max(worst, std::abs(inc.col(j).sum() - (j == 0 ? 0.0 : 1 - std::pow(q, j))));
      }
    }
    // Random walk: a degree-j vertex is seen unless none of its j edges is
    // among the n*_e sampled, 1 - C(n_e - j, n*_e) / C(n_e, n*_e).
    const std::int64_t ne = 2000;
    const auto ns = static_cast<std::int64_t>(std::llround(p * ne));
    const Matrix rw = build_random_walk_operator(ne, ns, 50).matrix();
    for (int j = 1; j <= 50; ++j) {
      double log_miss = 0.0;
      for (int i = 0; i < j; ++i) log_miss += std::log(double(ne - ns - i)) - std::log(double(ne - i));
      worst = std::max(worst, std::abs(rw.col(j).sum() - (1 - std::exp(log_miss))));
    }
  }
  r.pass = worst <= 1e-12;
  r.detail << "max column-sum error " << worst << " over 5 designs, 19 rates, M<=50";
}

// 1b: SVD condition number of the induced operator against p^-M.
void induced_condition(Result& r) {
  double worst = 0.0;
  double worst_ratio = 0.0;
  std::string where;
  for (int step = 1; step <= 19; ++step) {
    const double p = 0.05 * step;
    for (int bound = 1; bound <= 15; ++bound) {
      const Matrix op = build_operator(Design::induced, p, bound).matrix();
      const double cond = spectral(op).condition_number;
      const double target = std::pow(p, -bound);
      const double e = rel(cond, target);
      worst_ratio = std::max(worst_ratio, rel(triangular_eigenvalue_ratio(op), target));
      if (e > worst) {
        worst = e;
        std::ostringstream w;
        w << "p=" << p << " M=" << bound << " cond=" << cond << " p^-M=" << target;
        where = w.str();
      }
    }
  }
  r.pass = worst <= 1e-6;
  r.detail << "max relative gap of SVD condition number to p^-M " << worst << " (" << where
           << "); eigenvalue ratio matches p^-M to " << worst_ratio;
}

// 2: closed-form eigenvectors.
void eigenvectors(Result& r) {
  double worst = 0.0;
  for (double p : {0.2, 0.5, 0.8}) {
    for (int bound = 0; bound <= 15; ++bound) {
      const Matrix op = build_operator(Design::induced, p, bound).matrix();
      const InducedEigensystem es = induced_eigen_closed_form(p, bound);
      for (int k = 0; k <= bound; ++k) {
        // Eigenvalue of the k-th vector is p^(k+1) with 0-based k (p^k, 1-based).
        const Vector u = es.eigenvectors.col(k);
        worst = std::max(worst, (op * u - std::pow(p, k + 1) * u).norm());
      }
    }
  }
  r.pass = worst <= 1e-9;
  r.detail << "max ||P u_k - p^k u_k|| = " << worst;
}

// 3: variance formulas against enumeration and Monte Carlo.
void variances(Result& r) {
  double worst = 0.0;
  int graphs = 0;
  // Entries that vanish exactly (independent degree classes) are compared
  // absolutely: floor 1e-5 means |error| <= 1e-15 there.
  std::vector<Graph> small{complete_graph(5), star_graph(8), cycle_graph(12), path_graph(10)};
  for (std::uint64_t s = 0; s < 6; ++s) small.push_back(generate_gnp(10 + static_cast<int>(s % 3), 0.3, 700 + s));
  for (const Graph& g : small) {
    ++graphs;
    const int b = g.max_degree();
    const CommonNeighborTensor t = common_neighbor_tensor(g);
    const DegreeCounts counts = degree_counts(g);
    for (double p : {0.1, 0.4, 0.75}) {
      const Matrix snow = oracle::vertex_subset_moments(g, p, Design::snowball1, b).covariance();
      const Matrix ind = oracle::vertex_subset_moments(g, p, Design::induced, b).covariance();
      for (int k = 0; k <= b; ++k) {
        worst = std::max(worst, oracle::rel_diff(induced_var(t, counts, p, k), ind(k, k), 1e-5));
        for (int l = 0; l <= b; ++l)
          worst = std::max(worst, oracle::rel_diff(snowball_cov(t, counts, p, k, l), snow(k, l), 1e-5));
      }
    }
  }
  const bool exact_ok = worst <= 1e-10;

  // Monte Carlo on a 30-vertex graph.
  const Graph g = generate_er(30, 60, 5);
  const int b = g.max_degree();
  const double p = 0.4;
  const int trials = 100000;
  const Vector mu_snow = build_operator(Design::snowball1, p, b).matrix() * degree_counts(g).values();
  const Vector mu_ind = build_operator(Design::induced, p, b).matrix() * degree_counts(g).values();
  std::vector<std::pair<int, int>> pairs{{2, 2}, {3, 3}, {4, 4}, {2, 4}, {3, 5}};
  std::vector<std::vector<double>> snow_x(pairs.size()), ind_x(3);
  SampleParams params;
  params.rate = p;
  for (int t = 0; t < trials; ++t) {
    const Vector cs = sample(Design::snowball1, g, params, derive_seed(31, t)).counts(b).values();
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const auto [k, l] = pairs[i];
      snow_x[i].push_back((cs[k] - mu_snow[k]) * (cs[l] - mu_snow[l]));
    }
    const Vector ci = sample(Design::induced, g, params, derive_seed(32, t)).counts(b).values();
    for (int k = 0; k < 3; ++k) ind_x[k].push_back((ci[k + 1] - mu_ind[k + 1]) * (ci[k + 1] - mu_ind[k + 1]));
  }
  double worst_z = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto st = oracle::stats_of(snow_x[i]);
    worst_z = std::max(worst_z, std::abs(st.mean - snowball_cov(g, p, pairs[i].first, pairs[i].second)) / st.se);
  }
  for (int k = 0; k < 3; ++k) {
    const auto st = oracle::stats_of(ind_x[k]);
    worst_z = std::max(worst_z, std::abs(st.mean - induced_var(g, p, k + 1)) / st.se);
  }
  r.pass = exact_ok && worst_z <= 3.0;
  r.detail << "enumeration on " << graphs << " graphs (n<=12): max rel err " << worst
           << "; Monte Carlo 1e5 on n=30: max |z| " << worst_z;
}

// 4: QP against brute-force enumeration and the equality-only closed form.
void qp(Result& r) {
  Rng rng(404);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double worst = 0.0;
  double worst_closed = 0.0;
  int closed_cases = 0;
  int unconverged = 0;
  for (int inst = 0; inst < 50; ++inst) {
    const int dim = 2 + inst % 5;
    const double p = 0.2 + 0.6 * unif(rng);
    const Matrix op = build_operator(Design::induced, p, dim - 1).matrix();
    Vector truth(dim);
    for (int i = 0; i < dim; ++i) truth[i] = unif(rng) < 0.3 ? 0.0 : 40.0 * unif(rng);
    const double total = truth.sum() + 1.0;
    Vector obs = op * truth;
    for (int i = 0; i < dim; ++i) obs[i] = std::max(0.0, obs[i] + 3.0 * (unif(rng) - 0.5));
    Vector w(dim);
    for (int i = 0; i < dim; ++i) w[i] = 1.0 / (0.5 + 5.0 * unif(rng));
    const double lambda = std::pow(10.0, -3.0 + 5.0 * unif(rng));
    const PwlsProblem prob(op, w, total);
    const QPSolution s = prob.solve(obs, lambda);
    if (!s.converged) ++unconverged;
    const Vector ref = oracle::brute_force_qp(op, w, prob.omega(), lambda, obs, total);
    worst = std::max(worst, (s.n_hat - ref).cwiseAbs().maxCoeff() / std::max(1.0, ref.cwiseAbs().maxCoeff()));
    const Vector eq = prob.solve_equality_only(obs, lambda);
    if (eq.minCoeff() >= 0.0) {
      ++closed_cases;
      worst_closed = std::max(worst_closed, (s.n_hat - eq).cwiseAbs().maxCoeff() / std::max(1.0, eq.cwiseAbs().maxCoeff()));
    }
  }
  r.pass = worst <= 1e-6 && worst_closed <= 1e-6 && unconverged == 0;
  r.detail << "50 instances: max deviation from enumeration " << worst << "; " << closed_cases
           << " nonnegative closed-form cases, max deviation " << worst_closed << "; unconverged " << unconverged;
}

// 5: Monte Carlo divergence of a linear estimator.
void divergence(Result& r) {
  const int dim = 20;
  std::vector<double> ratios;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(derive_seed(500, seed));
    const double p = 0.3 + 0.4 * std::uniform_real_distribution<double>(0, 1)(rng);
    const Matrix op = build_operator(Design::induced, p, dim - 1).matrix();
    Vector truth(dim);
    for (int k = 0; k < dim; ++k) truth[k] = 1000.0 * std::exp(-8.0 + k * std::log(8.0) - std::lgamma(k + 1.0)) + 1.0;
    const Vector mean = op * truth;
    Vector obs(dim);
    for (int k = 0; k < dim; ++k) obs[k] = std::poisson_distribution<int>(mean[k])(rng);
    const Vector cov = covariance_from_smoothed(mean, 20.0).diagonal;
    const PwlsProblem prob(op, cov.cwiseInverse(), truth.sum());
    const AffineMap a = prob.estimator_map(0.1);
    const double exact = (op * a.matrix).trace();
    SureConfig cfg;
    cfg.epsilon = 0.1;
    cfg.replicates = 100;
    cfg.seed = derive_seed(501, seed);
    const EstimateFn f = [&](const Vector& y) -> Vector { return a.matrix * y + a.offset; };
    ratios.push_back(mc_divergence(f, op, obs, cfg).value / exact);
  }
  double mean = 0.0;
  for (double x : ratios) mean += x / ratios.size();
  r.pass = std::abs(mean - 1.0) <= 0.05;
  r.detail << "mean MC/exact divergence ratio over 10 seeds " << mean;
}

// 6: marginal Poisson fits under induced sampling.
void poisson(Result& r) {
  const Graph g = generate_er(1000, 50000, 6);
  const double p = 0.05;
  const Vector mean = build_operator(Design::induced, p, g.max_degree()).matrix() * degree_counts(g).values();
  double mk = 0.0;
  for (Eigen::Index k = 0; k < mean.size(); ++k) mk += k * mean[k];
  mk /= mean.sum();
  const int centre = static_cast<int>(std::lround(mk));
  std::vector<int> degrees;
  for (int k = std::max(0, centre - 2); k <= centre + 2; ++k) degrees.push_back(k);
  // The exact variance shows how far each marginal is from Poisson (var = mean).
  const CommonNeighborTensor tensor = common_neighbor_tensor(g);
  const DegreeCounts counts = degree_counts(g);
  double worst = 0.0;
  for (const MarginalFit& f : induced_marginal_fits(g, p, degrees, 2000, 66)) {
    worst = std::max(worst, f.tv_distance);
    r.detail << "k=" << f.k << " TV " << f.tv_distance << " var/mean " << induced_var(tensor, counts, p, f.k) / f.expected
             << "; ";
  }
  r.pass = worst <= 0.1;
  r.detail << "mean observed degree " << mk << ", max TV " << worst;
}

RunConfig simulation_config() {
  RunConfig c;
  c.model = "er";
  c.vertex_count = 1000;
  c.mean_degree = 10;
  c.trials = 100;
  c.seed = 2024;
  return c;
}

// 7: K-S behaviour in simulation.
void simulation(Result& r) {
  RunConfig c = simulation_config();
  const Graph g = load_or_generate_graph(c);

  c.design = Design::induced;
  c.rate = 0.3;
  const SimulationSummary ind = simulate(g, c);
  int beats = 0;
  for (const TrialRecord& t : ind.records)
    if (t.ok && t.ks_estimate < t.ks_sample) ++beats;
  const bool a = ind.failures == 0 && ind.ks_estimate.median <= 0.15 && ind.ks_sample.median >= 0.5 && beats >= 95;
  r.detail << "(a) induced p=0.3: estimate median " << ind.ks_estimate.median << ", sample median "
           << ind.ks_sample.median << ", wins " << beats << "/100";

  c.design = Design::ego;
  c.rate = 0.1;
  const SimulationSummary ego = simulate(g, c);
  const bool b = ego.ks_estimate.median <= 0.1;
  r.detail << "; (b) ego p=0.1: median " << ego.ks_estimate.median;

  bool mono = true;
  r.detail << "; (c)";
  for (Design d : {Design::ego, Design::snowball1, Design::induced, Design::incident, Design::random_walk}) {
    c.design = d;
    double last = 2.0;
    r.detail << ' ' << to_string(d) << '[';
    for (double p : {0.1, 0.2, 0.3}) {
      c.rate = p;
      const SimulationSummary s = simulate(g, c);
      r.detail << (p > 0.1 ? " " : "") << s.ks_estimate.median;
      if (s.ks_estimate.median > last) mono = false;
      last = s.ks_estimate.median;
    }
    r.detail << ']';
  }
  r.pass = a && b && mono;
  r.detail << " -> a=" << a << " b=" << b << " c=" << mono;
}

// 8: epidemic bound chain and end-to-end bound accuracy.
void bounds(Result& r) {
  bool chain = true;
  for (int s = 0; s < 100; ++s) {
    const Graph g = generate_gnp(30 + s % 40, 0.05 + 0.003 * s, derive_seed(808, s));
    if (g.edge_count() == 0) continue;
    const BoundsReport b = epidemic_bounds(g);
    chain = chain && b.inv_u <= b.inv_sqrt_m2 + 1e-12 && b.inv_sqrt_m2 <= b.inv_m1 + 1e-12;
    chain = chain && b.inv_u <= *b.inv_lambda1 + 1e-9 && *b.inv_lambda1 <= b.inv_sqrt_m2 + 1e-9;
  }
  bool complete = true;
  for (int n : {3, 10, 50}) {
    const BoundsReport b = epidemic_bounds(complete_graph(n));
    const double x = 1.0 / (n - 1);
    complete = complete && rel(b.inv_m1, x) <= 1e-12 && rel(b.inv_sqrt_m2, x) <= 1e-12 && rel(b.inv_u, x) <= 1e-12 &&
               rel(*b.inv_lambda1, x) <= 1e-9;
  }

  // The estimate of M1 inherits the sampling noise of the observed edge count
  // (about 6% sd here), so single instances scatter around the 10% line; the
  // median over instances is what is compared.
  std::vector<double> est_errors;
  double least_raw = 1e300;
  int within = 0;
  const int instances = 20;
  for (int inst = 0; inst < instances; ++inst) {
    RunConfig c = simulation_config();
    c.seed = derive_seed(8080, inst);
    c.design = Design::induced;
    c.rate = 0.3;
    const Graph g = load_or_generate_graph(c);
    const BoundsReport truth = epidemic_bounds(g);
    const TrialOutcome out = run_trial(g, c, resolve_sample_params(c, g), 0, trial_seed(c.seed, 0), true);
    if (!out.record.ok) {
      est_errors.push_back(1e300);
      continue;
    }
    const BoundsReport est = epidemic_bounds(out.estimation.solution.n_hat);
    const BoundsReport raw = epidemic_bounds(out.sample.observed_counts.values());
    const double e = std::max({rel(est.inv_m1, truth.inv_m1), rel(est.inv_sqrt_m2, truth.inv_sqrt_m2),
                               rel(est.inv_u, truth.inv_u)});
    est_errors.push_back(e);
    if (e <= 0.1) ++within;
    least_raw = std::min(least_raw, raw.inv_m1 / truth.inv_m1);
  }
  std::sort(est_errors.begin(), est_errors.end());
  const double median = 0.5 * (est_errors[instances / 2 - 1] + est_errors[instances / 2]);
  r.pass = chain && complete && median <= 0.1 && least_raw >= 2.0;
  r.detail << "chain on 100 graphs " << chain << "; K_n coincide " << complete << "; " << instances
           << " sampled ER graphs: median worst estimator error " << median << " (max " << est_errors.back() << ", "
           << within << " within 10%), smallest raw 1/M1 ratio " << least_raw;
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    files[fs::relative(e.path(), dir).string()] = ss.str();
  }
  return files;
}

// 9: every command twice into the same directory gives identical bytes.
void determinism(Result& r) {
  const fs::path root = fs::temp_directory_path() / "degdist_acceptance_9";
  fs::remove_all(root);
  fs::create_directories(root);
  RunConfig base;
  base.vertex_count = 400;
  base.mean_degree = 8;
  base.seed = 99;
  base.trials = 8;
  base.threads = 4;
  base.poisson_trials = 1000;
  base.estimator.replicates = 40;

  std::vector<std::pair<std::string, std::function<void(RunConfig)>>> steps;
  steps.emplace_back("generate", cmd_generate);
  steps.emplace_back("sample", [&](RunConfig c) {
    c.graph_path = (root / "generate" / "graph.edges").string();
    cmd_sample(c);
  });
  steps.emplace_back("estimate", [&](RunConfig c) {
    c.graph_path = (root / "generate" / "graph.edges").string();
    cmd_estimate(c);
  });
  steps.emplace_back("estimate_counts", [&](RunConfig c) {
    c.counts_path = (root / "sample" / "observed_counts.csv").string();
    cmd_estimate(c);
  });
  steps.emplace_back("simulate", [&](RunConfig c) {
    c.sweep_designs = {"ego", "snowball1", "induced", "incident", "random_walk"};
    cmd_simulate(c);
  });
  steps.emplace_back("bounds", [&](RunConfig c) {
    c.estimate_path = (root / "estimate" / "estimate.csv").string();
    cmd_bounds(c);
  });
  steps.emplace_back("diagnose", [&](RunConfig c) {
    c.graph_path = (root / "generate" / "graph.edges").string();
    cmd_diagnose(c);
  });

  int files = 0;
  std::vector<std::string> differing;
  for (auto& [name, run] : steps) {
    RunConfig c = base;
    c.output_dir = (root / name).string();
    run(c);
    const auto first = snapshot(root / name);
    run(c);
    const auto second = snapshot(root / name);
    files += static_cast<int>(first.size());
    if (first != second) differing.push_back(name);
  }
  r.pass = differing.empty() && files > 0;
  r.detail << steps.size() << " command runs, " << files << " files compared";
  for (const std::string& d : differing) r.detail << "; differs: " << d;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, Check>> criteria{
      {"1a", column_sums}, {"1b", induced_condition}, {"2", eigenvectors}, {"3", variances},
      {"4", qp},           {"5", divergence},         {"6", poisson},      {"7", simulation},
      {"8", bounds},       {"9", determinism}};
  std::vector<std::string> wanted(argv + 1, argv + argc);
  int failures = 0;
  int ran = 0;
  for (const auto& [id, check] : criteria) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), id) == wanted.end()) continue;
    ++ran;
    Result r;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      check(r);
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail << " error: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << (r.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << r.detail.str() << " [" << secs << " s]"
              << std::endl;
    if (!r.pass) ++failures;
  }
  if (ran == 0) {
    std::cerr << "unknown criterion\n";
    return 2;
  }
  return failures == 0 ? 0 : 1;
}
