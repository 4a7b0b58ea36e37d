// structgp command-line tool: simulate data, fit graphs, score them, run
// simulation studies, check the conditional-independence oracles, and emit
// figure-ready CSVs.
//
// Exit codes: 0 success, 1 usage error, 2 runtime failure.

#include "structgp/acyclicity.hpp"
#include "structgp/ci_oracle.hpp"
#include "structgp/experiment.hpp"
#include "structgp/io.hpp"
#include "structgp/learner.hpp"
#include "structgp/metrics.hpp"
#include "structgp/simulator.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <Eigen/Eigenvalues>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

using namespace structgp;
using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("STRUCTGP_SEED")) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw UsageError(std::string("STRUCTGP_SEED is not an unsigned integer: '") + env + "'");
  }
  return 0;
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + out_path + "'");
  out << text;
}

// Accepts a Dag, a Theta, a simulate truth file, or a fit result.
struct GraphInput {
  Dag graph;
  std::optional<Matrix> S;
};

GraphInput read_graph_input(const std::string& path) {
  const json j = read_json_file(path);
  GraphInput g;
  if (j.contains("theta")) {
    const Theta th = theta_from_json(j.at("theta"));
    g.S = th.S;
    g.graph = j.contains("graph") ? dag_from_json(j.at("graph")) : Dag::from_support(th.S);
  } else if (j.contains("S")) {
    const Theta th = theta_from_json(j);
    g.S = th.S;
    g.graph = Dag::from_support(th.S);
  } else if (j.contains("edges")) {
    g.graph = dag_from_json(j);
  } else {
    throw std::runtime_error("'" + path + "' holds neither a graph nor parameters");
  }
  return g;
}

int cmd_simulate(int k, double md, int patients, int obs, const std::optional<std::uint64_t>& seed_flag,
                 const std::string& out_dir) {
  const auto seed = resolve_seed(seed_flag);
  Rng rng = replicate_rng(seed, 0, 0);
  const Dag g = sample_er_dag(k, md, rng);
  const Theta theta = sample_theta(g, rng);
  const Dataset data = sample_dataset(theta, patients, obs, rng);
  std::filesystem::create_directories(out_dir);
  const auto dir = std::filesystem::path(out_dir);
  write_dataset_csv_file((dir / "data.csv").string(), data);
  write_json_file((dir / "truth.json").string(),
                  json{{"seed", seed}, {"md", md}, {"graph", dag_to_json(g)}, {"theta", theta_to_json(theta)}});
  std::cerr << "wrote " << data.size() << " observations and " << g.edge_count() << "-edge truth to " << out_dir
            << '\n';
  return 0;
}

int cmd_fit(const std::string& data_path, double sigma, int n_lambda, double eps, double ratio,
            const std::string& out) {
  const Dataset data = read_dataset_csv_file(data_path);
  LearnerConfig cfg;
  cfg.n_lambda = n_lambda;
  cfg.lambda_min_ratio = ratio;
  cfg.auglag.eps = eps;
  const FitResult result = fit(data, sigma, cfg);
  emit(out, fit_result_to_json(result).dump(2) + "\n");
  std::cerr << "selected lambda " << result.selected.lambda << " with " << result.graph.edge_count()
            << " edges (" << result.diagnostics.failed_points << " failed grid points, "
            << result.diagnostics.wall_seconds << " s)\n";
  return 0;
}

int cmd_score(const std::string& pred_path, const std::string& truth_path, const std::string& out) {
  const GraphInput pred = read_graph_input(pred_path);
  const GraphInput truth = read_graph_input(truth_path);
  if (pred.graph.k() != truth.graph.k()) throw UsageError("pred and truth have different node counts");
  GraphScore s = precision_recall(pred.graph, truth.graph);
  json j = {{"shd", s.shd},
            {"extra", s.extra},
            {"missing", s.missing},
            {"reversed", s.reversed},
            {"true_positive", s.true_positive},
            {"precision", s.precision},
            {"recall", s.recall},
            {"precision_undefined", s.precision_undefined},
            {"recall_undefined", s.recall_undefined}};
  j["rmse_s"] = pred.S && truth.S ? json(rmse_s(*pred.S, *truth.S)) : json(nullptr);
  emit(out, j.dump(2) + "\n");
  return 0;
}

int cmd_experiment(const std::string& config_path, const std::string& preset, std::optional<int> reps,
                   int jobs, const std::optional<std::uint64_t>& seed_flag, const std::string& out) {
  if (config_path.empty() == preset.empty()) throw UsageError("give exactly one of --config or --preset");
  ExperimentConfig cfg =
      config_path.empty() ? ExperimentConfig::preset(preset) : read_experiment_config_file(config_path);
  if (reps) cfg.reps = *reps;
  if (seed_flag || std::getenv("STRUCTGP_SEED")) cfg.seed = resolve_seed(seed_flag);
  cfg.validate();
  const auto points = sweep_points(cfg);
  const std::size_t total = points.size() * static_cast<std::size_t>(cfg.reps);
  std::size_t done = 0;
  const auto report = run_experiment(cfg, jobs, [&](const RepRow& row) {
    ++done;
    std::cerr << "[" << done << "/" << total << "] k=" << row.point.k << " md=" << row.point.md
              << " n_lambda=" << row.point.n_lambda << " r=" << row.point.r << " rep=" << row.rep << ": "
              << (row.ok ? "shd " + std::to_string(row.fit.shd) : "failed: " + row.error) << '\n';
  });
  std::ostringstream csv;
  write_report_csv(csv, report);
  emit(out, csv.str());
  if (report.failed() > 0) std::cerr << report.failed() << " of " << total << " replicates failed\n";
  return 0;
}

int cmd_verify(const std::optional<std::uint64_t>& seed_flag, int k, int instances) {
  const auto seed = resolve_seed(seed_flag);
  const auto omegas = default_frequency_grid();
  int ci_agree = 0, ci_total = 0, chol_agree = 0, psd_ok = 0, psd_total = 0, fact_ok = 0;
  for (int i = 0; i < instances; ++i) {
    Rng rng = replicate_rng(seed, static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(i));
    const Dag g = sample_er_dag(k, std::min(2.0, static_cast<double>(k - 1)), rng);
    const Theta theta = sample_theta(g, rng);
    const auto order = topological_order(g);
    for (std::size_t a = 0; a < order.size(); ++a) {
      for (std::size_t b = a + 1; b < order.size(); ++b) {
        const int u = order[a], v = order[b];
        const bool zero = theta.S(v, u) == 0.0;
        ++ci_total;
        if (ordered_ci_check(theta, u, v, omegas, order) == zero) ++ci_agree;
        // Same question on the spectral matrix permuted into generating order.
        const Matrix f = spectral_density(theta, 0.7).f;
        Matrix P(k, k);
        for (int x = 0; x < k; ++x) {
          for (int y = 0; y < k; ++y) P(x, y) = f(order[static_cast<std::size_t>(x)], order[static_cast<std::size_t>(y)]);
        }
        if (cholesky_sparsity_oracle(P, static_cast<int>(a), static_cast<int>(b)) == zero) ++chol_agree;
      }
    }
    for (double w : omegas) {
      ++psd_total;
      const Eigen::SelfAdjointEigenSolver<Matrix> es(spectral_density(theta, w).f);
      if (es.eigenvalues().minCoeff() >= -1e-10) ++psd_ok;
    }
    std::normal_distribution<double> normal;
    const std::vector<double> times{0.0};
    const Matrix K = snapshot_covariance(theta, times);
    const Vector y = Eigen::LLT<Matrix>(K).matrixL() * Vector::NullaryExpr(k, [&]() { return normal(rng); });
    if (markov_factorization_check(theta, times, y).holds) ++fact_ok;
  }
  const bool pass = ci_agree == ci_total && chol_agree == ci_total && psd_ok == psd_total;
  std::cout << "ordered CI vs zeros of S:   " << ci_agree << "/" << ci_total << '\n'
            << "Cholesky-factor oracle:     " << chol_agree << "/" << ci_total << '\n'
            << "spectral density PSD:       " << psd_ok << "/" << psd_total << '\n'
            << "parent factorization (info): " << fact_ok << "/" << instances << '\n'
            << (pass ? "PASS" : "FAIL") << '\n';
  return pass ? 0 : 2;
}

int cmd_plot_data(const std::string& report_path, const std::string& figure, const std::string& out) {
  const Figure fig = parse_figure(figure);
  std::ifstream in(report_path);
  if (!in) throw std::runtime_error("cannot open '" + report_path + "'");
  const auto report = read_report_csv(in);
  std::ostringstream csv;
  write_plot_data(csv, report, fig);
  emit(out, csv.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structure learning for irregularly sampled multi-task time series with a structured GP."};
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed;
  const std::string seed_help = "random seed (falls back to $STRUCTGP_SEED, then 0)";

  int sim_k = 4, sim_obs = 10, sim_patients = 50;
  double sim_md = 2.0;
  std::string sim_out;
  auto* simulate = app.add_subcommand("simulate", "sample a random DAG, parameters, and a dataset");
  simulate->add_option("--k", sim_k, "number of tasks (TOY study: 4)")->capture_default_str()->check(CLI::PositiveNumber);
  simulate->add_option("--md", sim_md, "expected mean degree of the graph (TOY study: 2)")->capture_default_str();
  simulate->add_option("--patients", sim_patients, "number of patients r (TOY study: 50)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  simulate->add_option("--obs-per-task", sim_obs, "observations per task and patient (studies use 10)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  simulate->add_option("--seed", seed, seed_help);
  simulate->add_option("--out-dir", sim_out, "directory for data.csv and truth.json")->required();

  std::string fit_data, fit_out;
  double fit_sigma = 0.01, fit_eps = 0.1, fit_ratio = 1e-3;
  int fit_nl = 50;
  auto* fitc = app.add_subcommand("fit", "learn a graph with the warm-started lambda path and AIC selection");
  fitc->add_option("--data", fit_data, "dataset CSV (patient,task,time,value)")->required()->check(CLI::ExistingFile);
  fitc->add_option("--sigma", fit_sigma, "fixed noise standard deviation (simulation value)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  fitc->add_option("--n-lambda", fit_nl, "lambda grid size (simulation studies: 50)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  fitc->add_option("--eps", fit_eps, "acyclicity tolerance of the augmented Lagrangian")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  fitc->add_option("--lambda-min-ratio", fit_ratio, "smallest lambda as a fraction of lambda_max")
      ->capture_default_str()
      ->check(CLI::Range(1e-12, 1.0));
  fitc->add_option("--out", fit_out, "output JSON (default: stdout)");

  std::string sc_pred, sc_truth, sc_out;
  auto* scorec = app.add_subcommand("score", "compare a predicted graph with the truth");
  scorec->add_option("--pred", sc_pred, "fit result, theta, or graph JSON")->required()->check(CLI::ExistingFile);
  scorec->add_option("--truth", sc_truth, "truth, theta, or graph JSON")->required()->check(CLI::ExistingFile);
  scorec->add_option("--out", sc_out, "output JSON (default: stdout)");

  std::string ex_config, ex_preset, ex_out;
  std::optional<int> ex_reps;
  int ex_jobs = 1;
  auto* exc = app.add_subcommand("experiment", "run a replicated simulation study");
  exc->add_option("--config", ex_config, "key = value config file")->check(CLI::ExistingFile);
  exc->add_option("--preset", ex_preset, "TOY, EXP1, EXP2, or EXP3 (grids in the README)");
  exc->add_option("--reps", ex_reps, "replicates per sweep point (overrides the config)")->check(CLI::PositiveNumber);
  exc->add_option("--jobs", ex_jobs, "worker threads; never changes the report")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  exc->add_option("--seed", seed, "base seed (overrides the config; falls back to $STRUCTGP_SEED)");
  exc->add_option("--out", ex_out, "report CSV (default: stdout)");

  int ver_k = 5, ver_n = 20;
  auto* verify = app.add_subcommand("verify", "check the conditional-independence oracles on random models");
  verify->add_option("--seed", seed, seed_help);
  verify->add_option("--k", ver_k, "number of tasks")->capture_default_str()->check(CLI::Range(2, 12));
  verify->add_option("--instances", ver_n, "random models to test")->capture_default_str()->check(CLI::PositiveNumber);

  std::string pd_report, pd_figure, pd_out;
  auto* pd = app.add_subcommand("plot-data", "aggregate a report into a figure-ready CSV");
  pd->add_option("--report", pd_report, "report CSV from `experiment`")->required()->check(CLI::ExistingFile);
  pd->add_option("--figure", pd_figure, "exp1 (x = r), exp2 (x = n_lambda), or exp3 (x = k, md)")->required();
  pd->add_option("--out", pd_out, "output CSV (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*simulate) return cmd_simulate(sim_k, sim_md, sim_patients, sim_obs, seed, sim_out);
    if (*fitc) return cmd_fit(fit_data, fit_sigma, fit_nl, fit_eps, fit_ratio, fit_out);
    if (*scorec) return cmd_score(sc_pred, sc_truth, sc_out);
    if (*exc) return cmd_experiment(ex_config, ex_preset, ex_reps, ex_jobs, seed, ex_out);
    if (*verify) return cmd_verify(seed, ver_k, ver_n);
    if (*pd) return cmd_plot_data(pd_report, pd_figure, pd_out);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
