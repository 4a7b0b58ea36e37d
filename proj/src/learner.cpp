#include "structgp/learner.hpp"

#include "structgp/acyclicity.hpp"
#include "structgp/io.hpp"

#include <chrono>
#include <cmath>

namespace structgp {

double critical_lambda(const Likelihood& lik, double sigma) {
  const Matrix g = lik.weight_gradient(Theta::zeros(lik.tasks(), sigma));
  return g.cwiseAbs().maxCoeff();
}

std::vector<double> lambda_grid(const Likelihood& lik, double sigma, int n_lambda, double lambda_min_ratio,
                                std::optional<double> lambda_max) {
  if (n_lambda < 1) throw std::invalid_argument("lambda_grid: n_lambda must be >= 1");
  if (!(lambda_min_ratio > 0.0 && lambda_min_ratio <= 1.0)) {
    throw std::invalid_argument("lambda_grid: lambda_min_ratio must be in (0, 1]");
  }
  const double top = lambda_max ? *lambda_max : critical_lambda(lik, sigma);
  if (!(top > 0.0) || !std::isfinite(top)) throw std::invalid_argument("lambda_grid: lambda_max must be positive");
  std::vector<double> grid(static_cast<std::size_t>(n_lambda));
  grid[0] = top;
  if (n_lambda == 1) return grid;
  const double log_ratio = std::log(lambda_min_ratio);
  for (int j = 1; j < n_lambda; ++j) {
    grid[static_cast<std::size_t>(j)] = top * std::exp(log_ratio * j / (n_lambda - 1));
  }
  return grid;
}

std::vector<double> lambda_grid(const Dataset& data, int n_lambda, double sigma) {
  if (data.empty()) throw std::invalid_argument("lambda_grid: dataset is empty");
  return lambda_grid(Likelihood(data), sigma, n_lambda);
}

namespace {

void score_point(const Likelihood& lik, PathPoint& pt) {
  const auto thr = min_dag_threshold(pt.raw.S);
  pt.threshold = thr.threshold;
  pt.theta = Theta(thr.S, pt.raw.ell, pt.raw.sigma);
  pt.h = acyclicity(pt.raw.S).h;
  pt.nnz = weight_count(pt.theta.S);
  pt.nmll = lik.value(pt.theta);
  pt.aic = 2.0 * pt.nnz + 2.0 * pt.nmll;
}

}  // namespace

PathPoint fit_point(const Likelihood& lik, double lambda, const Theta& theta0, const AugLagConfig& cfg) {
  PathPoint pt;
  pt.lambda = lambda;
  const auto sol = auglag_solve(lik, lambda, theta0, cfg);
  pt.raw = sol.theta;
  pt.outer_iterations = sol.outer_iterations;
  pt.pgm_iterations = sol.pgm_iterations;
  score_point(lik, pt);
  pt.ok = true;
  return pt;
}

std::vector<PathPoint> fit_path(const Likelihood& lik, const std::vector<double>& grid, const LearnerConfig& cfg,
                                double sigma, const std::optional<Theta>& theta0) {
  if (grid.empty()) throw std::invalid_argument("fit_path: empty lambda grid");
  for (std::size_t j = 1; j < grid.size(); ++j) {
    if (grid[j] > grid[j - 1]) throw std::invalid_argument("fit_path: grid must be sorted in decreasing order");
  }
  Theta warm = theta0 ? *theta0 : Theta::zeros(lik.tasks(), sigma);
  std::vector<PathPoint> path;
  path.reserve(grid.size());
  int failures = 0;
  for (double lambda : grid) {
    try {
      auto pt = fit_point(lik, lambda, warm, cfg.auglag);
      warm = pt.raw;
      path.push_back(std::move(pt));
    } catch (const NumericalError& e) {
      PathPoint pt;
      pt.lambda = lambda;
      pt.error = e.what();
      path.push_back(std::move(pt));
      ++failures;
    }
  }
  if (failures == static_cast<int>(grid.size())) {
    throw NumericalError("fit_path: every grid point failed; last error: " + path.back().error);
  }
  return path;
}

FitResult select(std::vector<PathPoint> path) {
  if (path.empty()) throw std::invalid_argument("select: empty path");
  std::optional<std::size_t> best;
  for (std::size_t j = 0; j < path.size(); ++j) {
    if (!path[j].ok) continue;
    if (!best) {
      best = j;
      continue;
    }
    const auto& cur = path[*best];
    if (path[j].aic < cur.aic || (path[j].aic == cur.aic && path[j].lambda > cur.lambda)) best = j;
  }
  if (!best) throw std::invalid_argument("select: no successful path point");
  FitResult out;
  out.selected_index = *best;
  out.selected = path[*best];
  out.graph = Dag::from_support(out.selected.theta.S);
  out.threshold_used = out.selected.threshold;
  for (const auto& pt : path) {
    out.diagnostics.pgm_iterations += pt.pgm_iterations;
    if (!pt.ok) ++out.diagnostics.failed_points;
  }
  out.path = std::move(path);
  return out;
}

FitResult fit(const Dataset& data, double sigma, const LearnerConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const Likelihood lik(data);
  const auto grid = lambda_grid(lik, sigma, cfg.n_lambda, cfg.lambda_min_ratio, cfg.lambda_max);
  auto result = select(fit_path(lik, grid, cfg, sigma));
  result.diagnostics.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

nlohmann::json fit_result_to_json(const FitResult& result) {
  nlohmann::json path = nlohmann::json::array();
  for (const auto& pt : result.path) {
    nlohmann::json row = {{"lambda", pt.lambda}, {"ok", pt.ok}};
    if (pt.ok) {
      row["aic"] = pt.aic;
      row["nmll"] = pt.nmll;
      row["h"] = pt.h;
      row["nnz"] = pt.nnz;
      row["threshold"] = pt.threshold;
      row["outer_iterations"] = pt.outer_iterations;
      row["pgm_iterations"] = pt.pgm_iterations;
    } else {
      row["error"] = pt.error;
    }
    path.push_back(std::move(row));
  }
  const auto& sel = result.selected;
  return {
      {"selected_lambda", sel.lambda},
      {"selected_index", result.selected_index},
      {"threshold", result.threshold_used},
      {"aic", sel.aic},
      {"nmll", sel.nmll},
      {"theta_raw", theta_to_json(sel.raw)},
      {"theta", theta_to_json(sel.theta)},
      {"graph", dag_to_json(result.graph)},
      {"path", std::move(path)},
      {"diagnostics",
       {{"pgm_iterations", result.diagnostics.pgm_iterations}, {"failed_points", result.diagnostics.failed_points}}},
  };
}

}  // namespace structgp
