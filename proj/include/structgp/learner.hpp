#pragma once

/*
 * learner.hpp
 * -----------
 * End-to-end fit: a log-spaced lambda grid from lambda_max down to
 * lambda_min_ratio * lambda_max, a warm-started regularization path of
 * augmented Lagrangian solves, hard thresholding of every point to an acyclic
 * support, and AIC selection (ties go to the larger lambda).
 *
 * The next point is always initialized from the un-thresholded solution of
 * the previous one; thresholding only feeds AIC and the reported graph.
 */

#include "structgp/likelihood.hpp"
#include "structgp/model.hpp"
#include "structgp/optimizer.hpp"

#include "json.hpp"

#include <optional>
#include <string>
#include <vector>

namespace structgp {

struct LearnerConfig {
  AugLagConfig auglag;
  int n_lambda = 50;
  double lambda_min_ratio = 1e-3;
  /// Overrides the gradient-at-zero critical value when set.
  std::optional<double> lambda_max;
};

struct PathPoint {
  double lambda = 0.0;
  bool ok = false;
  std::string error;
  Theta raw;        // solver output
  Theta theta;      // hard-thresholded to an acyclic support
  double threshold = 0.0;
  double nmll = 0.0;  // at the thresholded theta
  double aic = 0.0;
  double h = 0.0;     // h(S) of the raw solution
  int nnz = 0;        // nonzero weights after thresholding
  int outer_iterations = 0;
  int pgm_iterations = 0;
};

struct FitDiagnostics {
  int pgm_iterations = 0;
  int evaluations = 0;
  int failed_points = 0;
  double wall_seconds = 0.0;
};

struct FitResult {
  PathPoint selected;
  std::size_t selected_index = 0;
  Dag graph;
  double threshold_used = 0.0;
  std::vector<PathPoint> path;
  FitDiagnostics diagnostics;
};

/// max |d nmll / dS| at S = 0, ell = 0.
double critical_lambda(const Likelihood& lik, double sigma);

/// Geometric sequence of n_lambda values from lambda_max to
/// lambda_min_ratio * lambda_max. A single-value grid is {lambda_max}.
std::vector<double> lambda_grid(const Likelihood& lik, double sigma, int n_lambda, double lambda_min_ratio = 1e-3,
                                std::optional<double> lambda_max = std::nullopt);
std::vector<double> lambda_grid(const Dataset& data, int n_lambda, double sigma = 0.01);

/// Solves and scores every grid point. Point j starts from point j-1's raw
/// solution (theta0 for the first; S = 0, ell = 0 when not given). Failed
/// points are recorded and skipped; throws if every point fails.
std::vector<PathPoint> fit_path(const Likelihood& lik, const std::vector<double>& grid, const LearnerConfig& cfg,
                                double sigma, const std::optional<Theta>& theta0 = std::nullopt);

/// Solves and scores a single lambda from theta0 (no path).
PathPoint fit_point(const Likelihood& lik, double lambda, const Theta& theta0, const AugLagConfig& cfg);

FitResult select(std::vector<PathPoint> path);

FitResult fit(const Dataset& data, double sigma, const LearnerConfig& cfg);

/// Deterministic encoding (no wall time) suitable for byte-identical reruns.
nlohmann::json fit_result_to_json(const FitResult& result);

}  // namespace structgp
