#pragma once

/*
 * optimizer.hpp
 * -------------
 * Two-level solver for
 *
 *     min  nmll(theta) + lambda ||S||_1    s.t.  h(S) = tr(exp(S o S)) - k = 0.
 *
 * The outer loop is an augmented Lagrangian with multiplier alpha and penalty
 * rho; each primal subproblem minimizes
 *
 *     nmll + alpha h + (rho / 2) h^2 + lambda ||S||_1
 *
 * with a proximal gradient method whose step is found by backtracking on the
 * quadratic majorization inequality, optionally with monotone FISTA
 * extrapolation. Only S is soft-thresholded; the log-lengthscales take plain
 * gradient steps in the same iteration.
 */

#include "structgp/likelihood.hpp"
#include "structgp/model.hpp"

#include <functional>
#include <vector>

namespace structgp {

struct PgmConfig {
  int max_iters = 500;
  /// Stop when the gradient-mapping sup-norm drops below grad_tol * tol_scale.
  double grad_tol = 1e-5;
  double tol_scale = 1.0;
  /// Also stop when one accepted step lowers the composite objective by less
  /// than rel_tol * max(1, |F|). Zero disables the test.
  double rel_tol = 0.0;
  double shrink = 0.5;
  double initial_step = 1.0;
  int max_shrinks = 50;
  /// Step multiplier tried after each accepted iteration (capped at initial_step).
  double growth = 1.25;
  /// Monotone FISTA extrapolation; false gives plain proximal gradient.
  bool accelerated = true;

  void validate() const;
};

/// Smooth part: returns f(x) and, when grad is non-null, writes grad f(x).
/// May throw NumericalError, which the solver treats like a non-finite value.
using SmoothFunction = std::function<double(const Vector& x, Vector* grad)>;

struct PgmResult {
  Vector x;
  double objective = 0.0;  // composite value at x
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  double step = 0.0;
  std::vector<double> history;  // composite value after each accepted step
};

double soft_threshold(double s, double threshold);

/// Entrywise soft-threshold of the off-diagonal of S; the diagonal is zeroed.
Matrix prox_l1(const Matrix& S, double threshold);

/// Minimizes f(x) + lambda * sum_i w_i |x_i| with w = l1_weights (0 or 1 in
/// practice). Throws NumericalError when f is not finite at x0 or when a step
/// cannot be found after max_shrinks reductions.
PgmResult pgm_solve(const SmoothFunction& f, const Vector& l1_weights, double lambda, const Vector& x0,
                    const PgmConfig& cfg);

struct AugLagConfig {
  double eps = 0.1;
  double rho_max = 1e8;
  double rho_init = 1.0;
  double alpha_init = 0.0;
  int max_outer = 100;
  PgmConfig pgm;

  void validate() const;
};

struct AugLagState {
  double alpha = 0.0;
  double rho = 1.0;
  Theta theta;
  double g = 0.0;  // h(S) at theta
};

/// One primal solve inside the outer loop.
struct AugLagStep {
  int outer = 0;
  double alpha = 0.0;
  double rho = 0.0;
  double g_before = 0.0;
  double g_after = 0.0;
  bool accepted = false;  // passed the 0.25 decrease test
  int pgm_iterations = 0;
};

struct AugLagResult {
  Theta theta;
  AugLagState state;
  int outer_iterations = 0;
  int pgm_iterations = 0;
  int evaluations = 0;
  std::vector<AugLagStep> trace;
};

/// Smooth data term over Theta: returns the value and, when grad is non-null,
/// fills the pack()-aligned gradient.
using ThetaObjective = std::function<double(const Theta& theta, Vector* grad)>;

AugLagResult auglag_solve(const ThetaObjective& data_term, double lambda, const Theta& theta0,
                          const AugLagConfig& cfg);

/// Data term = nmll of lik; PGM tolerances are scaled by the observation count.
AugLagResult auglag_solve(const Likelihood& lik, double lambda, const Theta& theta0, const AugLagConfig& cfg);

}  // namespace structgp
