#pragma once

// Numerical checks of the link between zeros of S and conditional
// independence. In the frequency domain the model is Z(w) = Ht(w) W(w) with
// Ht(w)_vu = (I - S)_vu sqrt(pi a_v) exp(-a_v w^2 / 4), so the spectral density
// Ht Ht^T has Ht as a Cholesky-like factor once tasks are listed in a
// topological order. Ordered partial cross-spectra then vanish exactly where S
// does. The finite-dimensional oracles test the same statement on a plain
// covariance matrix, and the snapshot helpers evaluate Gaussian log-densities
// for factorization checks.

#include "structgp/model.hpp"

#include <vector>

namespace structgp {

inline constexpr double kCiTolerance = 1e-8;

Matrix transfer_function(const Theta& theta, double omega);

struct SpectralDensity {
  double omega = 0.0;
  Matrix f;  // real symmetric, PSD
};

SpectralDensity spectral_density(const Theta& theta, double omega);

/// f_uv - f_uC f_CC^-1 f_Cv. Requires u, v outside C.
double partial_cross_spectrum(const Matrix& f, int u, int v, const std::vector<int>& C);
double partial_cross_spectrum(const SpectralDensity& f, int u, int v, const std::vector<int>& C);

/// {0, +-0.5, +-1, +-2}.
std::vector<double> default_frequency_grid();

/// True iff |f_{uv|C}(w)| < tol at every w, where C holds the tasks before u
/// in `order` (identity order when empty). v must come after u.
bool ordered_ci_check(const Theta& theta, int u, int v, const std::vector<double>& omegas,
                      const std::vector<int>& order = {}, double tol = kCiTolerance);

/// Cholesky factor of K in index order; true iff |L(v, u)| < tol (u < v).
bool cholesky_sparsity_oracle(const Matrix& K, int u, int v, double tol = kCiTolerance);

/// Full-conditional independence: |(K^-1)_uv| < tol.
bool precision_ci_oracle(const Matrix& K, int u, int v, double tol = kCiTolerance);

/// Covariance of the tasks observed jointly on `times`, ordered task-major
/// (row v * times.size() + i is task v at times[i]). Includes sigma^2 I.
Matrix snapshot_covariance(const Theta& theta, const std::vector<double>& times);

/// log N(y; 0, K).
double gaussian_log_density(const Matrix& K, const Vector& y);

/// Sum over tasks v of log p(y_v | y_parents(v)) for a task-major snapshot
/// with `block` values per task.
double factorized_log_density(const Matrix& K, const Vector& y, int block,
                              const std::vector<std::vector<int>>& parents);

/// parents[v] = {u : u -> v}.
std::vector<std::vector<int>> graph_parents(const Dag& g);

struct FactorizationCheck {
  double joint = 0.0;
  double factorized = 0.0;
  double gap = 0.0;  // |joint - factorized|
  bool holds = false;
};

/// Compares the joint snapshot log-density of y with the parent-conditional
/// factorization over the graph of theta.S.
FactorizationCheck markov_factorization_check(const Theta& theta, const std::vector<double>& times,
                                              const Vector& y, double tol = 1e-6);

}  // namespace structgp
