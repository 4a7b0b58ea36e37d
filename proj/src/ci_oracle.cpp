#include "structgp/ci_oracle.hpp"

#include "structgp/acyclicity.hpp"
#include "structgp/kernel.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace structgp {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kLog2Pi = 1.83787706640934548356;

void check_pair(int k, int u, int v, const char* what) {
  if (u < 0 || u >= k || v < 0 || v >= k) throw std::out_of_range(std::string(what) + ": index out of range");
  if (u == v) throw std::invalid_argument(std::string(what) + ": u and v must differ");
}

std::vector<int> block_rows(const std::vector<int>& tasks, int block) {
  std::vector<int> rows;
  for (int t : tasks) {
    for (int i = 0; i < block; ++i) rows.push_back(t * block + i);
  }
  return rows;
}

Matrix take(const Matrix& K, const std::vector<int>& r, const std::vector<int>& c) { return K(r, c); }

}  // namespace

Matrix transfer_function(const Theta& theta, double omega) {
  theta.validate();
  const Matrix M = theta.mixing();
  Matrix H(M.rows(), M.cols());
  for (int v = 0; v < theta.k(); ++v) {
    const double a = theta.lengthscale(v);
    H.row(v) = M.row(v) * (std::sqrt(kPi * a) * std::exp(-a * omega * omega / 4.0));
  }
  return H;
}

SpectralDensity spectral_density(const Theta& theta, double omega) {
  const Matrix H = transfer_function(theta, omega);
  return {omega, H * H.transpose()};
}

double partial_cross_spectrum(const Matrix& f, int u, int v, const std::vector<int>& C) {
  const int k = static_cast<int>(f.rows());
  if (u < 0 || u >= k || v < 0 || v >= k) throw std::out_of_range("partial_cross_spectrum: index out of range");
  for (int c : C) {
    if (c < 0 || c >= k) throw std::out_of_range("partial_cross_spectrum: conditioning index out of range");
    if (c == u || c == v) throw std::invalid_argument("partial_cross_spectrum: u and v must not be conditioned on");
  }
  if (C.empty()) return f(u, v);
  const Matrix fCC = take(f, C, C);
  Eigen::FullPivLU<Matrix> lu(fCC);
  if (!lu.isInvertible()) throw NumericalError("partial_cross_spectrum: f_CC is singular");
  const Vector fCv = f(C, v);
  const Vector fCu = f(C, u);
  return f(u, v) - fCu.dot(lu.solve(fCv));
}

double partial_cross_spectrum(const SpectralDensity& f, int u, int v, const std::vector<int>& C) {
  return partial_cross_spectrum(f.f, u, v, C);
}

std::vector<double> default_frequency_grid() { return {0.0, 0.5, -0.5, 1.0, -1.0, 2.0, -2.0}; }

bool ordered_ci_check(const Theta& theta, int u, int v, const std::vector<double>& omegas,
                      const std::vector<int>& order, double tol) {
  const int k = theta.k();
  check_pair(k, u, v, "ordered_ci_check");
  std::vector<int> ord = order;
  if (ord.empty()) {
    ord.resize(static_cast<std::size_t>(k));
    std::iota(ord.begin(), ord.end(), 0);
  }
  std::vector<int> sorted = ord;
  std::sort(sorted.begin(), sorted.end());
  std::vector<int> expected(static_cast<std::size_t>(k));
  std::iota(expected.begin(), expected.end(), 0);
  if (sorted != expected) throw std::invalid_argument("ordered_ci_check: order is not a permutation");

  const auto pos_u = std::find(ord.begin(), ord.end(), u) - ord.begin();
  const auto pos_v = std::find(ord.begin(), ord.end(), v) - ord.begin();
  if (pos_v < pos_u) throw std::invalid_argument("ordered_ci_check: v must come after u in the order");
  const std::vector<int> C(ord.begin(), ord.begin() + pos_u);

  for (double w : omegas) {
    if (std::abs(partial_cross_spectrum(spectral_density(theta, w), u, v, C)) >= tol) return false;
  }
  return true;
}

bool cholesky_sparsity_oracle(const Matrix& K, int u, int v, double tol) {
  check_pair(static_cast<int>(K.rows()), u, v, "cholesky_sparsity_oracle");
  if (u > v) std::swap(u, v);
  Eigen::LLT<Matrix> llt(K);
  if (llt.info() != Eigen::Success) throw NumericalError("cholesky_sparsity_oracle: K is not positive definite");
  const Matrix L = llt.matrixL();
  return std::abs(L(v, u)) < tol;
}

bool precision_ci_oracle(const Matrix& K, int u, int v, double tol) {
  check_pair(static_cast<int>(K.rows()), u, v, "precision_ci_oracle");
  Eigen::LLT<Matrix> llt(K);
  if (llt.info() != Eigen::Success) throw NumericalError("precision_ci_oracle: K is not positive definite");
  const Matrix P = llt.solve(Matrix::Identity(K.rows(), K.cols()));
  return std::abs(P(u, v)) < tol;
}

Matrix snapshot_covariance(const Theta& theta, const std::vector<double>& times) {
  theta.validate();
  if (times.empty()) throw std::invalid_argument("snapshot_covariance: no times");
  const int k = theta.k();
  const int m = static_cast<int>(times.size());
  Matrix K(k * m, k * m);
  for (int u = 0; u < k; ++u) {
    for (int v = 0; v < k; ++v) {
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) K(u * m + i, v * m + j) = cross_cov(theta, u, v, times[i] - times[j]);
      }
    }
  }
  K.diagonal().array() += theta.sigma * theta.sigma;
  return K;
}

double gaussian_log_density(const Matrix& K, const Vector& y) {
  if (K.rows() != y.size()) throw std::invalid_argument("gaussian_log_density: size mismatch");
  Eigen::LLT<Matrix> llt(K);
  if (llt.info() != Eigen::Success) throw NumericalError("gaussian_log_density: K is not positive definite");
  const Vector z = llt.matrixL().solve(y);
  const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  return -0.5 * z.squaredNorm() - 0.5 * logdet - 0.5 * static_cast<double>(y.size()) * kLog2Pi;
}

double factorized_log_density(const Matrix& K, const Vector& y, int block,
                              const std::vector<std::vector<int>>& parents) {
  if (block <= 0) throw std::invalid_argument("factorized_log_density: block must be positive");
  const int k = static_cast<int>(parents.size());
  if (K.rows() != static_cast<Eigen::Index>(k) * block || y.size() != K.rows()) {
    throw std::invalid_argument("factorized_log_density: size mismatch");
  }
  double total = 0.0;
  for (int v = 0; v < k; ++v) {
    const auto rv = block_rows({v}, block);
    const Vector yv = y(rv);
    const Matrix Kvv = take(K, rv, rv);
    if (parents[v].empty()) {
      total += gaussian_log_density(Kvv, yv);
      continue;
    }
    const auto rp = block_rows(parents[v], block);
    const Matrix Kpp = take(K, rp, rp);
    const Matrix Kvp = take(K, rv, rp);
    Eigen::LLT<Matrix> llt(Kpp);
    if (llt.info() != Eigen::Success) throw NumericalError("factorized_log_density: parent block not positive definite");
    const Vector mean = Kvp * llt.solve(Vector(y(rp)));
    const Matrix cond = Kvv - Kvp * llt.solve(Matrix(Kvp.transpose()));
    total += gaussian_log_density(cond, yv - mean);
  }
  return total;
}

std::vector<std::vector<int>> graph_parents(const Dag& g) {
  std::vector<std::vector<int>> parents(static_cast<std::size_t>(g.k()));
  for (const auto& [from, to] : g.edges()) parents[static_cast<std::size_t>(to)].push_back(from);
  return parents;
}

FactorizationCheck markov_factorization_check(const Theta& theta, const std::vector<double>& times,
                                              const Vector& y, double tol) {
  const Matrix K = snapshot_covariance(theta, times);
  const auto parents = graph_parents(Dag::from_support(theta.S, kSupportTolerance));
  FactorizationCheck out;
  out.joint = gaussian_log_density(K, y);
  out.factorized = factorized_log_density(K, y, static_cast<int>(times.size()), parents);
  out.gap = std::abs(out.joint - out.factorized);
  out.holds = out.gap < tol;
  return out;
}

}  // namespace structgp
