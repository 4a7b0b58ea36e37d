#pragma once

// Helpers shared by the test programs: random models and designs, finite
// differences, and dense reference computations that avoid the library's
// block structure.

#include "structgp/kernel.hpp"
#include "structgp/model.hpp"
#include "structgp/simulator.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace support {

using structgp::Dataset;
using structgp::Matrix;
using structgp::Observation;
using structgp::Rng;
using structgp::Theta;
using structgp::Vector;

inline constexpr double kPi = 3.14159265358979323846;

/// Off-diagonal weights nonzero with probability `density`, uniform on
/// [-wmax, wmax]; ell uniform on [-0.5, 0.5]. Cycles allowed.
inline Theta random_theta(int k, Rng& rng, double density = 0.5, double wmax = 1.5, double sigma = 0.01) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uniform_real_distribution<double> w(-wmax, wmax);
  std::uniform_real_distribution<double> l(-0.5, 0.5);
  Matrix S = Matrix::Zero(k, k);
  for (int v = 0; v < k; ++v) {
    for (int u = 0; u < k; ++u) {
      if (u != v && unif(rng) < density) S(v, u) = w(rng);
    }
  }
  Vector ell(k);
  for (int v = 0; v < k; ++v) ell[v] = l(rng);
  return Theta(S, ell, sigma);
}

/// r patients, each task observed n times at uniform times on [0, t_max],
/// values standard normal.
inline Dataset random_dataset(int k, int r, int n, Rng& rng, double t_max = 10.0) {
  std::uniform_real_distribution<double> time(0.0, t_max);
  std::normal_distribution<double> value;
  std::vector<Observation> obs;
  for (int i = 0; i < r; ++i) {
    for (int u = 0; u < k; ++u) {
      for (int j = 0; j < n; ++j) obs.push_back({i, u, time(rng), value(rng)});
    }
  }
  std::shuffle(obs.begin(), obs.end(), rng);
  return Dataset(obs, k);
}

inline Vector central_difference(const std::function<double(const Vector&)>& f, const Vector& x, double h) {
  Vector g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vector xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

/// Sup-norm relative error of a against the reference b.
inline double relative_error(const Vector& a, const Vector& b) {
  const double scale = std::max(b.lpNorm<Eigen::Infinity>(), 1e-12);
  return (a - b).lpNorm<Eigen::Infinity>() / scale;
}

inline double relative_error(const Matrix& a, const Matrix& b) {
  const double scale = std::max(b.lpNorm<Eigen::Infinity>(), 1e-12);
  return (a - b).lpNorm<Eigen::Infinity>() / scale;
}

/// Full (r n) x (r n) covariance in dataset order, built entry by entry from
/// cross_cov with zero covariance across patients.
inline Matrix dense_covariance(const Theta& theta, const Dataset& data) {
  const auto& obs = data.observations();
  const auto n = static_cast<Eigen::Index>(obs.size());
  Matrix K = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto& a = obs[static_cast<std::size_t>(i)];
      const auto& b = obs[static_cast<std::size_t>(j)];
      if (a.patient != b.patient) continue;
      K(i, j) = structgp::cross_cov(theta, a.task, b.task, a.time - b.time);
    }
  }
  K.diagonal().array() += theta.sigma * theta.sigma;
  return K;
}

/// nmll through an explicit inverse and LU determinant of the full matrix.
inline double dense_nmll(const Theta& theta, const Dataset& data) {
  const Matrix K = dense_covariance(theta, data);
  Vector y(K.rows());
  for (std::size_t i = 0; i < data.size(); ++i) y[static_cast<Eigen::Index>(i)] = data.observations()[i].value;
  const Eigen::FullPivLU<Matrix> lu(K);
  const Matrix Kinv = lu.inverse();
  double logdet = 0.0;
  const Matrix U = lu.matrixLU().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < U.rows(); ++i) logdet += std::log(std::abs(U(i, i)));
  return 0.5 * y.dot(Kinv * y) + 0.5 * logdet + 0.5 * static_cast<double>(y.size()) * std::log(2.0 * kPi);
}

/// Transitive closure by Floyd-Warshall; adj(v, u) = edge u -> v.
inline bool has_cycle(const Matrix& S, double tol = 0.0) {
  const auto k = S.rows();
  std::vector<std::vector<bool>> reach(static_cast<std::size_t>(k), std::vector<bool>(static_cast<std::size_t>(k)));
  for (Eigen::Index v = 0; v < k; ++v) {
    for (Eigen::Index u = 0; u < k; ++u) {
      if (u != v && std::abs(S(v, u)) > tol) reach[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)] = true;
    }
  }
  for (std::size_t m = 0; m < reach.size(); ++m) {
    for (std::size_t a = 0; a < reach.size(); ++a) {
      for (std::size_t b = 0; b < reach.size(); ++b) {
        if (reach[a][m] && reach[m][b]) reach[a][b] = true;
      }
    }
  }
  for (std::size_t a = 0; a < reach.size(); ++a) {
    if (reach[a][a]) return true;
  }
  return false;
}

/// The example graph used throughout the tests: I - S has -1.18, -1.45 in
/// row 3 and 0.82, 0.57 in row 4 (1-based), i.e. edges 1->3, 2->3, 1->4, 3->4.
inline Theta toy_theta(const Vector& ell = Vector::Zero(4), double sigma = 0.01) {
  Matrix S = Matrix::Zero(4, 4);
  S(2, 0) = 1.18;
  S(2, 1) = 1.45;
  S(3, 0) = -0.82;
  S(3, 2) = -0.57;
  return Theta(S, ell, sigma);
}

}  // namespace support
