#include "structgp/acyclicity.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace structgp {

namespace {

void require_square(const Matrix& S, const char* who) {
  if (S.rows() != S.cols()) throw std::invalid_argument(std::string(who) + ": matrix must be square");
}

Matrix masked(const Matrix& S, double threshold) {
  Matrix out = S;
  for (Eigen::Index v = 0; v < S.rows(); ++v) {
    for (Eigen::Index u = 0; u < S.cols(); ++u) {
      if (std::abs(S(v, u)) < threshold || std::abs(S(v, u)) < kSupportTolerance) out(v, u) = 0.0;
    }
  }
  return out;
}

}  // namespace

Matrix matrix_exp(const Matrix& A) {
  require_square(A, "matrix_exp");
  if (!A.allFinite()) throw std::invalid_argument("matrix_exp: non-finite input");
  return A.exp();
}

double h_value(const Matrix& S) {
  require_square(S, "h_value");
  const Matrix E = matrix_exp(S.cwiseProduct(S));
  return E.trace() - static_cast<double>(S.rows());
}

Matrix h_grad(const Matrix& S) {
  require_square(S, "h_grad");
  const Matrix E = matrix_exp(S.cwiseProduct(S));
  return E.transpose().cwiseProduct(2.0 * S);
}

AcyclicityValue acyclicity(const Matrix& S) {
  require_square(S, "acyclicity");
  const Matrix E = matrix_exp(S.cwiseProduct(S));
  // tr(exp) - k is nonnegative in exact arithmetic; clip round-off.
  return {std::max(0.0, E.trace() - static_cast<double>(S.rows())), E.transpose().cwiseProduct(2.0 * S)};
}

std::vector<int> topological_order(const Dag& g) {
  const int k = g.k();
  std::vector<int> indegree(static_cast<std::size_t>(k), 0);
  for (const auto& [from, to] : g.edges()) ++indegree[static_cast<std::size_t>(to)];
  std::vector<int> order;
  std::vector<int> ready;
  for (int v = k - 1; v >= 0; --v) {
    if (indegree[static_cast<std::size_t>(v)] == 0) ready.push_back(v);
  }
  while (!ready.empty()) {
    const int u = ready.back();
    ready.pop_back();
    order.push_back(u);
    for (int v = k - 1; v >= 0; --v) {
      if (u != v && g.has_edge(u, v) && --indegree[static_cast<std::size_t>(v)] == 0) ready.push_back(v);
    }
  }
  if (static_cast<int>(order.size()) != k) throw std::invalid_argument("topological_order: graph has a cycle");
  return order;
}

bool is_dag(const Dag& g) {
  try {
    topological_order(g);
    return true;
  } catch (const std::invalid_argument&) {
    return false;
  }
}

bool is_dag(const Matrix& S) {
  require_square(S, "is_dag");
  return is_dag(Dag::from_support(S, kSupportTolerance));
}

ThresholdResult min_dag_threshold(const Matrix& S) {
  require_square(S, "min_dag_threshold");
  if (!S.allFinite()) throw std::invalid_argument("min_dag_threshold: non-finite input");
  if (is_dag(S)) return {0.0, S};
  const Matrix base = masked(S, 0.0);

  std::vector<double> candidates;
  for (Eigen::Index v = 0; v < S.rows(); ++v) {
    for (Eigen::Index u = 0; u < S.cols(); ++u) {
      if (u != v && base(v, u) != 0.0) candidates.push_back(std::abs(base(v, u)));
    }
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  // Masking more entries never creates a cycle, so the first acyclic candidate
  // can be found by bisection.
  std::size_t lo = 0;
  std::size_t hi = candidates.size();
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (is_dag(masked(base, candidates[mid]))) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  const double t = lo < candidates.size()
                       ? candidates[lo]
                       : std::nextafter(candidates.back(), std::numeric_limits<double>::infinity());
  return {t, masked(base, t)};
}

}  // namespace structgp
