#include "structgp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace structgp {

namespace {

void require_same_size(const Dag& a, const Dag& b) {
  if (a.k() != b.k()) throw std::invalid_argument("metrics: graphs have different node counts");
}

}  // namespace

GraphScore shd(const Dag& pred, const Dag& truth) {
  require_same_size(pred, truth);
  GraphScore s;
  for (int a = 0; a < pred.k(); ++a) {
    for (int b = a + 1; b < pred.k(); ++b) {
      const bool p_ab = pred.has_edge(a, b);
      const bool p_ba = pred.has_edge(b, a);
      const bool t_ab = truth.has_edge(a, b);
      const bool t_ba = truth.has_edge(b, a);
      const bool p_any = p_ab || p_ba;
      const bool t_any = t_ab || t_ba;
      if (p_ab == t_ab && p_ba == t_ba) continue;
      if (p_any && !t_any) {
        ++s.extra;
      } else if (!p_any && t_any) {
        ++s.missing;
      } else {
        ++s.reversed;
      }
    }
  }
  s.shd = s.extra + s.missing + s.reversed;
  return s;
}

GraphScore precision_recall(const Dag& pred, const Dag& truth) {
  GraphScore s = shd(pred, truth);
  int tp = 0;
  for (const auto& [from, to] : pred.edges()) {
    if (truth.has_edge(from, to)) ++tp;
  }
  const int n_pred = pred.edge_count();
  const int n_true = truth.edge_count();
  s.true_positive = tp;
  s.precision_undefined = n_pred == 0;
  s.recall_undefined = n_true == 0;
  s.precision = n_pred == 0 ? 1.0 : static_cast<double>(tp) / n_pred;
  s.recall = n_true == 0 ? 1.0 : static_cast<double>(tp) / n_true;
  return s;
}

double rmse_s(const Matrix& pred, const Matrix& truth) {
  if (pred.rows() != truth.rows() || pred.cols() != truth.cols() || pred.rows() != pred.cols()) {
    throw std::invalid_argument("rmse_s: matrices must be square with equal size");
  }
  const auto k = pred.rows();
  if (k < 2) return 0.0;
  double sum = 0.0;
  for (Eigen::Index v = 0; v < k; ++v) {
    for (Eigen::Index u = 0; u < k; ++u) {
      if (u == v) continue;
      const double d = pred(v, u) - truth(v, u);
      sum += d * d;
    }
  }
  return std::sqrt(sum / static_cast<double>(k * (k - 1)));
}

GraphScore score(const Dag& pred, const Dag& truth, const Matrix& S_pred, const Matrix& S_truth) {
  GraphScore s = precision_recall(pred, truth);
  s.rmse_s = rmse_s(S_pred, S_truth);
  return s;
}

double mean(const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("mean: empty sample");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile: empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile: q must be in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

double median(const std::vector<double>& values) { return quantile(values, 0.5); }

Interval bootstrap_ci(const std::vector<double>& values, std::mt19937_64& rng, double level, int B, Statistic stat) {
  if (values.empty()) throw std::invalid_argument("bootstrap_ci: empty sample");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("bootstrap_ci: level must be in (0, 1)");
  if (B < 1) throw std::invalid_argument("bootstrap_ci: B must be positive");
  std::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
  std::vector<double> stats(static_cast<std::size_t>(B));
  std::vector<double> resample(values.size());
  for (auto& st : stats) {
    for (auto& x : resample) x = values[pick(rng)];
    st = stat == Statistic::Mean ? mean(resample) : median(resample);
  }
  const double tail = 0.5 * (1.0 - level);
  return {quantile(stats, tail), quantile(stats, 1.0 - tail)};
}

}  // namespace structgp
