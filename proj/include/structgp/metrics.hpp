#pragma once

// Graph and parameter recovery scores with bootstrap uncertainty.

#include "structgp/model.hpp"

#include <random>
#include <utility>
#include <vector>

namespace structgp {

struct GraphScore {
  int shd = 0;
  int extra = 0;
  int missing = 0;
  int reversed = 0;
  int true_positive = 0;
  double precision = 1.0;
  double recall = 1.0;
  /// No predicted edges: precision reported as 1.0.
  bool precision_undefined = false;
  /// No true edges: recall reported as 1.0.
  bool recall_undefined = false;
  double rmse_s = 0.0;
};

/// Structural Hamming distance decomposition. Each unordered node pair that
/// differs counts once: missing, extra, or reversed.
GraphScore shd(const Dag& pred, const Dag& truth);

/// Fills precision/recall fields; reversed edges count as false positives.
GraphScore precision_recall(const Dag& pred, const Dag& truth);

/// RMS difference over the k(k-1) off-diagonal weights.
double rmse_s(const Matrix& pred, const Matrix& truth);

/// All of the above in one record.
GraphScore score(const Dag& pred, const Dag& truth, const Matrix& S_pred, const Matrix& S_truth);

enum class Statistic { Mean, Median };

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Percentile bootstrap interval of the mean (or median).
Interval bootstrap_ci(const std::vector<double>& values, std::mt19937_64& rng, double level = 0.95, int B = 2000,
                      Statistic stat = Statistic::Mean);

double mean(const std::vector<double>& values);
/// Linear-interpolation quantile (type 7), q in [0, 1].
double quantile(std::vector<double> values, double q);
double median(const std::vector<double>& values);

}  // namespace structgp
