#pragma once

// Simulation studies: a config names sweeps over (k, md, n_lambda, r); every
// sweep point is replicated `reps` times. Each replicate samples a truth,
// data, fits it, and scores the fit and an independent random graph from the
// same distribution. Rows come out sorted by (point, rep) no matter how many
// worker threads ran them.

#include "structgp/learner.hpp"
#include "structgp/metrics.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace structgp {

struct ExperimentConfig {
  std::string name = "custom";
  std::vector<int> k{10};
  std::vector<double> md{2.0};
  std::vector<int> n_lambda{50};
  std::vector<int> r{50};
  int n_per_task = 10;
  int reps = 1;
  std::uint64_t seed = 0;
  double sigma = 0.01;
  /// Also fit from a random start at the path's selected lambda.
  bool random_init = false;
  LearnerConfig learner;

  /// TOY, EXP1, EXP2, EXP3 (case-insensitive).
  static ExperimentConfig preset(const std::string& name);
  void validate() const;
};

/// `key = value` lines, '#' comments, comma-separated lists for sweeps. A
/// `name` key loads that preset before the remaining keys are applied.
ExperimentConfig parse_experiment_config(std::istream& in);
ExperimentConfig read_experiment_config_file(const std::string& path);

struct SweepPoint {
  int k = 0;
  double md = 0.0;
  int n_lambda = 0;
  int r = 0;
};

/// Cartesian product in (k, md, n_lambda, r) order; points with md > k - 1
/// are skipped.
std::vector<SweepPoint> sweep_points(const ExperimentConfig& cfg);

struct RepRow {
  std::string experiment;
  std::size_t point_index = 0;
  SweepPoint point;
  int rep = 0;
  bool ok = false;
  std::string error;
  int true_edges = 0;
  double lambda_star = 0.0;
  GraphScore fit;
  GraphScore baseline;
  std::optional<GraphScore> randinit;
};

struct ExperimentReport {
  std::vector<RepRow> rows;
  int failed() const;
};

RepRow run_replicate(const ExperimentConfig& cfg, std::size_t point_index, const SweepPoint& point, int rep);

/// jobs <= 1 runs serially. progress is called once per finished replicate
/// (serialized, completion order).
ExperimentReport run_experiment(const ExperimentConfig& cfg, int jobs = 1,
                                const std::function<void(const RepRow&)>& progress = {});

void write_report_csv(std::ostream& out, const ExperimentReport& report);
ExperimentReport read_report_csv(std::istream& in);

enum class Figure { Exp1, Exp2, Exp3 };
Figure parse_figure(const std::string& name);

/// One row per sweep point: mean SHD with a bootstrap interval (fit,
/// baseline, and random-start fits when present) and median [IQR] precision
/// and recall. The x columns are r (exp1), n_lambda (exp2), or k, md (exp3).
void write_plot_data(std::ostream& out, const ExperimentReport& report, Figure figure, std::uint64_t seed = 0);

}  // namespace structgp
