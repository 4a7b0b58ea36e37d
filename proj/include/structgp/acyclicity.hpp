#pragma once

// Smooth acyclicity function h(S) = tr(exp(S o S)) - k, which is zero exactly
// when the support of S is acyclic, plus the combinatorial DAG test and the
// hard-threshold projection onto acyclic supports.

#include "structgp/model.hpp"

namespace structgp {

/// Entries with smaller magnitude are structural zeros for support tests.
inline constexpr double kSupportTolerance = 1e-12;

struct AcyclicityValue {
  double h = 0.0;
  Matrix grad;
};

Matrix matrix_exp(const Matrix& A);

double h_value(const Matrix& S);
/// exp(S o S)^T o 2S.
Matrix h_grad(const Matrix& S);
AcyclicityValue acyclicity(const Matrix& S);

bool is_dag(const Dag& g);
/// Support test with |S(v,u)| > kSupportTolerance as an edge u -> v.
bool is_dag(const Matrix& S);

/// A topological order of g (sources first). Throws if g has a cycle.
std::vector<int> topological_order(const Dag& g);

struct ThresholdResult {
  double threshold = 0.0;
  Matrix S;  // entries with |S| < threshold set to zero
};

/// Smallest t in {0} u {|S_vu|} such that zeroing every |S_vu| < t leaves an
/// acyclic support. Falls back to just above max|S| (the empty graph) when
/// ties at the largest magnitude still form a cycle.
ThresholdResult min_dag_threshold(const Matrix& S);

}  // namespace structgp
