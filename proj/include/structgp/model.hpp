#pragma once

/*
 * model.hpp
 * ---------
 * Shared domain types for the structured multi-output GP: the parameter set
 * (weights S, tied log-lengthscales, fixed noise), irregularly sampled
 * multi-patient observations, and boolean DAG adjacency.
 *
 * Index conventions: tasks and patients are 0-based in memory and 1-based in
 * every file format. S(v, u) != 0 encodes the edge u -> v, and the impulse
 * response of output v to noise channel u is
 *
 *     H_vu(t) = (I - S)_vu * exp(-t^2 / exp(ell_v)).
 */

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace structgp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Raised when a factorization or evaluation produces non-finite or
/// indefinite results. The CLI maps it to the runtime-failure exit code.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Theta {
  Matrix S;           // k x k, zero diagonal
  Vector ell;         // log-lengthscales, one per output task
  double sigma = 0.01;

  Theta() = default;
  Theta(Matrix s, Vector l, double noise);

  static Theta zeros(int k, double noise = 0.01);

  int k() const { return static_cast<int>(ell.size()); }
  /// a_v = exp(ell_v).
  double lengthscale(int v) const;
  /// I - S, the output-scale matrix of the impulse response.
  Matrix mixing() const;
  /// Throws std::invalid_argument when shapes or invariants are violated.
  void validate() const;

  bool operator==(const Theta& other) const;
};

/// (I - S)_vu * exp(-t^2 / a_v). Reference form used by oracles.
double impulse_response(const Theta& theta, int v, int u, double t);

/// Length of the flat parameter vector: k(k-1) off-diagonal weights then k
/// log-lengthscales. sigma is fixed and never packed.
int packed_size(int k);
/// Position of S(v, u), v != u, in the packed vector (row-major, diagonal skipped).
int weight_index(int k, int v, int u);
Vector pack(const Theta& theta);
Theta unpack(const Vector& params, int k, double sigma = 0.01);

struct Observation {
  int patient = 0;
  int task = 0;
  double time = 0.0;
  double value = 0.0;
};

class Dataset {
 public:
  Dataset() = default;
  /// k = 0 infers the task count from the largest task id.
  explicit Dataset(std::vector<Observation> observations, int k = 0);

  const std::vector<Observation>& observations() const { return obs_; }
  int patients() const { return r_; }
  int tasks() const { return k_; }
  std::size_t size() const { return obs_.size(); }
  bool empty() const { return obs_.empty(); }

  /// Observation indices per patient, in input order.
  std::vector<std::vector<std::size_t>> patient_blocks() const;

 private:
  std::vector<Observation> obs_;
  int r_ = 0;
  int k_ = 0;
};

/// Directed graph on k nodes; has_edge(u, v) means u -> v, stored at adj(v, u).
class Dag {
 public:
  Dag() = default;
  explicit Dag(int k);

  /// Support of S with |S(v, u)| > tol, diagonal ignored.
  static Dag from_support(const Matrix& S, double tol = 0.0);

  int k() const { return k_; }
  bool has_edge(int from, int to) const { return adj_[index(to, from)] != 0; }
  void set_edge(int from, int to, bool present = true);
  int edge_count() const;
  /// (from, to) pairs ordered by (to, from).
  std::vector<std::pair<int, int>> edges() const;

  bool operator==(const Dag& other) const = default;

 private:
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(k_) +
           static_cast<std::size_t>(col);
  }

  int k_ = 0;
  std::vector<std::uint8_t> adj_;
};

}  // namespace structgp
