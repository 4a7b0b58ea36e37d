#include "structgp/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace structgp {

Theta::Theta(Matrix s, Vector l, double noise) : S(std::move(s)), ell(std::move(l)), sigma(noise) {
  validate();
}

Theta Theta::zeros(int k, double noise) {
  if (k <= 0) throw std::invalid_argument("Theta: k must be positive");
  return Theta(Matrix::Zero(k, k), Vector::Zero(k), noise);
}

double Theta::lengthscale(int v) const { return std::exp(ell[v]); }

Matrix Theta::mixing() const { return Matrix::Identity(k(), k()) - S; }

void Theta::validate() const {
  const auto n = ell.size();
  if (n == 0) throw std::invalid_argument("Theta: k must be positive");
  if (S.rows() != n || S.cols() != n) {
    throw std::invalid_argument("Theta: S must be k x k with k = ell.size()");
  }
  if (!S.allFinite()) throw std::invalid_argument("Theta: S has non-finite entries");
  if (!ell.allFinite()) throw std::invalid_argument("Theta: ell has non-finite entries");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("Theta: sigma must be finite and nonnegative");
  }
  for (Eigen::Index v = 0; v < n; ++v) {
    if (S(v, v) != 0.0) throw std::invalid_argument("Theta: diag(S) must be zero");
  }
}

bool Theta::operator==(const Theta& other) const {
  return S.rows() == other.S.rows() && S.cols() == other.S.cols() &&
         ell.size() == other.ell.size() && S == other.S && ell == other.ell &&
         sigma == other.sigma;
}

double impulse_response(const Theta& theta, int v, int u, double t) {
  const int k = theta.k();
  if (v < 0 || v >= k || u < 0 || u >= k) {
    throw std::out_of_range("impulse_response: task index out of range");
  }
  const double scale = (v == u ? 1.0 : 0.0) - theta.S(v, u);
  return scale * std::exp(-t * t / theta.lengthscale(v));
}

int packed_size(int k) { return k * (k - 1) + k; }

int weight_index(int k, int v, int u) {
  if (v == u || v < 0 || u < 0 || v >= k || u >= k) {
    throw std::out_of_range("weight_index: invalid off-diagonal position");
  }
  return v * (k - 1) + (u < v ? u : u - 1);
}

Vector pack(const Theta& theta) {
  const int k = theta.k();
  Vector out(packed_size(k));
  int pos = 0;
  for (int v = 0; v < k; ++v) {
    for (int u = 0; u < k; ++u) {
      if (u != v) out[pos++] = theta.S(v, u);
    }
  }
  out.tail(k) = theta.ell;
  return out;
}

Theta unpack(const Vector& params, int k, double sigma) {
  if (k <= 0 || params.size() != packed_size(k)) {
    throw std::invalid_argument("unpack: expected " + std::to_string(packed_size(k)) +
                                " parameters, got " + std::to_string(params.size()));
  }
  Matrix S = Matrix::Zero(k, k);
  int pos = 0;
  for (int v = 0; v < k; ++v) {
    for (int u = 0; u < k; ++u) {
      if (u != v) S(v, u) = params[pos++];
    }
  }
  return Theta(std::move(S), params.tail(k), sigma);
}

Dataset::Dataset(std::vector<Observation> observations, int k) : obs_(std::move(observations)) {
  int max_task = -1;
  std::map<int, int> seen;
  for (const auto& o : obs_) {
    if (o.task < 0) throw std::invalid_argument("Dataset: negative task id");
    if (o.patient < 0) throw std::invalid_argument("Dataset: negative patient id");
    if (!std::isfinite(o.time)) throw std::invalid_argument("Dataset: non-finite time");
    if (!std::isfinite(o.value)) throw std::invalid_argument("Dataset: non-finite value");
    max_task = std::max(max_task, o.task);
    seen[o.patient] = 1;
  }
  k_ = k > 0 ? k : max_task + 1;
  if (max_task >= k_) {
    throw std::invalid_argument("Dataset: task id " + std::to_string(max_task + 1) +
                                " exceeds task count " + std::to_string(k_));
  }
  r_ = static_cast<int>(seen.size());
  int expect = 0;
  for (const auto& [id, unused] : seen) {
    if (id != expect++) throw std::invalid_argument("Dataset: patient ids must be dense in 1..r");
  }
}

std::vector<std::vector<std::size_t>> Dataset::patient_blocks() const {
  std::vector<std::vector<std::size_t>> blocks(static_cast<std::size_t>(r_));
  for (std::size_t i = 0; i < obs_.size(); ++i) {
    blocks[static_cast<std::size_t>(obs_[i].patient)].push_back(i);
  }
  return blocks;
}

Dag::Dag(int k) : k_(k), adj_(static_cast<std::size_t>(k) * static_cast<std::size_t>(k), 0) {
  if (k < 0) throw std::invalid_argument("Dag: negative size");
}

Dag Dag::from_support(const Matrix& S, double tol) {
  if (S.rows() != S.cols()) throw std::invalid_argument("Dag::from_support: S not square");
  Dag g(static_cast<int>(S.rows()));
  for (int v = 0; v < g.k_; ++v) {
    for (int u = 0; u < g.k_; ++u) {
      if (u != v && std::abs(S(v, u)) > tol) g.set_edge(u, v);
    }
  }
  return g;
}

void Dag::set_edge(int from, int to, bool present) {
  if (from < 0 || to < 0 || from >= k_ || to >= k_) throw std::out_of_range("Dag: node out of range");
  if (from == to) throw std::invalid_argument("Dag: self loops are not allowed");
  adj_[index(to, from)] = present ? 1 : 0;
}

int Dag::edge_count() const {
  return static_cast<int>(std::count(adj_.begin(), adj_.end(), std::uint8_t{1}));
}

std::vector<std::pair<int, int>> Dag::edges() const {
  std::vector<std::pair<int, int>> out;
  for (int v = 0; v < k_; ++v) {
    for (int u = 0; u < k_; ++u) {
      if (adj_[index(v, u)]) out.emplace_back(u, v);
    }
  }
  return out;
}

}  // namespace structgp
