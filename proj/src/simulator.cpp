#include "structgp/simulator.hpp"

#include "structgp/kernel.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace structgp {

Rng replicate_rng(std::uint64_t seed, std::uint64_t point, std::uint64_t rep) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(point), static_cast<std::uint32_t>(rep), 0x5eedu};
  return Rng(seq);
}

Dag sample_er_dag(int k, double md, Rng& rng) {
  if (k <= 0) throw std::invalid_argument("sample_er_dag: k must be positive");
  if (!(md >= 0.0) || (k > 1 && md > k - 1) || (k == 1 && md > 0.0)) {
    throw std::invalid_argument("sample_er_dag: mean degree " + std::to_string(md) + " outside [0, k-1]");
  }
  std::vector<int> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  Dag g(k);
  if (k == 1) return g;
  const double p = md / (k - 1);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      if (unif(rng) < p) g.set_edge(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }
  }
  return g;
}

Theta sample_theta(const Dag& dag, Rng& rng, double sigma) {
  const int k = dag.k();
  std::uniform_real_distribution<double> magnitude(0.5, 2.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uniform_real_distribution<double> log_scale(-0.5, 0.5);
  Matrix S = Matrix::Zero(k, k);
  for (const auto& [from, to] : dag.edges()) {
    const double m = magnitude(rng);
    S(to, from) = unif(rng) < 0.5 ? -m : m;
  }
  Vector ell(k);
  for (int v = 0; v < k; ++v) ell[v] = log_scale(rng);
  return Theta(std::move(S), std::move(ell), sigma);
}

Dataset sample_dataset(const Theta& theta, int r, int n_per_task, Rng& rng, double t_max) {
  theta.validate();
  if (r <= 0) throw std::invalid_argument("sample_dataset: patient count must be positive");
  if (n_per_task <= 0) throw std::invalid_argument("sample_dataset: observations per task must be positive");
  const int k = theta.k();
  std::uniform_real_distribution<double> when(0.0, t_max);
  std::normal_distribution<double> z(0.0, 1.0);

  std::vector<Observation> obs;
  obs.reserve(static_cast<std::size_t>(r) * static_cast<std::size_t>(k) * static_cast<std::size_t>(n_per_task));
  for (int i = 0; i < r; ++i) {
    const auto first = obs.size();
    for (int u = 0; u < k; ++u) {
      for (int m = 0; m < n_per_task; ++m) obs.push_back({i, u, when(rng), 0.0});
    }
    // Observations are generated in (task, draw) order; the design sorts by time
    // within task and keeps the mapping back to these rows.
    std::vector<Observation> block(obs.begin() + static_cast<std::ptrdiff_t>(first), obs.end());
    for (auto& o : block) o.patient = 0;
    const Design d = Design::from_dataset(Dataset(block, k));
    const auto& p = d.patients.front();
    Matrix K = patient_gram(theta, p);
    const auto llt = factorize(K);
    Vector e(p.size());
    for (Eigen::Index j = 0; j < e.size(); ++j) e[j] = z(rng);
    const Vector y = llt.matrixL() * e;
    for (Eigen::Index j = 0; j < y.size(); ++j) obs[first + p.source[static_cast<std::size_t>(j)]].value = y[j];
  }
  return Dataset(std::move(obs), k);
}

}  // namespace structgp
