#pragma once

// Ground-truth generation for simulation studies: Erdos-Renyi DAGs with a
// target mean degree, weights and lengthscales from the study's sampling
// ranges, and exact joint draws from the prior GP at random times.

#include "structgp/model.hpp"

#include <random>

namespace structgp {

using Rng = std::mt19937_64;

/// Generator for replicate `rep` of sweep point `point` under `seed`.
Rng replicate_rng(std::uint64_t seed, std::uint64_t point, std::uint64_t rep);

/// Each of the k(k-1)/2 pairs is an edge with probability md / (k - 1),
/// oriented along a uniformly random topological order.
Dag sample_er_dag(int k, double md, Rng& rng);

/// Edge weights uniform on [-2, -0.5] u [0.5, 2]; ell uniform on [-0.5, 0.5].
Theta sample_theta(const Dag& dag, Rng& rng, double sigma = 0.01);

/// Per patient and task, n_per_task times uniform on [0, 10]; values drawn
/// jointly per patient from N(0, K + sigma^2 I).
Dataset sample_dataset(const Theta& theta, int r, int n_per_task, Rng& rng, double t_max = 10.0);

}  // namespace structgp
