#pragma once

/*
 * kernel.hpp
 * ----------
 * Covariance of the structured GP. Output u is the sum over noise channels w
 * of (I - S)_uw times white noise filtered by exp(-t^2 / a_u), a_u = exp(ell_u).
 * The intra-patient cross-covariance is the cross-correlation of impulse
 * responses,
 *
 *     k_uv(tau) = sum_w int H_uw(s) H_vw(s - tau) ds,       tau = t - t',
 *
 * and since every impulse response is an even Gaussian the integral has the
 * closed form
 *
 *     k_uv(tau) = C_uv * sqrt(pi a_u a_v / (a_u + a_v)) * exp(-tau^2 / (a_u + a_v)),
 *     C = (I - S)(I - S)^T.
 *
 * Convolution and correlation coincide for even filters, so the sign of tau
 * does not matter and k_uv(tau) = k_vu(-tau) = k_vu(tau).
 *
 * Patients are independent, so the Gram matrix is block diagonal with one
 * dense block per patient. Inside a block, observations are ordered by
 * (task, time); PatientDesign records the permutation back to the dataset.
 */

#include "structgp/model.hpp"

#include <Eigen/Cholesky>

#include <utility>
#include <vector>

namespace structgp {

/// int exp(-s^2/a) exp(-(s - tau)^2/b) ds.
double gaussian_overlap(double a, double b, double tau);

double cross_cov(const Theta& theta, int u, int v, double tau);

/// Adaptive Gauss-Kronrod integration of sum_w int H_uw(s) H_vw(s - tau) ds
/// built from impulse_response only. Throws NumericalError if the error
/// estimate exceeds 1e-10.
double cross_cov_quadrature_oracle(const Theta& theta, int u, int v, double tau);

/// One patient's inputs in (task, time) order.
struct PatientDesign {
  std::vector<int> task;
  Vector time;
  Vector y;
  std::vector<std::size_t> source;  // dataset index of each row
  std::vector<int> task_offset;     // rows of task u are [task_offset[u], task_offset[u+1])
  Matrix tau2;                      // squared time differences

  Eigen::Index size() const { return time.size(); }
  int count(int u) const { return task_offset[u + 1] - task_offset[u]; }
};

struct Design {
  int k = 0;
  std::size_t n = 0;
  Eigen::Index max_block = 0;
  std::vector<PatientDesign> patients;

  static Design from_dataset(const Dataset& data);
};

struct GramMatrix {
  std::vector<Matrix> blocks;
  /// Per patient, the (task, time) input of each block row.
  std::vector<std::vector<std::pair<int, double>>> index_map;
};

/// Noise-free Gaussian overlap factors G(a_u, a_v, tau) for one patient.
Matrix overlap_block(const Theta& theta, const PatientDesign& p);
/// Same, written into a preallocated p.size() x p.size() view.
void overlap_block(const Theta& theta, const PatientDesign& p, Eigen::Ref<Matrix> out);

/// Covariance block for one patient; adds sigma^2 I when with_noise is set.
Matrix patient_gram(const Theta& theta, const PatientDesign& p, bool with_noise = true);

GramMatrix gram(const Theta& theta, const Dataset& data);

/// dK/dtheta_j for every packed parameter j, in pack() order. Noise-free
/// (sigma is not a parameter).
std::vector<GramMatrix> gram_grad(const Theta& theta, const Dataset& data);

/// Cholesky with a single jitter retry of 1e-8 * mean(diag). K is modified
/// in place when the retry happens.
Eigen::LLT<Matrix> factorize(Matrix& K);

}  // namespace structgp
