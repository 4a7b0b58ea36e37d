#include "structgp/likelihood.hpp"

#include <cmath>

namespace structgp {

namespace {

constexpr double kLog2Pi = 1.83787706640934548356;

}  // namespace

Likelihood::Likelihood(const Dataset& data) : design_(Design::from_dataset(data)) {}

double Likelihood::value(const Theta& theta) const { return evaluate(theta, false).value; }

NmllValue Likelihood::value_and_grad(const Theta& theta) const { return evaluate(theta, true); }

Matrix Likelihood::weight_gradient(const Theta& theta) const {
  const auto r = evaluate(theta, true);
  const int k = theta.k();
  Matrix g = Matrix::Zero(k, k);
  for (int v = 0; v < k; ++v) {
    for (int u = 0; u < k; ++u) {
      if (u != v) g(v, u) = r.grad[weight_index(k, v, u)];
    }
  }
  return g;
}

// With W = K^-1 - alpha alpha^T and K_pq = C_uv G_uv(tau_pq), every derivative
// of the likelihood reduces to two k x k contractions summed over patients:
//   A_uv = sum_{p in u, q in v} W_pq G_pq,   Q_uv = sum W_pq G_pq tau_pq^2.
// Then dnmll/dS = -(A M) and
//   dnmll/dell_w = sum_v C_wv [(1/2 - a_w / 2s) A_wv + (a_w / s^2) Q_wv],  s = a_w + a_v.
NmllValue Likelihood::evaluate(const Theta& theta, bool with_grad) const {
  theta.validate();
  const int k = theta.k();
  if (k != design_.k) throw std::invalid_argument("nmll: theta and dataset disagree on task count");

  const Matrix M = theta.mixing();
  const Matrix C = M * M.transpose();
  const double noise = theta.sigma * theta.sigma;

  Matrix A = Matrix::Zero(k, k);
  Matrix Q = Matrix::Zero(k, k);
  double total = 0.0;

  // Per-thread scratch sized exactly for this design's largest patient. The
  // size fixes the views' stride, and with it the rounding, so it must not
  // depend on whatever ran earlier on the thread.
  thread_local Matrix g_buf, k_buf, w_buf, inv_buf;
  const Eigen::Index n_max = design_.max_block;
  if (g_buf.rows() != n_max) {
    g_buf.resize(n_max, n_max);
    k_buf.resize(n_max, n_max);
    w_buf.resize(n_max, n_max);
    inv_buf.resize(n_max, n_max);
  }

  for (const auto& p : design_.patients) {
    const auto n = p.size();
    auto G = g_buf.topLeftCorner(n, n);
    auto K = k_buf.topLeftCorner(n, n);
    overlap_block(theta, p, G);

    auto build = [&](double jitter) {
      for (int u = 0; u < k; ++u) {
        if (p.count(u) == 0) continue;
        for (int v = 0; v < k; ++v) {
          if (p.count(v) == 0) continue;
          const auto rows = Eigen::seqN(p.task_offset[u], p.count(u));
          const auto cols = Eigen::seqN(p.task_offset[v], p.count(v));
          K(rows, cols) = C(u, v) * G(rows, cols);
        }
      }
      K.diagonal().array() += noise + jitter;
      if (!K.allFinite()) throw NumericalError("nmll: non-finite covariance");
    };
    build(0.0);
    const double jitter = 1e-8 * K.diagonal().mean();
    Eigen::LLT<Eigen::Ref<Matrix>> llt(K);
    if (llt.info() != Eigen::Success || !K.diagonal().allFinite()) {
      build(jitter);
      llt.compute(K);
      if (llt.info() != Eigen::Success || !K.diagonal().allFinite()) {
        throw NumericalError("nmll: covariance block not positive definite after jitter");
      }
    }
    const auto L = K.triangularView<Eigen::Lower>();
    const Vector alpha = llt.solve(p.y);
    const double logdet = 2.0 * K.diagonal().array().log().sum();
    total += 0.5 * p.y.dot(alpha) + 0.5 * logdet + 0.5 * static_cast<double>(n) * kLog2Pi;

    if (!with_grad) continue;
    auto Linv = w_buf.topLeftCorner(n, n);
    Linv.setIdentity();
    L.solveInPlace(Linv);
    auto W = inv_buf.topLeftCorner(n, n);
    W.setZero();
    W.selfadjointView<Eigen::Lower>().rankUpdate(Linv.transpose());
    W.triangularView<Eigen::StrictlyUpper>() = W.transpose();
    W.noalias() -= alpha * alpha.transpose();
    W.array() *= G.array();
    for (int u = 0; u < k; ++u) {
      if (p.count(u) == 0) continue;
      for (int v = 0; v < k; ++v) {
        if (p.count(v) == 0) continue;
        const auto wg = W.block(p.task_offset[u], p.task_offset[v], p.count(u), p.count(v));
        const auto t2 = p.tau2.block(p.task_offset[u], p.task_offset[v], p.count(u), p.count(v));
        A(u, v) += wg.sum();
        Q(u, v) += wg.cwiseProduct(t2).sum();
      }
    }
  }

  NmllValue out;
  out.value = total;
  if (!std::isfinite(total)) throw NumericalError("nmll: non-finite value");
  if (!with_grad) return out;

  out.grad.resize(packed_size(k));
  const Matrix dM = A * M;
  for (int v = 0; v < k; ++v) {
    for (int u = 0; u < k; ++u) {
      if (u != v) out.grad[weight_index(k, v, u)] = -dM(v, u);
    }
  }
  for (int w = 0; w < k; ++w) {
    const double a_w = theta.lengthscale(w);
    double g = 0.0;
    for (int v = 0; v < k; ++v) {
      const double s = a_w + theta.lengthscale(v);
      g += C(w, v) * ((0.5 - 0.5 * a_w / s) * A(w, v) + (a_w / (s * s)) * Q(w, v));
    }
    out.grad[k * (k - 1) + w] = g;
  }
  return out;
}

double nmll(const Theta& theta, const Dataset& data) { return Likelihood(data).value(theta); }

Vector nmll_grad(const Theta& theta, const Dataset& data) {
  return Likelihood(data).value_and_grad(theta).grad;
}

int weight_count(const Matrix& S) {
  int count = 0;
  for (Eigen::Index v = 0; v < S.rows(); ++v) {
    for (Eigen::Index u = 0; u < S.cols(); ++u) {
      if (u != v && S(v, u) != 0.0) ++count;
    }
  }
  return count;
}

double aic(const Theta& theta, const Likelihood& lik) {
  return 2.0 * weight_count(theta.S) + 2.0 * lik.value(theta);
}

double aic(const Theta& theta, const Dataset& data) { return aic(theta, Likelihood(data)); }

}  // namespace structgp
