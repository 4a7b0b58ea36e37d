#include "structgp/kernel.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace structgp {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_task(const Theta& theta, int u) {
  if (u < 0 || u >= theta.k()) throw std::out_of_range("kernel: task index out of range");
}

// d/d(ell_u) of log G(a_u, a_v, tau), split as c0 + c2 * tau^2.
struct LogOverlapSlope {
  double c0;
  double c2;
};

LogOverlapSlope log_overlap_slope(double a_u, double a_v) {
  const double s = a_u + a_v;
  return {0.5 - 0.5 * a_u / s, a_u / (s * s)};
}

void require_finite(const Matrix& K, const Theta& theta) {
  if (K.allFinite()) return;
  for (int v = 0; v < theta.k(); ++v) {
    if (!std::isfinite(theta.lengthscale(v)) || theta.lengthscale(v) <= 0.0) {
      throw NumericalError("gram: non-finite covariance from ell[" + std::to_string(v + 1) +
                           "] = " + std::to_string(theta.ell[v]));
    }
  }
  throw NumericalError("gram: non-finite covariance entries from S");
}

}  // namespace

double gaussian_overlap(double a, double b, double tau) {
  const double s = a + b;
  return std::sqrt(kPi * a * b / s) * std::exp(-tau * tau / s);
}

double cross_cov(const Theta& theta, int u, int v, double tau) {
  check_task(theta, u);
  check_task(theta, v);
  const Matrix M = theta.mixing();
  const double c = M.row(u).dot(M.row(v));
  return c * gaussian_overlap(theta.lengthscale(u), theta.lengthscale(v), tau);
}

double cross_cov_quadrature_oracle(const Theta& theta, int u, int v, double tau) {
  check_task(theta, u);
  check_task(theta, v);
  using boost::math::quadrature::gauss_kronrod;
  const double inf = std::numeric_limits<double>::infinity();
  double total = 0.0;
  for (int w = 0; w < theta.k(); ++w) {
    auto integrand = [&](double s) {
      return impulse_response(theta, u, w, s) * impulse_response(theta, v, w, s - tau);
    };
    double error = 0.0;
    const double value = gauss_kronrod<double, 61>::integrate(integrand, -inf, inf, 20, 1e-14, &error);
    if (!std::isfinite(value) || error > 1e-10) {
      throw NumericalError("cross_cov_quadrature_oracle: no convergence for channel " +
                           std::to_string(w + 1) + " (error estimate " + std::to_string(error) + ")");
    }
    total += value;
  }
  return total;
}

Design Design::from_dataset(const Dataset& data) {
  if (data.empty()) throw std::invalid_argument("Design: dataset is empty");
  Design d;
  d.k = data.tasks();
  d.n = data.size();
  const auto& obs = data.observations();
  for (auto rows : data.patient_blocks()) {
    std::stable_sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) {
      if (obs[a].task != obs[b].task) return obs[a].task < obs[b].task;
      return obs[a].time < obs[b].time;
    });
    PatientDesign p;
    const auto n = static_cast<Eigen::Index>(rows.size());
    p.time.resize(n);
    p.y.resize(n);
    p.task.reserve(rows.size());
    p.source = rows;
    p.task_offset.assign(static_cast<std::size_t>(d.k) + 1, 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& o = obs[rows[static_cast<std::size_t>(i)]];
      p.task.push_back(o.task);
      p.time[i] = o.time;
      p.y[i] = o.value;
      ++p.task_offset[static_cast<std::size_t>(o.task) + 1];
    }
    std::partial_sum(p.task_offset.begin(), p.task_offset.end(), p.task_offset.begin());
    p.tau2.resize(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      p.tau2.col(j) = (p.time.array() - p.time[j]).square().matrix();
    }
    d.max_block = std::max(d.max_block, p.size());
    d.patients.push_back(std::move(p));
  }
  return d;
}

Matrix overlap_block(const Theta& theta, const PatientDesign& p) {
  Matrix G(p.size(), p.size());
  overlap_block(theta, p, G);
  return G;
}

void overlap_block(const Theta& theta, const PatientDesign& p, Eigen::Ref<Matrix> G) {
  const int k = theta.k();
  for (int u = 0; u < k; ++u) {
    const int nu = p.count(u);
    if (nu == 0) continue;
    const double a_u = theta.lengthscale(u);
    for (int v = u; v < k; ++v) {
      const int nv = p.count(v);
      if (nv == 0) continue;
      const double a_v = theta.lengthscale(v);
      const double s = a_u + a_v;
      const double scale = std::sqrt(kPi * a_u * a_v / s);
      auto blk = G.block(p.task_offset[u], p.task_offset[v], nu, nv);
      blk = (scale * (p.tau2.block(p.task_offset[u], p.task_offset[v], nu, nv).array() * (-1.0 / s)).exp())
                .matrix();
      if (v != u) G.block(p.task_offset[v], p.task_offset[u], nv, nu) = blk.transpose();
    }
  }
}

Matrix patient_gram(const Theta& theta, const PatientDesign& p, bool with_noise) {
  const int k = theta.k();
  const Matrix M = theta.mixing();
  const Matrix C = M * M.transpose();
  Matrix K = overlap_block(theta, p);
  for (int u = 0; u < k; ++u) {
    for (int v = 0; v < k; ++v) {
      if (p.count(u) == 0 || p.count(v) == 0) continue;
      K.block(p.task_offset[u], p.task_offset[v], p.count(u), p.count(v)) *= C(u, v);
    }
  }
  if (with_noise) K.diagonal().array() += theta.sigma * theta.sigma;
  require_finite(K, theta);
  return K;
}

GramMatrix gram(const Theta& theta, const Dataset& data) {
  theta.validate();
  if (data.tasks() > theta.k()) throw std::invalid_argument("gram: dataset has more tasks than theta");
  const Design d = Design::from_dataset(data);
  GramMatrix out;
  for (const auto& p : d.patients) {
    out.blocks.push_back(patient_gram(theta, p));
    std::vector<std::pair<int, double>> idx;
    for (Eigen::Index i = 0; i < p.size(); ++i) idx.emplace_back(p.task[static_cast<std::size_t>(i)], p.time[i]);
    out.index_map.push_back(std::move(idx));
  }
  return out;
}

std::vector<GramMatrix> gram_grad(const Theta& theta, const Dataset& data) {
  theta.validate();
  const int k = theta.k();
  if (data.tasks() > k) throw std::invalid_argument("gram_grad: dataset has more tasks than theta");
  const Design d = Design::from_dataset(data);
  const Matrix M = theta.mixing();
  const Matrix C = M * M.transpose();

  std::vector<GramMatrix> out(static_cast<std::size_t>(packed_size(k)));
  for (const auto& p : d.patients) {
    const Matrix G = overlap_block(theta, p);
    std::vector<std::pair<int, double>> idx;
    for (Eigen::Index i = 0; i < p.size(); ++i) idx.emplace_back(p.task[static_cast<std::size_t>(i)], p.time[i]);
    const auto n = p.size();

    // dC_uv/dS_ab = -(delta_ua M_vb + delta_va M_ub)
    for (int a = 0; a < k; ++a) {
      for (int b = 0; b < k; ++b) {
        if (a == b) continue;
        Matrix dK = Matrix::Zero(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
          const int u = p.task[static_cast<std::size_t>(i)];
          for (Eigen::Index j = 0; j < n; ++j) {
            const int v = p.task[static_cast<std::size_t>(j)];
            const double dC = -((u == a ? M(v, b) : 0.0) + (v == a ? M(u, b) : 0.0));
            dK(i, j) = dC * G(i, j);
          }
        }
        auto& slot = out[static_cast<std::size_t>(weight_index(k, a, b))];
        slot.blocks.push_back(std::move(dK));
        slot.index_map.push_back(idx);
      }
    }

    for (int w = 0; w < k; ++w) {
      Matrix dK = Matrix::Zero(n, n);
      for (Eigen::Index i = 0; i < n; ++i) {
        const int u = p.task[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < n; ++j) {
          const int v = p.task[static_cast<std::size_t>(j)];
          const double a_u = theta.lengthscale(u);
          const double a_v = theta.lengthscale(v);
          double dlog = 0.0;
          if (u == w) {
            const auto sl = log_overlap_slope(a_u, a_v);
            dlog += sl.c0 + sl.c2 * p.tau2(i, j);
          }
          if (v == w) {
            const auto sl = log_overlap_slope(a_v, a_u);
            dlog += sl.c0 + sl.c2 * p.tau2(i, j);
          }
          dK(i, j) = C(u, v) * G(i, j) * dlog;
        }
      }
      auto& slot = out[static_cast<std::size_t>(k * (k - 1) + w)];
      slot.blocks.push_back(std::move(dK));
      slot.index_map.push_back(idx);
    }
  }
  return out;
}

Eigen::LLT<Matrix> factorize(Matrix& K) {
  Eigen::LLT<Matrix> llt(K);
  auto ok = [&]() { return llt.info() == Eigen::Success && llt.matrixLLT().diagonal().allFinite(); };
  if (ok()) return llt;
  const double jitter = 1e-8 * K.diagonal().mean();
  if (!std::isfinite(jitter)) throw NumericalError("factorize: non-finite covariance diagonal");
  K.diagonal().array() += jitter;
  llt.compute(K);
  if (!ok()) throw NumericalError("factorize: covariance block not positive definite after jitter");
  return llt;
}

}  // namespace structgp
