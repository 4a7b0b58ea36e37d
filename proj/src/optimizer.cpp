#include "structgp/optimizer.hpp"

#include "structgp/acyclicity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace structgp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double penalty(const Vector& x, const Vector& w) { return (w.array() * x.array().abs()).sum(); }

double evaluate_safely(const SmoothFunction& f, const Vector& x, Vector* grad) {
  try {
    const double v = f(x, grad);
    if (!std::isfinite(v) || (grad != nullptr && !grad->allFinite())) return kNaN;
    return v;
  } catch (const NumericalError&) {
    return kNaN;
  }
}

}  // namespace

void PgmConfig::validate() const {
  if (max_iters <= 0) throw std::invalid_argument("PgmConfig: max_iters must be positive");
  if (!(grad_tol > 0.0)) throw std::invalid_argument("PgmConfig: grad_tol must be positive");
  if (!(tol_scale > 0.0)) throw std::invalid_argument("PgmConfig: tol_scale must be positive");
  if (!(rel_tol >= 0.0)) throw std::invalid_argument("PgmConfig: rel_tol must be nonnegative");
  if (!(shrink > 0.0 && shrink < 1.0)) throw std::invalid_argument("PgmConfig: shrink must be in (0, 1)");
  if (!(initial_step > 0.0)) throw std::invalid_argument("PgmConfig: initial_step must be positive");
  if (max_shrinks <= 0) throw std::invalid_argument("PgmConfig: max_shrinks must be positive");
  if (!(growth >= 1.0)) throw std::invalid_argument("PgmConfig: growth must be >= 1");
}

double soft_threshold(double s, double threshold) {
  if (s > threshold) return s - threshold;
  if (s < -threshold) return s + threshold;
  return 0.0;
}

Matrix prox_l1(const Matrix& S, double threshold) {
  if (!(threshold >= 0.0)) throw std::invalid_argument("prox_l1: threshold must be nonnegative");
  Matrix out(S.rows(), S.cols());
  for (Eigen::Index v = 0; v < S.rows(); ++v) {
    for (Eigen::Index u = 0; u < S.cols(); ++u) {
      out(v, u) = u == v ? 0.0 : soft_threshold(S(v, u), threshold);
    }
  }
  return out;
}

PgmResult pgm_solve(const SmoothFunction& f, const Vector& l1_weights, double lambda, const Vector& x0,
                    const PgmConfig& cfg) {
  cfg.validate();
  if (!(lambda >= 0.0)) throw std::invalid_argument("pgm_solve: lambda must be nonnegative");
  if (l1_weights.size() != x0.size()) throw std::invalid_argument("pgm_solve: weight length mismatch");

  const auto n = x0.size();
  PgmResult res;
  res.x = x0;
  Vector grad_y(n);
  double f_y = evaluate_safely(f, res.x, &grad_y);
  ++res.evaluations;
  if (!std::isfinite(f_y)) throw NumericalError("pgm_solve: objective not finite at the initial point");
  res.objective = f_y + lambda * penalty(res.x, l1_weights);

  // y is the point the gradient step is taken from: the current iterate for
  // plain proximal gradient, an extrapolated point when accelerated.
  Vector y = res.x;
  Vector x_prev = res.x;
  Vector cand(n);
  double momentum = 1.0;
  const double stop_norm = cfg.grad_tol * cfg.tol_scale;
  double step = cfg.initial_step;

  for (int it = 0; it < cfg.max_iters; ++it) {
    bool accepted = false;
    bool saw_non_finite = false;
    double f_cand = kNaN;
    for (int shrinks = 0; shrinks <= cfg.max_shrinks; ++shrinks) {
      for (Eigen::Index i = 0; i < n; ++i) {
        const double z = y[i] - step * grad_y[i];
        cand[i] = l1_weights[i] != 0.0 ? soft_threshold(z, step * lambda * l1_weights[i]) : z;
      }
      f_cand = evaluate_safely(f, cand, nullptr);
      ++res.evaluations;
      if (std::isfinite(f_cand)) {
        const Vector d = cand - y;
        if (f_cand <= f_y + grad_y.dot(d) + d.squaredNorm() / (2.0 * step)) {
          accepted = true;
          break;
        }
      } else {
        saw_non_finite = true;
      }
      step *= cfg.shrink;
    }
    if (!accepted) {
      if (saw_non_finite && !std::isfinite(f_cand)) {
        throw NumericalError("pgm_solve: objective not finite after " + std::to_string(cfg.max_shrinks) +
                             " step reductions");
      }
      // Majorization fails only through round-off this close to a fixed point.
      res.converged = true;
      break;
    }

    const double mapping = (cand - y).lpNorm<Eigen::Infinity>() / step;
    const double composite = f_cand + lambda * penalty(cand, l1_weights);
    const bool improved = composite <= res.objective;
    const double decrease = improved ? res.objective - composite : 0.0;
    ++res.iterations;
    res.step = step;

    // Monotone variant: the iterate only moves when the composite value does
    // not increase; otherwise momentum restarts from the current iterate.
    Vector x_new = improved ? cand : res.x;
    if (improved) res.objective = composite;
    res.history.push_back(res.objective);

    const bool done = mapping < stop_norm ||
                      (cfg.rel_tol > 0.0 && improved &&
                       decrease <= cfg.rel_tol * std::max(1.0, std::abs(res.objective)));
    x_prev = res.x;
    res.x = std::move(x_new);
    if (done) {
      res.converged = true;
      break;
    }

    if (cfg.accelerated && improved) {
      const double next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
      y = res.x + ((momentum - 1.0) / next) * (res.x - x_prev);
      momentum = next;
    } else {
      y = res.x;
      momentum = 1.0;
    }
    f_y = evaluate_safely(f, y, &grad_y);
    ++res.evaluations;
    if (!std::isfinite(f_y)) {
      y = res.x;
      momentum = 1.0;
      f_y = evaluate_safely(f, y, &grad_y);
      ++res.evaluations;
      if (!std::isfinite(f_y)) throw NumericalError("pgm_solve: objective became non-finite at an accepted iterate");
    }
    step = std::min(step * cfg.growth, cfg.initial_step);
  }
  return res;
}

void AugLagConfig::validate() const {
  if (!(eps > 0.0)) throw std::invalid_argument("AugLagConfig: eps must be positive");
  if (!(rho_max >= 1.0)) throw std::invalid_argument("AugLagConfig: rho_max must be >= 1");
  if (!(rho_init >= 1.0)) throw std::invalid_argument("AugLagConfig: initial rho must be >= 1");
  if (!std::isfinite(alpha_init)) throw std::invalid_argument("AugLagConfig: alpha must be finite");
  if (max_outer <= 0) throw std::invalid_argument("AugLagConfig: max_outer must be positive");
  pgm.validate();
}

AugLagResult auglag_solve(const ThetaObjective& data_term, double lambda, const Theta& theta0,
                          const AugLagConfig& cfg) {
  cfg.validate();
  theta0.validate();
  const int k = theta0.k();
  const double sigma = theta0.sigma;
  const int n_weights = k * (k - 1);

  Vector l1_weights = Vector::Zero(packed_size(k));
  l1_weights.head(n_weights).setOnes();

  AugLagResult res;
  res.state.alpha = cfg.alpha_init;
  res.state.rho = cfg.rho_init;
  res.state.theta = theta0;
  res.state.g = acyclicity(theta0.S).h;

  for (int outer = 0; outer < cfg.max_outer; ++outer) {
    const double alpha = res.state.alpha;
    // The first decrease test compares against +inf so that a warm start that
    // is already acyclic (h = 0) does not force rho up to rho_max.
    const double g_before = outer == 0 ? std::numeric_limits<double>::infinity() : res.state.g;
    Theta candidate = res.state.theta;
    double g_after = res.state.g;

    while (res.state.rho < cfg.rho_max) {
      const double rho = res.state.rho;
      SmoothFunction smooth = [&](const Vector& x, Vector* grad) -> double {
        if (!x.allFinite()) return kNaN;
        const Theta th = unpack(x, k, sigma);
        const double data = data_term(th, grad);
        const auto acyc = acyclicity(th.S);
        if (grad != nullptr) {
          const double coef = alpha + rho * acyc.h;
          for (int v = 0; v < k; ++v) {
            for (int u = 0; u < k; ++u) {
              if (u != v) (*grad)[weight_index(k, v, u)] += coef * acyc.grad(v, u);
            }
          }
        }
        return data + alpha * acyc.h + 0.5 * rho * acyc.h * acyc.h;
      };
      PgmResult inner;
      try {
        inner = pgm_solve(smooth, l1_weights, lambda, pack(res.state.theta), cfg.pgm);
      } catch (const NumericalError& e) {
        throw NumericalError("auglag_solve: outer iteration " + std::to_string(outer + 1) + ", rho " +
                             std::to_string(rho) + ": " + e.what());
      }
      candidate = unpack(inner.x, k, sigma);
      g_after = acyclicity(candidate.S).h;
      res.pgm_iterations += inner.iterations;
      res.evaluations += inner.evaluations;

      AugLagStep step;
      step.outer = outer;
      step.alpha = alpha;
      step.rho = rho;
      step.g_before = g_before;
      step.g_after = g_after;
      step.accepted = g_after <= 0.25 * g_before;
      step.pgm_iterations = inner.iterations;
      res.trace.push_back(step);

      if (step.accepted) break;
      res.state.rho *= 10.0;
    }

    res.state.theta = candidate;
    res.state.g = g_after;
    res.state.alpha += res.state.rho * g_after;
    res.outer_iterations = outer + 1;
    if (g_after < cfg.eps || res.state.rho >= cfg.rho_max) break;
  }
  res.theta = res.state.theta;
  return res;
}

AugLagResult auglag_solve(const Likelihood& lik, double lambda, const Theta& theta0, const AugLagConfig& cfg) {
  AugLagConfig scaled = cfg;
  scaled.pgm.tol_scale = cfg.pgm.tol_scale * static_cast<double>(std::max<std::size_t>(1, lik.observations()));
  ThetaObjective data_term = [&lik](const Theta& theta, Vector* grad) {
    if (grad == nullptr) return lik.value(theta);
    auto r = lik.value_and_grad(theta);
    *grad = std::move(r.grad);
    return r.value;
  };
  return auglag_solve(data_term, lambda, theta0, scaled);
}

}  // namespace structgp
