#include "doctest.h"
#include "support.hpp"

#include "structgp/acyclicity.hpp"
#include "structgp/optimizer.hpp"

using namespace structgp;

namespace {

SmoothFunction quadratic(double target) {
  return [target](const Vector& x, Vector* g) {
    if (g != nullptr) *g = (x.array() - target).matrix();
    return 0.5 * (x.array() - target).square().sum();
  };
}

}  // namespace

TEST_CASE("soft threshold branches") {
  CHECK(soft_threshold(2.0, 0.5) == 1.5);
  CHECK(soft_threshold(0.3, 0.5) == 0.0);
  CHECK(soft_threshold(-1.0, 0.25) == -0.75);
  CHECK(soft_threshold(-0.5, 0.5) == 0.0);
}

TEST_CASE("prox_l1 acts on the off-diagonal only") {
  Matrix S(2, 2);
  S << 0.0, 2.0, -1.0, 0.0;
  const Matrix P = prox_l1(S, 0.25);
  CHECK(P(0, 1) == 1.75);
  CHECK(P(1, 0) == -0.75);
  CHECK(P.diagonal().isZero(0.0));
  CHECK_THROWS_AS(prox_l1(S, -0.1), std::invalid_argument);
}

TEST_CASE("prox_l1 is nonexpansive") {
  Rng rng(2);
  std::uniform_real_distribution<double> d(-3.0, 3.0), t(0.0, 1.0);
  for (int rep = 0; rep < 200; ++rep) {
    Matrix a = Matrix::NullaryExpr(4, 4, [&]() { return d(rng); });
    Matrix b = Matrix::NullaryExpr(4, 4, [&]() { return d(rng); });
    a.diagonal().setZero();
    b.diagonal().setZero();
    const double th = t(rng);
    const Matrix diff = prox_l1(a, th) - prox_l1(b, th);
    CHECK((diff.cwiseAbs().array() <= (a - b).cwiseAbs().array() + 1e-15).all());
  }
}

TEST_CASE("pgm on scalar quadratics") {
  PgmConfig cfg;
  cfg.grad_tol = 1e-9;
  cfg.max_iters = 2000;
  const Vector w = Vector::Ones(1);
  const Vector x0 = Vector::Constant(1, 5.0);
  CHECK(pgm_solve(quadratic(1.0), w, 0.0, x0, cfg).x[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(pgm_solve(quadratic(1.0), w, 2.0, x0, cfg).x[0]) < 1e-6);

  Rng rng(5);
  std::uniform_real_distribution<double> lam(0.0, 3.0), tgt(-4.0, 4.0);
  for (bool accelerated : {true, false}) {
    cfg.accelerated = accelerated;
    for (int rep = 0; rep < 50; ++rep) {
      const double l = lam(rng), c = tgt(rng);
      const auto res = pgm_solve(quadratic(c), w, l, x0, cfg);
      CHECK(res.x[0] == doctest::Approx(soft_threshold(c, l)).epsilon(1e-6).scale(1.0));
      CHECK(res.converged);
    }
  }
}

TEST_CASE("pgm composite value never increases and unweighted coordinates are not shrunk") {
  // Ill-conditioned convex quadratic in 3 variables; only the first two are penalized.
  Matrix A(3, 3);
  A << 10, 2, 0, 2, 1, 0.5, 0, 0.5, 3;
  Vector b(3);
  b << 1, -2, 0.5;
  SmoothFunction f = [&](const Vector& x, Vector* g) {
    if (g != nullptr) *g = A * x - b;
    return 0.5 * x.dot(A * x) - b.dot(x);
  };
  Vector w(3);
  w << 1, 1, 0;
  PgmConfig cfg;
  cfg.max_iters = 300;
  const auto res = pgm_solve(f, w, 0.3, Vector::Zero(3), cfg);
  for (std::size_t i = 1; i < res.history.size(); ++i) CHECK(res.history[i] <= res.history[i - 1]);
  Vector g = A * res.x - b;
  // Stationarity of the unpenalized coordinate.
  CHECK(std::abs(g[2]) < 1e-4);
}

TEST_CASE("pgm rejects non-finite starting values and recovers from non-finite steps") {
  PgmConfig cfg;
  SmoothFunction nan_start = [](const Vector&, Vector* g) {
    if (g != nullptr) g->setZero(1);
    return std::nan("");
  };
  CHECK_THROWS_AS(pgm_solve(nan_start, Vector::Ones(1), 0.0, Vector::Zero(1), cfg), NumericalError);

  // log barrier: steps past x = 0 are non-finite and must be shrunk away.
  SmoothFunction barrier = [](const Vector& x, Vector* g) {
    if (x[0] <= 0.0) throw NumericalError("outside domain");
    if (g != nullptr) (*g) = Vector::Constant(1, 1.0 - 1.0 / x[0]);
    return x[0] - std::log(x[0]);
  };
  cfg.grad_tol = 1e-8;
  cfg.initial_step = 100.0;
  const auto res = pgm_solve(barrier, Vector::Zero(1), 0.0, Vector::Constant(1, 3.0), cfg);
  CHECK(res.x[0] == doctest::Approx(1.0).epsilon(1e-6));

  SmoothFunction always_bad = [](const Vector& x, Vector* g) {
    if (x[0] != 2.0) return std::nan("");
    if (g != nullptr) *g = Vector::Constant(1, 1.0);
    return 0.0;
  };
  CHECK_THROWS_AS(pgm_solve(always_bad, Vector::Zero(1), 0.0, Vector::Constant(1, 2.0), cfg), NumericalError);
}

TEST_CASE("config validation") {
  PgmConfig p;
  p.shrink = 1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  AugLagConfig a;
  a.rho_max = 0.5;
  CHECK_THROWS_AS(a.validate(), std::invalid_argument);
  a = AugLagConfig{};
  a.eps = 0.0;
  CHECK_THROWS_AS(a.validate(), std::invalid_argument);
}

namespace {

// 0.5 ||S - target||^2 + 0.5 ||ell||^2 in pack() order.
ThetaObjective pull_towards(const Theta& target) {
  const Vector t = pack(target);
  return [t](const Theta& th, Vector* g) {
    const Vector x = pack(th);
    if (g != nullptr) *g = x - t;
    return 0.5 * (x - t).squaredNorm();
  };
}

}  // namespace

TEST_CASE("auglag returns after one outer iteration from an acyclic stationary start") {
  const Theta start = support::toy_theta();
  const auto res = auglag_solve(pull_towards(start), 0.0, start, AugLagConfig{});
  CHECK(res.outer_iterations == 1);
  CHECK(res.trace.size() == 1);
  CHECK(res.state.rho == 1.0);
  CHECK(res.theta.S.isApprox(start.S, 1e-12));
}

TEST_CASE("auglag breaks a two-node cycle") {
  Matrix S(2, 2);
  S << 0, 1.0, 0.8, 0;
  const Theta target(S, Vector::Zero(2), 0.01);
  AugLagConfig cfg;
  const auto res = auglag_solve(pull_towards(target), 0.01, target, cfg);
  CHECK(acyclicity(res.theta.S).h < cfg.eps);

  // Schedule: rho grows by exactly 10 after each failed decrease test and
  // alpha is updated once per outer iteration with the final rho.
  double prev_rho = 0.0;
  int prev_outer = -1;
  for (std::size_t i = 0; i < res.trace.size(); ++i) {
    const auto& step = res.trace[i];
    if (step.outer == prev_outer) {
      CHECK_FALSE(res.trace[i - 1].accepted);
      CHECK(step.rho == doctest::Approx(10.0 * prev_rho));
    }
    prev_rho = step.rho;
    prev_outer = step.outer;
  }
  double alpha = 0.0;
  for (std::size_t i = 0; i < res.trace.size(); ++i) {
    const bool last_of_outer = i + 1 == res.trace.size() || res.trace[i + 1].outer != res.trace[i].outer;
    if (!last_of_outer) continue;
    CHECK(res.trace[i].alpha == doctest::Approx(alpha));
    CHECK(res.trace[i].g_after > 0.0);
    const double next = alpha + res.trace[i].rho * res.trace[i].g_after;
    CHECK(next >= alpha);
    alpha = next;
  }
  CHECK(res.state.alpha == doctest::Approx(alpha));
}

TEST_CASE("auglag stops at rho_max") {
  Matrix S(2, 2);
  S << 0, 1.5, 1.5, 0;
  const Theta target(S, Vector::Zero(2), 0.01);
  AugLagConfig cfg;
  cfg.eps = 1e-14;
  cfg.rho_max = 100.0;
  const auto res = auglag_solve(pull_towards(target), 0.0, target, cfg);
  CHECK(res.state.rho >= cfg.rho_max);
}

TEST_CASE("inner failures carry the outer iteration") {
  ThetaObjective bad = [](const Theta&, Vector*) -> double { throw NumericalError("boom"); };
  try {
    auglag_solve(bad, 0.0, Theta::zeros(2), AugLagConfig{});
    FAIL("expected an exception");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("outer iteration 1") != std::string::npos);
  }
}
