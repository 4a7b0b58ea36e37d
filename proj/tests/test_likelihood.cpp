#include "doctest.h"
#include "support.hpp"

#include "structgp/likelihood.hpp"

using namespace structgp;

TEST_CASE("single observation at zero") {
  // ell = log(2 / pi) makes the prior variance sqrt(pi a / 2) exactly 1.
  Vector ell(1);
  ell << std::log(2.0 / support::kPi);
  const double sigma = 0.3;
  const Theta th(Matrix::Zero(1, 1), ell, sigma);
  const Dataset d({{0, 0, 1.0, 0.0}});
  const double expected = 0.5 * std::log(1.0 + sigma * sigma) + 0.5 * std::log(2.0 * support::kPi);
  CHECK(nmll(th, d) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("blockwise value matches the dense full-matrix oracle") {
  Rng rng(31);
  for (int rep = 0; rep < 20; ++rep) {
    const int k = 1 + rep % 4;
    const int r = 1 + rep % 3;
    const Theta th = support::random_theta(k, rng, 0.6, 1.5, 0.1);
    const Dataset d = support::random_dataset(k, r, 1 + (30 / (k * r)) / 2, rng);
    const double a = nmll(th, d);
    const double b = support::dense_nmll(th, d);
    CHECK(std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)));
  }
}

TEST_CASE("value is invariant to observation order within a patient") {
  Rng rng(2);
  const Theta th = support::random_theta(3, rng);
  const Dataset d = support::random_dataset(3, 2, 3, rng);
  auto obs = d.observations();
  std::reverse(obs.begin(), obs.end());
  CHECK(nmll(th, Dataset(obs, 3)) == doctest::Approx(nmll(th, d)).epsilon(1e-12));
}

TEST_CASE("gradient matches central finite differences") {
  Rng rng(77);
  for (int rep = 0; rep < 10; ++rep) {
    const int k = 2 + rep % 3;
    const Theta th = support::random_theta(k, rng, 0.6, 1.5, 0.1);
    const Dataset d = support::random_dataset(k, 2, 3, rng);
    const Likelihood lik(d);
    const Vector g = lik.value_and_grad(th).grad;
    const Vector fd = support::central_difference(
        [&](const Vector& x) { return lik.value(unpack(x, k, th.sigma)); }, pack(th), 1e-5);
    CHECK(support::relative_error(g, fd) < 1e-5);
    CHECK(nmll_grad(th, d).isApprox(g, 0.0));
  }
}

TEST_CASE("weight gradient is zero for tasks that are never observed") {
  Rng rng(9);
  const Theta th = support::random_theta(4, rng, 0.0);
  std::vector<Observation> obs;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 3; ++j) {
      obs.push_back({i, 0, 1.0 * j, 0.3 * j - 0.2});
      obs.push_back({i, 1, 0.5 + j, 0.1 * j});
    }
  }
  const Dataset d(obs, 4);
  const Matrix G = Likelihood(d).weight_gradient(th);
  CHECK(G(3, 2) == 0.0);
  CHECK(G(2, 3) == 0.0);
}

TEST_CASE("aic counts nonzero weights") {
  Rng rng(12);
  const Dataset d = support::random_dataset(3, 2, 3, rng);
  const Theta empty = Theta::zeros(3);
  CHECK(aic(empty, d) == doctest::Approx(2.0 * nmll(empty, d)));
  Matrix S = Matrix::Zero(3, 3);
  S(2, 0) = 0.4;
  const Theta one(S, Vector::Zero(3), 0.01);
  CHECK(aic(one, d) == doctest::Approx(2.0 + 2.0 * nmll(one, d)));
  CHECK(weight_count(S) == 1);
}

TEST_CASE("evaluation is deterministic") {
  Rng rng(3);
  const Theta th = support::random_theta(4, rng);
  const Dataset d = support::random_dataset(4, 3, 4, rng);
  const Likelihood lik(d);
  const auto a = lik.value_and_grad(th);
  const auto b = lik.value_and_grad(th);
  CHECK(a.value == b.value);
  CHECK((a.grad.array() == b.grad.array()).all());
}

TEST_CASE("task count mismatch is rejected") {
  Rng rng(1);
  const Dataset d = support::random_dataset(3, 1, 2, rng);
  CHECK_THROWS_AS(nmll(Theta::zeros(4), d), std::invalid_argument);
}

TEST_CASE("results do not depend on earlier, larger evaluations on the thread") {
  Rng rng(31);
  const Theta th = support::random_theta(3, rng, 0.5, 1.0, 0.1);
  const Dataset small = support::random_dataset(3, 2, 5, rng);
  const Dataset large = support::random_dataset(3, 2, 40, rng);
  const Likelihood a(small);
  const auto first = a.value_and_grad(th);
  (void)Likelihood(large).value_and_grad(th);
  const auto second = a.value_and_grad(th);
  CHECK(first.value == second.value);
  CHECK(first.grad == second.grad);
}
