#include "doctest.h"
#include "support.hpp"

#include "structgp/acyclicity.hpp"
#include "structgp/simulator.hpp"

using namespace structgp;

TEST_CASE("er dag edge cases") {
  Rng rng(1);
  for (int i = 0; i < 20; ++i) CHECK(sample_er_dag(6, 0.0, rng).edge_count() == 0);
  for (int i = 0; i < 20; ++i) CHECK(sample_er_dag(2, 1.0, rng).edge_count() == 1);
  CHECK(sample_er_dag(5, 4.0, rng).edge_count() == 10);
  CHECK_THROWS_AS(sample_er_dag(4, 3.5, rng), std::invalid_argument);
  CHECK_THROWS_AS(sample_er_dag(4, -1.0, rng), std::invalid_argument);
  CHECK_THROWS_AS(sample_er_dag(0, 0.0, rng), std::invalid_argument);
}

TEST_CASE("er dag edge count follows the binomial law and is always acyclic") {
  Rng rng(2);
  const int draws = 10000;
  const double p = 2.0 / 9.0;
  double total = 0.0;
  int both_directions = 0;
  for (int i = 0; i < draws; ++i) {
    const Dag g = sample_er_dag(10, 2.0, rng);
    REQUIRE(is_dag(g));
    total += g.edge_count();
    if (g.has_edge(0, 1)) ++both_directions;
    if (g.has_edge(1, 0)) --both_directions;
  }
  const double mean = total / draws;
  const double sd_of_mean = std::sqrt(45.0 * p * (1.0 - p) / draws);
  CHECK(std::abs(mean - 10.0) < 3.0 * sd_of_mean);
  // Orientation is uniform: 0->1 and 1->0 are equally likely.
  CHECK(std::abs(both_directions) < 3.0 * std::sqrt(draws * p));
}

TEST_CASE("theta sampling ranges") {
  Rng rng(3);
  CHECK(sample_theta(Dag(5), rng).S.isZero(0.0));
  Dag full(20);
  for (int v = 0; v < 20; ++v) {
    for (int u = 0; u < v; ++u) full.set_edge(u, v);
  }
  int count = 0, positive = 0;
  while (count < 100000) {
    const Theta th = sample_theta(full, rng);
    CHECK(th.sigma == 0.01);
    CHECK((th.ell.array().abs() <= 0.5).all());
    for (const auto& [from, to] : full.edges()) {
      const double w = th.S(to, from);
      if (std::abs(w) < 0.5 || std::abs(w) > 2.0) FAIL("weight out of range: " << w);
      positive += w > 0.0;
      ++count;
    }
  }
  CHECK(std::abs(positive / static_cast<double>(count) - 0.5) < 3.0 * 0.5 / std::sqrt(count));
}

TEST_CASE("dataset shape") {
  Rng rng(4);
  const Theta th = sample_theta(sample_er_dag(4, 2.0, rng), rng);
  const Dataset d = sample_dataset(th, 50, 10, rng);
  CHECK(d.size() == 2000);
  CHECK(d.patients() == 50);
  CHECK(d.tasks() == 4);
  for (const auto& o : d.observations()) {
    CHECK(o.time >= 0.0);
    CHECK(o.time <= 10.0);
  }
}

TEST_CASE("marginal variance and patient independence") {
  Rng rng(5);
  const Theta th = support::random_theta(1, rng, 0.0, 1.0, 0.01);
  const double var = cross_cov(th, 0, 0, 0.0) + th.sigma * th.sigma;
  double s2 = 0.0, s_ab = 0.0, s_a = 0.0, s_b = 0.0, s_aa = 0.0, s_bb = 0.0;
  const int n = 10000;
  for (int seed = 0; seed < n; ++seed) {
    Rng r = replicate_rng(7, 0, static_cast<std::uint64_t>(seed));
    const double y = sample_dataset(th, 1, 1, r).observations()[0].value;
    s2 += y * y;
    const Dataset two = sample_dataset(th, 2, 1, r);
    const double a = two.observations()[0].value, b = two.observations()[1].value;
    s_a += a;
    s_b += b;
    s_ab += a * b;
    s_aa += a * a;
    s_bb += b * b;
  }
  CHECK(std::abs(s2 / n / var - 1.0) < 0.05);
  const double cov = s_ab / n - (s_a / n) * (s_b / n);
  const double rho = cov / std::sqrt((s_aa / n - s_a * s_a / n / n) * (s_bb / n - s_b * s_b / n / n));
  CHECK(std::abs(rho) < 0.05);
}

TEST_CASE("replicate generators are reproducible and distinct") {
  Rng a = replicate_rng(1, 2, 3), b = replicate_rng(1, 2, 3), c = replicate_rng(1, 2, 4), d = replicate_rng(1, 3, 3);
  const auto x = a();
  CHECK(x == b());
  CHECK(x != c());
  CHECK(x != d());
}
