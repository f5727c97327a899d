#include <doctest.h>

#include <cmath>
#include <numbers>

#include "critfield/noise.hpp"

using namespace critfield;

TEST_CASE("white noise is reproducible per (seed, replica)") {
  TorusGrid g(2.0, 32);
  const auto a = sample_white_noise(g, 7, 3);
  const auto b = sample_white_noise(g, 7, 3);
  const auto c = sample_white_noise(g, 7, 4);
  const auto d = sample_white_noise(g, 8, 3);
  CHECK((a.eta.values == b.eta.values).all());
  CHECK((a.eta.values != c.eta.values).any());
  CHECK((a.eta.values != d.eta.values).any());
  CHECK(a.seed == 7);
  CHECK(a.replica_index == 3);
}

TEST_CASE("streams are independent of the noise stream") {
  auto e0 = replica_engine(1, 2, 0);
  auto e1 = replica_engine(1, 2, 1);
  auto e0b = replica_engine(1, 2, 0);
  CHECK(e0() != e1());
  e0b();
  CHECK(e0() == e0b());
}

TEST_CASE("cell noise has variance 1/h^2") {
  TorusGrid g(4.0, 256);
  const auto n = sample_white_noise(g, 11, 0);
  const double h2 = g.cell_area();
  const double mean = n.eta.values.mean();
  const double var = (n.eta.values - mean).square().mean();
  // 65536 samples: relative SE of the variance is sqrt(2/N) ~ 0.0055
  CHECK(std::abs(var * h2 - 1.0) < 0.03);
  CHECK(std::abs(mean) * std::sqrt(h2) < 0.02);
}

TEST_CASE("mollified noise has the resolved point variance") {
  TorusGrid g(4.0, 256);
  const double eps = 0.1;
  double acc = 0.0;
  const int R = 8;
  for (int r = 0; r < R; ++r) {
    const auto m = mollify(sample_white_noise(g, 5, r), eps);
    acc += m.values.square().mean();
  }
  const double expected = grid_point_variance(g, eps * eps);
  CHECK(std::abs(acc / R / expected - 1.0) < 0.05);
  CHECK(std::abs(expected * 4 * std::numbers::pi * eps * eps - 1.0) < 0.01);
}

TEST_CASE("mollify validates eps") {
  TorusGrid g(1.0, 16);
  const auto n = sample_white_noise(g, 1, 0);
  CHECK_THROWS_AS(mollify(n, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(mollify(n, 1.0), std::invalid_argument);
}
