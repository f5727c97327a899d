#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "critfield/field_io.hpp"
#include "critfield/grid.hpp"
#include "oracles.hpp"

using namespace critfield;

namespace {

RealField smooth_field(const TorusGrid& g) {
  Field v(g.size(), g.size());
  const double k = 2.0 * std::numbers::pi / g.side_length();
  for (Index j = 0; j < g.size(); ++j) {
    for (Index i = 0; i < g.size(); ++i) {
      const double x = i * g.spacing(), y = j * g.spacing();
      v(i, j) = 0.3 + std::cos(k * x) - 0.5 * std::sin(2 * k * y) + 0.25 * std::cos(k * (x + 3 * y));
    }
  }
  return RealField(g, v);
}

}  // namespace

TEST_CASE("grid rejects bad shapes") {
  CHECK_THROWS_AS(TorusGrid(0.0, 16), std::invalid_argument);
  CHECK_THROWS_AS(TorusGrid(1.0, 4), std::invalid_argument);
  TorusGrid g(1.0, 16);
  CHECK_THROWS_AS(RealField(g, Field::Zero(8, 8)), std::invalid_argument);
  Field bad = Field::Zero(16, 16);
  bad(3, 4) = std::nan("");
  CHECK_THROWS_AS(RealField(g, bad), std::invalid_argument);
}

TEST_CASE("forward transform matches a direct DFT") {
  TorusGrid g(2.5, 8);
  Field v(8, 8);
  for (Index j = 0; j < 8; ++j)
    for (Index i = 0; i < 8; ++i) v(i, j) = std::sin(1.7 * i + 0.3 * j * j) + 0.1 * i * j;
  const auto F = forward_transform(RealField(g, v));
  const Spectrum ref = oracle::direct_dft(v);
  CHECK((F.coefficients - ref).abs().maxCoeff() < 1e-12);

  const auto back = inverse_transform(F);
  CHECK((back.values - v).abs().maxCoeff() < 1e-12);
}

TEST_CASE("inverse transform rejects non-Hermitian spectra") {
  TorusGrid g(1.0, 8);
  SpectralField F{g, Spectrum::Zero(8, 8)};
  F.coefficients(1, 0) = {1.0, 0.0};
  CHECK_THROWS_AS(inverse_transform(F), std::invalid_argument);
}

TEST_CASE("semigroup acts on Fourier modes by exp((m - xi^2/2) t)") {
  TorusGrid g(3.0, 32);
  const double k = 2.0 * std::numbers::pi / 3.0;
  Field v(32, 32);
  for (Index j = 0; j < 32; ++j)
    for (Index i = 0; i < 32; ++i) v(i, j) = std::cos(k * i * g.spacing() + 2 * k * j * g.spacing());
  const double t = 0.07, m = 0.8;
  const auto out = apply_semigroup(RealField(g, v), t, m);
  const double factor = std::exp((m - 0.5 * 5 * k * k) * t);
  CHECK((out.values - factor * v).abs().maxCoeff() < 1e-13);

  // constants grow by e^{mt}
  const auto c = apply_semigroup(RealField::constant(g, 2.0), 1.3, 0.5);
  CHECK((c.values - 2.0 * std::exp(0.65)).abs().maxCoeff() < 1e-12);
}

TEST_CASE("semigroup is a semigroup") {
  TorusGrid g(2.0, 32);
  const auto f = smooth_field(g);
  const auto a = apply_semigroup(apply_semigroup(f, 0.01, 0.3), 0.02, 0.3);
  const auto b = apply_semigroup(f, 0.03, 0.3);
  CHECK((a.values - b.values).abs().maxCoeff() < 1e-13);
  CHECK(apply_semigroup(f, 0.0, 1.0).values.isApprox(f.values));
}

TEST_CASE("separable point variance equals the full mode sum") {
  for (double t : {1e-4, 0.0025, 0.05, 0.3}) {
    TorusGrid g(4.0, 64);
    const double ref = oracle::mode_sum_variance(g, t);
    CHECK(std::abs(grid_point_variance(g, t) - ref) <= 1e-12 * ref);
  }
  // resolved regime approaches the continuum 1/(4 pi t)
  TorusGrid fine(4.0, 512);
  const double t = 0.01;
  CHECK(std::abs(grid_point_variance(fine, t) * 4 * std::numbers::pi * t - 1.0) < 1e-6);
}

TEST_CASE("periodized kernel matches the analytic heat kernel when resolved") {
  TorusGrid g(6.0, 256);
  const double t = 0.05;
  const auto K = periodized_heat_kernel(g, t, 100, 30);
  CHECK(std::abs(K.values.sum() * g.cell_area() - 1.0) < 1e-12);
  double worst = 0.0;
  for (Index j = 0; j < g.size(); j += 7) {
    for (Index i = 0; i < g.size(); i += 5) {
      const double r = g.torus_distance(i, j, 100 * g.spacing(), 30 * g.spacing());
      worst = std::max(worst, std::abs(K.values(i, j) - heat_kernel(t, r)));
    }
  }
  CHECK(worst < 1e-6 * heat_kernel(t, 0.0));
}

TEST_CASE("translate shifts band-limited fields exactly") {
  TorusGrid g(2.0, 32);
  const double k = 2.0 * std::numbers::pi / 2.0;
  Field v(32, 32), w(32, 32);
  const double dx = 0.123, dy = -0.31;
  for (Index j = 0; j < 32; ++j) {
    for (Index i = 0; i < 32; ++i) {
      const double x = i * g.spacing(), y = j * g.spacing();
      v(i, j) = std::sin(k * x) * std::cos(3 * k * y);
      w(i, j) = std::sin(k * (x + dx)) * std::cos(3 * k * (y + dy));
    }
  }
  const auto s = translate(RealField(g, v), dx, dy);
  CHECK((s.values - w).abs().maxCoeff() < 1e-12);
}

TEST_CASE("torus distance wraps") {
  TorusGrid g(4.0, 16);
  CHECK(g.torus_distance(0, 0, 3.75, 0.0) == doctest::Approx(0.25));
  CHECK(g.torus_distance(1, 1, 0.25, 0.25) == doctest::Approx(0.0));
  CHECK(g.torus_distance(0, 0, 2.0, 2.0) == doctest::Approx(std::sqrt(8.0)));
}

TEST_CASE("raster roundtrip is lossless") {
  TorusGrid g(3.5, 16);
  const auto f = smooth_field(g);
  std::stringstream buf;
  write_raster(buf, f, 0.625);
  const std::string bytes = buf.str();
  REQUIRE(bytes.size() == 32 + 16 * 16 * 8);
  CHECK(bytes.substr(0, 8) == "CRITFLD1");
  const auto snap = read_raster(buf);
  CHECK(snap.time == 0.625);
  CHECK(snap.field.grid == g);
  CHECK((snap.field.values == f.values).all());

  std::stringstream garbage("NOTAFILE0000000000000000000000000000");
  CHECK_THROWS(read_raster(garbage));
}
