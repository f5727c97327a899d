#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "critfield/reaction.hpp"

using namespace critfield;

namespace {

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> out(n);
  for (int k = 0; k < n; ++k) out[k] = a + (b - a) * k / (n - 1);
  return out;
}

// Composite Simpson for int_0^w h(p) dp.
template <typename Fn>
double simpson(Fn h, double w, int panels = 2000) {
  const double dx = w / panels;
  double acc = h(0.0) + h(w);
  for (int k = 1; k < panels; ++k) acc += (k % 2 ? 4.0 : 2.0) * h(k * dx);
  return acc * dx / 3.0;
}

}  // namespace

TEST_CASE("Allen-Cahn class constants") {
  const auto r = allen_cahn(1.5);
  const auto& c = r.constants();
  CHECK(r.name() == "allen-cahn");
  CHECK(c.L1 == 0.0);
  CHECK(c.gamma1 == 2.0);
  CHECK(c.gamma2 == 1.0);
  CHECK(c.ell1 == doctest::Approx(3 * 2.25));
  CHECK(c.ell2 == doctest::Approx(6 * 2.25));
  CHECK(r.in_restricted_class());
  REQUIRE(r.cubic_coefficient());
  CHECK(*r.cubic_coefficient() == doctest::Approx(2.25));
  CHECK(r.F(0.3, 2.0) == doctest::Approx(18.0));
  CHECK(r.F_prime(0.3, 2.0) == doctest::Approx(27.0));
}

TEST_CASE("self-similar rescaling f(t,u) = t^{-3/2} F(sqrt t u)") {
  const auto r = allen_cahn(1.0);
  // for the cubic, f(t,u) = u^3 for every t
  for (double t : {0.01, 0.5, 3.0}) {
    CHECK(eval_f(r, t, 1.7) == doctest::Approx(1.7 * 1.7 * 1.7));
    CHECK(eval_f_prime(r, t, 1.7) == doctest::Approx(3 * 1.7 * 1.7));
  }
  const auto lin = linear(2.0);
  CHECK(eval_f(lin, 0.25, 1.0) == doctest::Approx(2.0 / 0.25));
  CHECK_THROWS_AS(eval_f(r, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(eval_f_prime(r, -1.0, 1.0), std::invalid_argument);
}

TEST_CASE("odd polynomial split and validation") {
  const auto r = odd_poly({-0.5, 1.0, 0.25});
  CHECK(r.has_lipschitz_part());
  CHECK(r.has_monotone_part());
  CHECK(r.constants().L1 == 0.5);
  CHECK(r.constants().gamma1 == 4.0);
  CHECK(r.constants().gamma2 == 3.0);
  CHECK_FALSE(r.in_restricted_class());
  const double w = 1.3;
  CHECK(r.F(0.0, w) == doctest::Approx(-0.5 * w + w * w * w + 0.25 * std::pow(w, 5)));
  CHECK(r.F_prime(0.0, w) == doctest::Approx(-0.5 + 3 * w * w + 1.25 * std::pow(w, 4)));
  CHECK_THROWS_AS(odd_poly({0.0, -1.0}), std::invalid_argument);
  CHECK_THROWS_AS(odd_poly({}), std::invalid_argument);
  CHECK_THROWS_AS(allen_cahn(0.0), std::invalid_argument);
}

TEST_CASE("class verification accepts members and flags violations") {
  const auto ts = linspace(0.1, 2.0, 4);
  const auto ws = linspace(-5.0, 5.0, 401);
  for (const auto& r : {allen_cahn(1.0), allen_cahn(2.0), odd_poly({0.7, 0.3, 0.1}), linear(-1.2), zero_reaction()}) {
    const auto rep = verify_class(r, ts, ws);
    CHECK_MESSAGE(rep.passed, r.name() << "\n" << rep.summary());
  }
  // understated constants must be caught
  ClassConstants tight = allen_cahn(1.0).constants();
  tight.ell1 = 0.5;
  const auto bad = verify_class(allen_cahn(1.0).with_constants(tight), ts, ws);
  CHECK_FALSE(bad.passed);
  CHECK(bad.value_lipschitz.amount > 0);

  // an even function is not odd
  Reaction::Part even{[](double, double w) { return w * w; }, [](double, double w) { return 2 * w; }};
  ClassConstants c;
  c.L1 = 100;
  c.L2 = 100;
  const auto rep = verify_class(Reaction("even", even, std::nullopt, c, true), ts, linspace(-1, 1, 21));
  CHECK(rep.oddness.amount > 0);
}

TEST_CASE("cutoff equals the frozen-derivative integral") {
  const auto r = odd_poly({0.2, 1.0, 0.5});
  const double g = 1.5;
  const auto rc = cutoff(r, g);
  const auto& m = *r.monotone_part();
  CHECK_FALSE(rc.has_monotone_part());
  for (double w : {-3.0, -1.6, -0.4, 0.0, 0.9, 1.5, 2.2, 4.0}) {
    const double a = std::abs(w);
    const double inner = simpson([&](double p) { return m.derivative(0.0, p); }, std::min(a, g));
    const double F2 = std::copysign(inner + std::max(a - g, 0.0) * m.derivative(0.0, g), w);
    CHECK(rc.F(0.0, w) == doctest::Approx(0.2 * w + F2).epsilon(1e-10));
    if (std::abs(w) <= g) {
      CHECK(rc.F(0.0, w) == doctest::Approx(r.F(0.0, w)));
    }
  }
  const auto& c = r.constants();
  CHECK(rc.constants().L1 == doctest::Approx(0.2 + c.ell1 * (1 + std::pow(g, c.gamma1))));
  CHECK(rc.constants().L2 == doctest::Approx(c.ell2 * (1 + std::pow(g, c.gamma2))));
  const auto rep = verify_class(rc, linspace(0.5, 1.0, 2), linspace(-6, 6, 601));
  CHECK_MESSAGE(rep.passed, rep.summary());
}
