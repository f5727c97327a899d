#pragma once

// Independent reference computations used only by the tests.

#include <cmath>
#include <complex>
#include <numbers>

#include "critfield/grid.hpp"

namespace critfield::oracle {

/// Direct O(n^4) DFT with the value convention (k = 0 coefficient = mean).
inline Spectrum direct_dft(const Field& f) {
  const Index n = f.rows();
  Spectrum out(n, n);
  const double w = 2.0 * std::numbers::pi / static_cast<double>(n);
  for (Index b = 0; b < n; ++b) {
    for (Index a = 0; a < n; ++a) {
      std::complex<double> acc = 0.0;
      for (Index j = 0; j < n; ++j) {
        for (Index i = 0; i < n; ++i) {
          acc += f(i, j) * std::polar(1.0, -w * static_cast<double>(a * i + b * j));
        }
      }
      out(a, b) = acc / static_cast<double>(n * n);
    }
  }
  return out;
}

/// Point variance of G_t * eta by summing every mode of the 2D spectrum.
inline double mode_sum_variance(const TorusGrid& grid, double t) {
  const Index n = grid.size();
  const double L = grid.side_length();
  double acc = 0.0;
  for (Index b = 0; b < n; ++b) {
    const Index kb = b < n / 2 ? b : b - n;
    for (Index a = 0; a < n; ++a) {
      const Index ka = a < n / 2 ? a : a - n;
      const double xi2 = std::pow(2.0 * std::numbers::pi / L, 2) * static_cast<double>(ka * ka + kb * kb);
      acc += std::exp(-xi2 * t);
    }
  }
  return acc / (L * L);
}

/// Scalar flow of du/dt = -a u^3 over time tau.
inline double cubic_flow(double u0, double a, double tau) { return u0 / std::sqrt(1.0 + 2.0 * a * u0 * u0 * tau); }

/// E[Z^p] for a standard normal.
inline double normal_moment(int p) {
  if (p % 2 == 1) return 0.0;
  double acc = 1.0;
  for (int k = p - 1; k > 0; k -= 2) acc *= k;
  return acc;
}

/// Allen-Cahn limit amplitude evaluated straight from the formula.
inline double ac_sigma(double lambda, double q) {
  return std::pow(1.0 + 3.0 * q * lambda * lambda / (2.0 * std::numbers::pi), -0.5);
}

}  // namespace critfield::oracle
