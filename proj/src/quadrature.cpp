#include "critfield/quadrature.hpp"

#include <numbers>
#include <stdexcept>
#include <string>

namespace critfield {

double expect_F_prime(const Reaction& r, double t, double scale, double variance, const QuadratureRule& rule) {
  if (!(variance > 0.0)) throw std::invalid_argument("expect_F_prime needs a positive variance");
  if (!(t > 0.0)) throw std::invalid_argument("expect_F_prime needs t > 0");
  const double sd = std::sqrt(variance);
  const auto& x = rule.nodes();
  const auto& w = rule.weights();
  double acc = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    const double value = r.F_prime(t, scale * sd * x(i));
    if (!std::isfinite(value)) {
      throw std::domain_error("F' is not finite at quadrature node " + std::to_string(i) +
                              " (w = " + std::to_string(scale * sd * x(i)) + ")");
    }
    acc += w(i) * value;
  }
  return acc;
}

double variance_for_sigma_ode(VarianceMode mode, const std::optional<TorusGrid>& grid, double t_eff) {
  if (!(t_eff > 0.0)) throw std::invalid_argument("variance_for_sigma_ode needs t_eff > 0");
  if (mode == VarianceMode::continuum) return 1.0 / (4.0 * std::numbers::pi * t_eff);
  if (!grid) throw std::invalid_argument("grid variance mode needs a grid");
  return grid_point_variance(*grid, t_eff);
}

}  // namespace critfield
