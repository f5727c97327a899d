#pragma once

#include <cmath>
#include <functional>
#include <iosfwd>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "critfield/grid.hpp"
#include "critfield/quadrature.hpp"
#include "critfield/reaction.hpp"

namespace critfield {

/// Exponential time variable: t(q) = eps^{2-q} - eps^2, q(t) = 2 + log(t + eps^2) / log(1/eps).
class TimeMap {
 public:
  explicit TimeMap(double eps);

  double eps() const { return eps_; }
  double log_inv_eps() const { return log_inv_eps_; }
  double time_at(double q) const;
  double q_at(double t) const;

 private:
  double eps_;
  double log_inv_eps_;
};

/// Amplitude sigma sampled on a q-mesh. `eps` is empty for the eps -> 0 limit.
class SigmaPath {
 public:
  SigmaPath(std::optional<double> eps, double mass, std::string reaction, VarianceMode mode,
            std::vector<double> q, std::vector<double> sigma, std::optional<TorusGrid> grid = std::nullopt);

  const std::optional<double>& eps() const { return eps_; }
  double mass() const { return mass_; }
  const std::string& reaction_name() const { return reaction_; }
  VarianceMode variance_mode() const { return mode_; }
  const std::vector<double>& q() const { return q_; }
  const std::vector<double>& sigma() const { return sigma_; }
  double q_max() const { return q_.back(); }
  /// Grid whose point variance drove the solve (grid mode only).
  const std::optional<TorusGrid>& grid() const { return grid_; }

  /// Monotone cubic interpolation on the q-mesh.
  double at_q(double q) const;

 private:
  std::optional<double> eps_;
  double mass_;
  std::string reaction_;
  VarianceMode mode_;
  std::vector<double> q_;
  std::vector<double> sigma_;
  std::optional<TorusGrid> grid_;
  std::function<double(double)> interpolant_;
};

/// Uniform mesh q_k = k * dq on [0, q_max], with a shorter final step when
/// q_max is not a multiple of dq.
std::vector<double> uniform_q_mesh(double q_max, double dq);

/// Upper bound for sigma on [0, q_max]: exp(L1 * max(3, q_max)).
double sigma_upper_bound(const Reaction& r, double q_max);

/// Integrates d sigma/dq = -E[F'(t+eps^2, sigma e^{m t(q)} W)] sigma, with
/// W ~ N(0, (t+eps^2) Var(G_{t+eps^2} * eta)), by classical RK4 on
/// [0, q(T)]. Throws std::domain_error if sigma leaves (0, bound].
SigmaPath solve_sigma_eps(const Reaction& r, double eps, double mass, double T, double dq, VarianceMode mode,
                          const QuadratureRule& rule, const std::optional<TorusGrid>& grid = std::nullopt);

/// d sigma/dq = -E[F'(sigma W)] sigma with W ~ N(0, 1/(4 pi)); needs a
/// self-similar reaction.
SigmaPath solve_sigma_limit(const Reaction& r, double q_max, double dq, const QuadratureRule& rule);

double sigma_at_time(const SigmaPath& path, double t);

/// v_eps(t) = sigma(t) e^{mt} G_t * eta_eps.
RealField mkv_field(const SigmaPath& path, double t, const RealField& eta_eps, double mass);

/// Allen-Cahn limit amplitude (1 + 3 q lambda^2 / (2 pi))^{-1/2}.
template <typename Scalar>
Scalar allen_cahn_sigma_closed(Scalar lambda, Scalar q) {
  return Scalar(1) / std::sqrt(Scalar(1) + Scalar(3) * q * lambda * lambda / (Scalar(2) * std::numbers::pi_v<Scalar>));
}

/// Columns q, t, sigma. For the limit path t is left empty.
void write_path_csv(std::ostream& out, const SigmaPath& path);

}  // namespace critfield
