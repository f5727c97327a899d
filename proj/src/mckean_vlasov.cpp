#include "critfield/mckean_vlasov.hpp"

#include <algorithm>
#include <memory>
#include <ostream>
#include <stdexcept>
#include <string>

#include <cmath>
using std::isnan;  // pchip.hpp uses unqualified isnan
#include <boost/math/interpolators/pchip.hpp>

namespace critfield {
namespace {

constexpr double kInvFourPi = 1.0 / (4.0 * std::numbers::pi);

// Classical RK4 on the given mesh; `check` validates each new state.
template <typename Rhs, typename Check>
std::vector<double> integrate_rk4(const std::vector<double>& mesh, double y0, Rhs&& rhs, Check&& check) {
  std::vector<double> y(mesh.size());
  y[0] = y0;
  for (std::size_t k = 0; k + 1 < mesh.size(); ++k) {
    const double q = mesh[k];
    const double h = mesh[k + 1] - q;
    const double yk = y[k];
    const double k1 = rhs(q, yk);
    const double k2 = rhs(q + 0.5 * h, yk + 0.5 * h * k1);
    const double k3 = rhs(q + 0.5 * h, yk + 0.5 * h * k2);
    const double k4 = rhs(q + h, yk + h * k3);
    y[k + 1] = yk + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    check(mesh[k + 1], y[k + 1]);
  }
  return y;
}

auto bound_checker(double bound) {
  return [bound](double q, double sigma) {
    if (!std::isfinite(sigma) || sigma <= 0.0 || sigma > bound) {
      throw std::domain_error("sigma left (0, " + std::to_string(bound) + "] at q = " + std::to_string(q) +
                              " (sigma = " + std::to_string(sigma) + ")");
    }
  };
}

}  // namespace

TimeMap::TimeMap(double eps) : eps_(eps), log_inv_eps_(-std::log(eps)) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in (0, 1)");
}

double TimeMap::time_at(double q) const { return eps_ * eps_ * std::expm1(q * log_inv_eps_); }

double TimeMap::q_at(double t) const { return std::log1p(t / (eps_ * eps_)) / log_inv_eps_; }

SigmaPath::SigmaPath(std::optional<double> eps, double mass, std::string reaction, VarianceMode mode,
                     std::vector<double> q, std::vector<double> sigma, std::optional<TorusGrid> grid)
    : eps_(eps),
      mass_(mass),
      reaction_(std::move(reaction)),
      mode_(mode),
      q_(std::move(q)),
      sigma_(std::move(sigma)),
      grid_(grid) {
  if (q_.empty() || q_.size() != sigma_.size()) throw std::invalid_argument("malformed sigma path");
  if (q_.size() >= 4) {
    auto spline = std::make_shared<boost::math::interpolators::pchip<std::vector<double>>>(
        std::vector<double>(q_), std::vector<double>(sigma_));
    interpolant_ = [spline](double x) { return (*spline)(x); };
  }
}

double SigmaPath::at_q(double q) const {
  const double slack = 1e-12 * std::max(1.0, q_max());
  if (q < -slack || q > q_max() + slack) {
    throw std::out_of_range("q = " + std::to_string(q) + " outside sigma path range [0, " + std::to_string(q_max()) + "]");
  }
  q = std::clamp(q, 0.0, q_max());
  const auto it = std::lower_bound(q_.begin(), q_.end(), q);
  if (it != q_.end() && *it == q) return sigma_[static_cast<std::size_t>(it - q_.begin())];
  if (interpolant_) return interpolant_(q);
  // fewer than four points: linear
  const auto k = static_cast<std::size_t>(it - q_.begin());
  const double s = (q - q_[k - 1]) / (q_[k] - q_[k - 1]);
  return (1.0 - s) * sigma_[k - 1] + s * sigma_[k];
}

std::vector<double> uniform_q_mesh(double q_max, double dq) {
  if (!(q_max >= 0.0)) throw std::invalid_argument("q_max must be non-negative");
  if (!(dq > 0.0)) throw std::invalid_argument("dq must be positive");
  std::vector<double> mesh{0.0};
  if (q_max == 0.0) return mesh;
  const double steps = q_max / dq;
  auto full = static_cast<std::size_t>(std::floor(steps));
  if (steps - static_cast<double>(full) > 1.0 - 1e-9) ++full;
  for (std::size_t k = 1; k <= full; ++k) mesh.push_back(std::min(static_cast<double>(k) * dq, q_max));
  if (q_max - mesh.back() > 1e-9 * dq) {
    mesh.push_back(q_max);
  } else {
    mesh.back() = q_max;
  }
  return mesh;
}

double sigma_upper_bound(const Reaction& r, double q_max) {
  return std::exp(r.constants().L1 * std::max(3.0, q_max)) * (1.0 + 1e-9);
}

SigmaPath solve_sigma_eps(const Reaction& r, double eps, double mass, double T, double dq, VarianceMode mode,
                          const QuadratureRule& rule, const std::optional<TorusGrid>& grid) {
  const TimeMap map(eps);
  if (!(T > 0.0)) throw std::invalid_argument("T must be positive");
  if (mode == VarianceMode::grid && !grid) throw std::invalid_argument("grid variance mode needs a grid");
  const auto mesh = uniform_q_mesh(map.q_at(T), dq);
  const double log_eps = std::log(eps);

  auto rhs = [&](double q, double sigma) {
    const double s = std::exp((2.0 - q) * log_eps);  // t + eps^2
    const double t = map.time_at(q);
    const double variance = mode == VarianceMode::continuum ? kInvFourPi : s * grid_point_variance(*grid, s);
    return -expect_F_prime(r, s, sigma * std::exp(mass * t), variance, rule) * sigma;
  };
  auto sigma = integrate_rk4(mesh, 1.0, rhs, bound_checker(sigma_upper_bound(r, mesh.back())));
  return SigmaPath(eps, mass, r.name(), mode, mesh, std::move(sigma),
                   mode == VarianceMode::grid ? grid : std::nullopt);
}

SigmaPath solve_sigma_limit(const Reaction& r, double q_max, double dq, const QuadratureRule& rule) {
  if (!r.self_similar()) throw std::invalid_argument("the limiting sigma ODE needs a self-similar reaction");
  const auto mesh = uniform_q_mesh(q_max, dq);
  auto rhs = [&](double, double sigma) { return -expect_F_prime(r, 1.0, sigma, kInvFourPi, rule) * sigma; };
  auto sigma = integrate_rk4(mesh, 1.0, rhs, bound_checker(sigma_upper_bound(r, mesh.back())));
  return SigmaPath(std::nullopt, 0.0, r.name(), VarianceMode::continuum, mesh, std::move(sigma));
}

double sigma_at_time(const SigmaPath& path, double t) {
  if (!path.eps()) throw std::invalid_argument("the limit path has no physical time axis");
  if (!(t >= 0.0)) throw std::out_of_range("sigma_at_time needs t >= 0");
  return path.at_q(TimeMap(*path.eps()).q_at(t));
}

RealField mkv_field(const SigmaPath& path, double t, const RealField& eta_eps, double mass) {
  if (path.grid() && !(*path.grid() == eta_eps.grid)) {
    throw std::invalid_argument("sigma path was solved for a different grid");
  }
  if (mass != path.mass()) throw std::invalid_argument("mass differs from the sigma path's mass");
  RealField out = apply_semigroup(eta_eps, t, mass);
  out.values *= sigma_at_time(path, t);
  return out;
}

void write_path_csv(std::ostream& out, const SigmaPath& path) {
  out << "q,t,sigma\n";
  out.precision(17);
  std::optional<TimeMap> map;
  if (path.eps()) map.emplace(*path.eps());
  for (std::size_t k = 0; k < path.q().size(); ++k) {
    out << path.q()[k] << ',';
    if (map) out << map->time_at(path.q()[k]);
    out << ',' << path.sigma()[k] << '\n';
  }
}

}  // namespace critfield
