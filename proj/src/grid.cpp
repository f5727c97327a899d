#include "critfield/grid.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <fftw3.h>

namespace critfield {
namespace {

// r2c/c2r plans for an n x n array. FFTW sees Eigen's column-major (i, j)
// storage as a row-major [j][i] array, so the halved axis is i.
class Plan {
 public:
  explicit Plan(Index n) : n_(n) {
    const int ni = static_cast<int>(n);
    Field probe(n, n);
    Spectrum half(n / 2 + 1, n);
    auto* c = reinterpret_cast<fftw_complex*>(half.data());
    constexpr unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    forward_ = fftw_plan_dft_r2c_2d(ni, ni, probe.data(), c, flags);
    backward_ = fftw_plan_dft_c2r_2d(ni, ni, c, probe.data(), flags | FFTW_DESTROY_INPUT);
    if (forward_ == nullptr || backward_ == nullptr) {
      throw std::runtime_error("fftw planning failed for n = " + std::to_string(n));
    }
  }
  ~Plan() {
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
  }
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;

  // Unnormalized forward transform into the (n/2+1) x n half spectrum.
  void forward(const Field& in, Spectrum& half) const {
    half.resize(n_ / 2 + 1, n_);
    // r2c does not modify its input
    fftw_execute_dft_r2c(forward_, const_cast<double*>(in.data()),
                         reinterpret_cast<fftw_complex*>(half.data()));
  }

  // Unnormalized inverse; `half` is destroyed.
  void backward(Spectrum& half, Field& out) const {
    out.resize(n_, n_);
    fftw_execute_dft_c2r(backward_, reinterpret_cast<fftw_complex*>(half.data()), out.data());
  }

 private:
  Index n_;
  fftw_plan forward_;
  fftw_plan backward_;
};

const Plan& plan_for(Index n) {
  static std::mutex mutex;
  static std::map<Index, std::unique_ptr<Plan>> plans;
  std::lock_guard lock(mutex);
  auto& slot = plans[n];
  if (!slot) slot = std::make_unique<Plan>(n);
  return *slot;
}

// exp(-xi^2 t / 2) for each storage index along one axis.
Eigen::ArrayXd axis_decay(const TorusGrid& grid, Index count, double t) {
  Eigen::ArrayXd out(count);
  for (Index a = 0; a < count; ++a) {
    const double xi = grid.wavenumber(a);
    out(a) = std::exp(-0.5 * xi * xi * t);
  }
  return out;
}

void require_finite(const Field& values) {
  if (!values.allFinite()) throw std::invalid_argument("field contains non-finite values");
}

}  // namespace

TorusGrid::TorusGrid(double side_length, Index points_per_side)
    : side_length_(side_length), n_(points_per_side) {
  if (!(side_length > 0.0) || !std::isfinite(side_length)) {
    throw std::invalid_argument("torus side length must be positive");
  }
  if (points_per_side < 8) throw std::invalid_argument("torus needs at least 8 points per side");
}

double TorusGrid::wavenumber(Index idx) const {
  return 2.0 * std::numbers::pi * static_cast<double>(signed_mode(idx)) / side_length_;
}

double TorusGrid::torus_distance(Index i, Index j, double x, double y) const {
  auto wrap = [this](double d) {
    d = std::fmod(d, side_length_);
    if (d > 0.5 * side_length_) d -= side_length_;
    if (d < -0.5 * side_length_) d += side_length_;
    return d;
  };
  const double dx = wrap(static_cast<double>(i) * spacing() - x);
  const double dy = wrap(static_cast<double>(j) * spacing() - y);
  return std::hypot(dx, dy);
}

RealField::RealField(TorusGrid g, Field v) : grid(g), values(std::move(v)) {
  if (values.rows() != grid.size() || values.cols() != grid.size()) {
    throw std::invalid_argument("field shape does not match grid");
  }
  require_finite(values);
}

RealField RealField::zeros(const TorusGrid& g) { return RealField(g, Field::Zero(g.size(), g.size())); }

RealField RealField::constant(const TorusGrid& g, double c) {
  return RealField(g, Field::Constant(g.size(), g.size(), c));
}

SpectralField forward_transform(const RealField& f) {
  const Index n = f.size();
  Spectrum half;
  plan_for(n).forward(f.values, half);
  half /= static_cast<double>(n * n);

  Spectrum full(n, n);
  const Index nh = n / 2 + 1;
  for (Index b = 0; b < n; ++b) {
    for (Index a = 0; a < n; ++a) {
      if (a < nh) {
        full(a, b) = half(a, b);
      } else {
        full(a, b) = std::conj(half(n - a, (n - b) % n));
      }
    }
  }
  return {f.grid, std::move(full)};
}

RealField inverse_transform(const SpectralField& F, double symmetry_tol) {
  const Index n = F.grid.size();
  if (F.coefficients.rows() != n || F.coefficients.cols() != n) {
    throw std::invalid_argument("spectrum shape does not match grid");
  }
  const double scale = F.coefficients.abs().maxCoeff();
  double worst = 0.0;
  for (Index b = 0; b < n; ++b) {
    for (Index a = 0; a < n; ++a) {
      const auto mirror = F.coefficients((n - a) % n, (n - b) % n);
      worst = std::max(worst, std::abs(F.coefficients(a, b) - std::conj(mirror)));
    }
  }
  if (worst > symmetry_tol * std::max(scale, 1e-300)) {
    throw std::invalid_argument("spectrum is not Hermitian (deviation " + std::to_string(worst) + ")");
  }
  Spectrum half = F.coefficients.topRows(n / 2 + 1);
  Field out;
  plan_for(n).backward(half, out);
  return RealField(F.grid, std::move(out));
}

void apply_semigroup_inplace(Field& values, const TorusGrid& grid, double t, double mass) {
  if (!(t >= 0.0)) throw std::invalid_argument("semigroup time must be non-negative");
  if (t == 0.0) return;
  const Index n = grid.size();
  const Plan& plan = plan_for(n);
  thread_local Spectrum half;
  plan.forward(values, half);
  const Eigen::ArrayXd ex = axis_decay(grid, n / 2 + 1, t) * (std::exp(mass * t) / static_cast<double>(n * n));
  const Eigen::ArrayXd ey = axis_decay(grid, n, t);
  half.colwise() *= ex.cast<std::complex<double>>();
  half.rowwise() *= ey.cast<std::complex<double>>().transpose();
  plan.backward(half, values);
}

RealField apply_semigroup(const RealField& f, double t, double mass) {
  Field out = f.values;
  apply_semigroup_inplace(out, f.grid, t, mass);
  return RealField(f.grid, std::move(out));
}

double grid_point_variance(const TorusGrid& grid, double t_eff) {
  if (!(t_eff > 0.0)) throw std::invalid_argument("grid_point_variance needs t_eff > 0");
  // The multiplier factorizes over axes, so the mode sum is a squared 1D sum.
  const Eigen::ArrayXd decay = axis_decay(grid, grid.size(), 2.0 * t_eff);
  const double axis_sum = decay.sum();
  const double L = grid.side_length();
  return axis_sum * axis_sum / (L * L);
}

RealField periodized_heat_kernel(const TorusGrid& grid, double t, Index iz, Index jz) {
  Field delta = Field::Zero(grid.size(), grid.size());
  delta(iz, jz) = 1.0 / grid.cell_area();
  apply_semigroup_inplace(delta, grid, t, 0.0);
  return RealField(grid, std::move(delta));
}

RealField translate(const RealField& f, double dx, double dy) {
  const TorusGrid& grid = f.grid;
  const Index n = grid.size();
  Spectrum half;
  plan_for(n).forward(f.values, half);
  const double norm = 1.0 / static_cast<double>(n * n);
  for (Index b = 0; b < n; ++b) {
    // The Nyquist mode of a real field cannot carry a phase; drop its odd part.
    const double ky = (2 * b == n) ? 0.0 : grid.wavenumber(b);
    for (Index a = 0; a < n / 2 + 1; ++a) {
      const double kx = (2 * a == n) ? 0.0 : grid.wavenumber(a);
      half(a, b) *= std::polar(norm, kx * dx + ky * dy);
    }
  }
  Field out;
  plan_for(n).backward(half, out);
  return RealField(grid, std::move(out));
}

double heat_kernel(double t, double r) {
  return std::exp(-r * r / (2.0 * t)) / (2.0 * std::numbers::pi * t);
}

}  // namespace critfield
