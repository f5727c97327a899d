#pragma once

#include <complex>
#include <cstdint>

#include <Eigen/Dense>

namespace critfield {

using Index = Eigen::Index;
using Field = Eigen::ArrayXXd;
using Spectrum = Eigen::ArrayXXcd;

/// Periodic square [0, L)^2 with n points per side. Entry (i, j) of a field
/// sits at x = i*h, y = j*h.
class TorusGrid {
 public:
  TorusGrid(double side_length, Index points_per_side);

  double side_length() const { return side_length_; }
  Index size() const { return n_; }
  double spacing() const { return side_length_ / static_cast<double>(n_); }
  double cell_area() const { return spacing() * spacing(); }

  /// Signed mode number for a storage index in [0, n): k in [-n/2, n/2).
  Index signed_mode(Index idx) const { return idx < (n_ + 1) / 2 ? idx : idx - n_; }
  /// Angular wavenumber 2*pi*k/L for a storage index.
  double wavenumber(Index idx) const;

  /// Periodic distance between grid point (i, j) and the point (x, y).
  double torus_distance(Index i, Index j, double x, double y) const;

  friend bool operator==(const TorusGrid&, const TorusGrid&) = default;

 private:
  double side_length_;
  Index n_;
};

struct RealField {
  TorusGrid grid;
  Field values;

  RealField(TorusGrid g, Field v);
  static RealField zeros(const TorusGrid& g);
  static RealField constant(const TorusGrid& g, double c);

  Index size() const { return grid.size(); }
};

/// Full n x n coefficient array. Coefficient (a, b) belongs to the signed
/// modes (signed_mode(a), signed_mode(b)); the k = 0 coefficient is the mean.
struct SpectralField {
  TorusGrid grid;
  Spectrum coefficients;
};

SpectralField forward_transform(const RealField& f);

/// Throws std::invalid_argument when the coefficients are not Hermitian to
/// `symmetry_tol` relative to the largest coefficient magnitude.
RealField inverse_transform(const SpectralField& F, double symmetry_tol = 1e-10);

/// e^{mt} G_t * f on the torus: mode k is scaled by exp((m - |xi_k|^2 / 2) t).
RealField apply_semigroup(const RealField& f, double t, double mass);

/// In-place variant used by the time steppers.
void apply_semigroup_inplace(Field& values, const TorusGrid& grid, double t, double mass);

/// Variance at one grid point of G_{t_eff} * eta for cellwise white noise eta
/// of variance 1/h^2: (1/L^2) * sum_k exp(-|xi_k|^2 t_eff).
double grid_point_variance(const TorusGrid& grid, double t_eff);

/// Spectral heat flow of the unit-mass cell indicator at (iz, jz); this is
/// the periodized G_t(. - z) resolved on the grid.
RealField periodized_heat_kernel(const TorusGrid& grid, double t, Index iz, Index jz);

/// Band-limited shift: result(x) = f(x + (dx, dy)).
RealField translate(const RealField& f, double dx, double dy);

/// Continuum heat kernel G_t(r) = exp(-r^2 / (2t)) / (2 pi t).
double heat_kernel(double t, double r);

}  // namespace critfield
