#pragma once

#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "critfield/grid.hpp"
#include "critfield/reaction.hpp"

namespace critfield {

enum class NonlinearScheme { rk4, exact_cubic };

/// Solver for du/dt = (1/2) Lap u + m u - f(t + eps^2, u) / log(1/eps).
struct SolverConfig {
  double eps;
  double mass;
  double T;
  TorusGrid grid;
  Reaction reaction;
  int substeps = 8;
  NonlinearScheme scheme = NonlinearScheme::rk4;
  /// Step of the exponential mesh in q; defaults to 1/sqrt(log(1/eps)).
  std::optional<double> delta;

  double log_attenuation() const;
  double mesh_delta() const;
  /// Throws std::invalid_argument on an unusable configuration.
  void validate() const;
  /// Soft resolution rules: L >= 12 sqrt(T + eps^2) and h <= eps / 4.
  std::vector<std::string> resolution_warnings() const;
};

/// Picks exact_cubic for pure cubic reactions and rk4 otherwise.
NonlinearScheme default_scheme(const Reaction& r);

/// Coarse nodes t_m = eps^{2 - m delta} - eps^2 (last one clamped to T) and
/// their subdivision into `substeps` intervals uniform in q.
struct TimeMesh {
  std::vector<double> coarse;
  std::vector<double> fine;
  std::vector<std::size_t> coarse_in_fine;  // fine index of each coarse node
};

TimeMesh build_mesh(const SolverConfig& cfg);

struct GridPoint {
  Index i;
  Index j;
};

struct MalliavinCompanion {
  GridPoint z;
  RealField D;
};

struct StepRecord {
  double t;
  double max_abs_u;
};

struct Trajectory {
  double time;
  RealField u;
  std::vector<MalliavinCompanion> companions;
  std::vector<StepRecord> log;
};

/// Raised when the solution stops being finite.
class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(double time, GridPoint where);
  double time() const { return time_; }
  GridPoint where() const { return where_; }

 private:
  double time_;
  GridPoint where_;
};

/// Advances du/dt = -f(t0 + h/2 + eps^2, u) / log(1/eps) pointwise over
/// [t0, t0 + h]. Each tangent field D is carried along its linearization
/// dD/dt = -f'(., u) D / log(1/eps).
void nonlinear_substep(Field& u, std::span<Field> tangents, double t0, double h, const SolverConfig& cfg);
Field nonlinear_substep(const Field& u, double t0, double h, const SolverConfig& cfg);

/// Called at t = 0 and at every coarse mesh node.
using MeshObserver = std::function<void(const Trajectory&)>;

/// Strang splitting per fine substep: half reaction, exact linear step, half reaction.
Trajectory evolve(const RealField& u0, const SolverConfig& cfg, const MeshObserver& observer = {});

/// evolve() with Malliavin derivative companions D_z u started from the
/// periodized G_{eps^2}(. - z).
Trajectory evolve_malliavin(const RealField& u0, std::span<const GridPoint> z_points, const SolverConfig& cfg,
                            const MeshObserver& observer = {});

struct MalliavinBoundReport {
  double min_D = 0.0;
  double max_D = 0.0;
  /// max of D / (e^{3 L1 + m t} G_{t+eps^2}(x - z)) where the kernel is resolved
  double max_ratio = 0.0;
  /// max of (D - bound)^+ / max bound over the unresolved far field
  double far_excess = 0.0;
  bool passed = false;
};

/// 0 <= D_z u(t, x) <= e^{3 L1 + m t} G_{t+eps^2}(x - z) with the periodized
/// kernel. `tol_abs` is relative to max D.
MalliavinBoundReport malliavin_bound_check(const RealField& D, double t, GridPoint z, const SolverConfig& cfg,
                                           double tol_abs = 1e-8, double tol_rel = 5e-2);

}  // namespace critfield
