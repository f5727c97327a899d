#include "critfield/spde.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "critfield/mckean_vlasov.hpp"

namespace critfield {
namespace {

std::string where_string(double time, GridPoint p) {
  std::ostringstream os;
  os << "solution blew up at t = " << time << ", cell (" << p.i << ", " << p.j << ")";
  return os.str();
}

void require_finite(const Field& u, double time) {
  if (u.allFinite()) return;
  for (Index j = 0; j < u.cols(); ++j) {
    for (Index i = 0; i < u.rows(); ++i) {
      if (!std::isfinite(u(i, j))) throw BlowUpError(time, {i, j});
    }
  }
}

// u(t) = u0 / sqrt(1 + 2 a u0^2 t) solves du/dt = -a u^3; du/du0 = (1 + 2 a u0^2 t)^{-3/2}.
void cubic_flow(Field& u, std::span<Field> tangents, double a_tau) {
  const Index count = u.size();
  double* uu = u.data();
  for (Index k = 0; k < count; ++k) {
    const double growth = 1.0 + 2.0 * a_tau * uu[k] * uu[k];
    const double inv = 1.0 / std::sqrt(growth);
    uu[k] *= inv;
    for (Field& D : tangents) D.data()[k] *= inv * inv * inv;
  }
}

// Pointwise RK4 with substeps sized to the local stiffness |f'| h / log(1/eps).
void rk4_flow(Field& u, std::span<Field> tangents, double s_mid, double h, const SolverConfig& cfg) {
  const Reaction& r = cfg.reaction;
  const double inv_log = 1.0 / cfg.log_attenuation();
  const Index count = u.size();
  const std::size_t nt = tangents.size();
  std::vector<double> d(nt), kd1(nt), kd2(nt), kd3(nt), kd4(nt);

  auto fu = [&](double x) { return -eval_f(r, s_mid, x) * inv_log; };
  auto fp = [&](double x) { return -eval_f_prime(r, s_mid, x) * inv_log; };

  for (Index k = 0; k < count; ++k) {
    double x = u.data()[k];
    for (std::size_t c = 0; c < nt; ++c) d[c] = tangents[c].data()[k];
    const double stiffness = std::abs(fp(x)) * h;
    const int pieces = static_cast<int>(std::clamp(std::ceil(stiffness / 0.25), 1.0, 1e6));
    const double dt = h / pieces;
    for (int p = 0; p < pieces; ++p) {
      const double k1 = fu(x);
      const double j1 = fp(x);
      const double x2 = x + 0.5 * dt * k1;
      const double k2 = fu(x2);
      const double j2 = fp(x2);
      const double x3 = x + 0.5 * dt * k2;
      const double k3 = fu(x3);
      const double j3 = fp(x3);
      const double x4 = x + dt * k3;
      const double k4 = fu(x4);
      const double j4 = fp(x4);
      for (std::size_t c = 0; c < nt; ++c) {
        kd1[c] = j1 * d[c];
        kd2[c] = j2 * (d[c] + 0.5 * dt * kd1[c]);
        kd3[c] = j3 * (d[c] + 0.5 * dt * kd2[c]);
        kd4[c] = j4 * (d[c] + dt * kd3[c]);
        d[c] += dt / 6.0 * (kd1[c] + 2.0 * kd2[c] + 2.0 * kd3[c] + kd4[c]);
      }
      x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    u.data()[k] = x;
    for (std::size_t c = 0; c < nt; ++c) tangents[c].data()[k] = d[c];
  }
}

Trajectory run(const RealField& u0, std::span<const GridPoint> z_points, const SolverConfig& cfg,
               const MeshObserver& observer) {
  cfg.validate();
  if (!(u0.grid == cfg.grid)) throw std::invalid_argument("initial field is not on the solver grid");
  const TimeMesh mesh = build_mesh(cfg);
  const double eps2 = cfg.eps * cfg.eps;

  Trajectory traj{0.0, u0, {}, {}};
  for (const GridPoint& z : z_points) {
    if (z.i < 0 || z.j < 0 || z.i >= cfg.grid.size() || z.j >= cfg.grid.size()) {
      throw std::invalid_argument("Malliavin point outside the grid");
    }
    traj.companions.push_back({z, periodized_heat_kernel(cfg.grid, eps2, z.i, z.j)});
  }
  std::vector<Field> tangents;
  tangents.reserve(traj.companions.size());
  for (auto& c : traj.companions) tangents.push_back(std::move(c.D.values));

  Field u = u0.values;
  auto sync = [&](double t) {
    traj.time = t;
    traj.u.values = u;
    for (std::size_t c = 0; c < tangents.size(); ++c) traj.companions[c].D.values = tangents[c];
  };
  auto record = [&](double t) {
    traj.log.push_back({t, u.abs().maxCoeff()});
    if (observer) {
      sync(t);
      observer(traj);
    }
  };
  record(0.0);

  std::size_t next_coarse = 1;
  for (std::size_t k = 0; k + 1 < mesh.fine.size(); ++k) {
    const double s = mesh.fine[k];
    const double h = mesh.fine[k + 1] - s;
    nonlinear_substep(u, tangents, s, 0.5 * h, cfg);
    require_finite(u, s + 0.5 * h);
    apply_semigroup_inplace(u, cfg.grid, h, cfg.mass);
    for (Field& D : tangents) apply_semigroup_inplace(D, cfg.grid, h, cfg.mass);
    nonlinear_substep(u, tangents, s + 0.5 * h, 0.5 * h, cfg);
    require_finite(u, mesh.fine[k + 1]);
    if (next_coarse < mesh.coarse_in_fine.size() && mesh.coarse_in_fine[next_coarse] == k + 1) {
      record(mesh.fine[k + 1]);
      ++next_coarse;
    }
  }
  sync(mesh.fine.back());
  return traj;
}

}  // namespace

BlowUpError::BlowUpError(double time, GridPoint where)
    : std::runtime_error(where_string(time, where)), time_(time), where_(where) {}

double SolverConfig::log_attenuation() const { return -std::log(eps); }

double SolverConfig::mesh_delta() const { return delta.value_or(1.0 / std::sqrt(log_attenuation())); }

void SolverConfig::validate() const {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in (0, 1)");
  if (!(T > 0.0)) throw std::invalid_argument("T must be positive");
  if (substeps < 1) throw std::invalid_argument("substeps must be at least 1");
  if (!std::isfinite(mass)) throw std::invalid_argument("mass must be finite");
  if (delta && !(*delta > 0.0)) throw std::invalid_argument("mesh delta must be positive");
  if (scheme == NonlinearScheme::exact_cubic && !reaction.cubic_coefficient()) {
    throw std::invalid_argument("exact-cubic substeps need a pure cubic reaction");
  }
}

std::vector<std::string> SolverConfig::resolution_warnings() const {
  std::vector<std::string> out;
  const double L_min = 12.0 * std::sqrt(T + eps * eps);
  if (grid.side_length() < L_min) {
    out.push_back("torus side " + std::to_string(grid.side_length()) + " is below 12 sqrt(T + eps^2) = " +
                  std::to_string(L_min));
  }
  if (grid.spacing() > eps / 4.0) {
    out.push_back("grid spacing " + std::to_string(grid.spacing()) + " exceeds eps/4 = " + std::to_string(eps / 4.0));
  }
  return out;
}

NonlinearScheme default_scheme(const Reaction& r) {
  return r.cubic_coefficient() ? NonlinearScheme::exact_cubic : NonlinearScheme::rk4;
}

TimeMesh build_mesh(const SolverConfig& cfg) {
  cfg.validate();
  const TimeMap map(cfg.eps);
  const double delta = cfg.mesh_delta();
  const double q_end = map.q_at(cfg.T);

  std::vector<double> q_nodes;
  const auto M = static_cast<std::size_t>(std::floor(q_end / delta));
  for (std::size_t m = 0; m <= M; ++m) q_nodes.push_back(static_cast<double>(m) * delta);
  if (q_end - q_nodes.back() > 1e-12 * std::max(1.0, q_end)) {
    q_nodes.push_back(q_end);
  } else if (q_nodes.size() > 1) {
    q_nodes.back() = q_end;
  } else {
    q_nodes.push_back(q_end);
  }

  TimeMesh mesh;
  for (double q : q_nodes) mesh.coarse.push_back(map.time_at(q));
  mesh.coarse.front() = 0.0;
  mesh.coarse.back() = cfg.T;

  mesh.fine.push_back(0.0);
  mesh.coarse_in_fine.push_back(0);
  for (std::size_t m = 0; m + 1 < q_nodes.size(); ++m) {
    const double qa = q_nodes[m];
    const double qb = q_nodes[m + 1];
    for (int k = 1; k < cfg.substeps; ++k) {
      mesh.fine.push_back(map.time_at(qa + (qb - qa) * k / cfg.substeps));
    }
    mesh.fine.push_back(mesh.coarse[m + 1]);
    mesh.coarse_in_fine.push_back(mesh.fine.size() - 1);
  }
  return mesh;
}

void nonlinear_substep(Field& u, std::span<Field> tangents, double t0, double h, const SolverConfig& cfg) {
  if (!(h > 0.0)) throw std::invalid_argument("nonlinear substep needs h > 0");
  if (!cfg.reaction.has_lipschitz_part() && !cfg.reaction.has_monotone_part()) return;
  if (cfg.scheme == NonlinearScheme::exact_cubic) {
    const auto a = cfg.reaction.cubic_coefficient();
    if (!a) throw std::invalid_argument("exact-cubic substeps need a pure cubic reaction");
    cubic_flow(u, tangents, *a * h / cfg.log_attenuation());
  } else {
    const double eps2 = cfg.eps * cfg.eps;
    rk4_flow(u, tangents, t0 + 0.5 * h + eps2, h, cfg);
  }
  require_finite(u, t0 + h);
}

Field nonlinear_substep(const Field& u, double t0, double h, const SolverConfig& cfg) {
  Field out = u;
  nonlinear_substep(out, std::span<Field>{}, t0, h, cfg);
  return out;
}

Trajectory evolve(const RealField& u0, const SolverConfig& cfg, const MeshObserver& observer) {
  return run(u0, {}, cfg, observer);
}

Trajectory evolve_malliavin(const RealField& u0, std::span<const GridPoint> z_points, const SolverConfig& cfg,
                            const MeshObserver& observer) {
  return run(u0, z_points, cfg, observer);
}

MalliavinBoundReport malliavin_bound_check(const RealField& D, double t, GridPoint z, const SolverConfig& cfg,
                                           double tol_abs, double tol_rel) {
  const double eps2 = cfg.eps * cfg.eps;
  const RealField kernel = periodized_heat_kernel(D.grid, t + eps2, z.i, z.j);
  const Field bound = kernel.values * std::exp(3.0 * cfg.reaction.constants().L1 + cfg.mass * t);
  const double bound_max = bound.maxCoeff();
  const double resolved = 1e-10 * bound_max;

  MalliavinBoundReport report;
  report.min_D = D.values.minCoeff();
  report.max_D = D.values.maxCoeff();
  for (Index k = 0; k < D.values.size(); ++k) {
    const double b = bound.data()[k];
    const double d = D.values.data()[k];
    if (b >= resolved) {
      report.max_ratio = std::max(report.max_ratio, d / b);
    } else {
      report.far_excess = std::max(report.far_excess, (d - b) / bound_max);
    }
  }
  report.passed = report.min_D >= -tol_abs * std::max(report.max_D, 0.0) && report.max_ratio <= 1.0 + tol_rel &&
                  report.far_excess <= tol_abs;
  return report;
}

}  // namespace critfield
