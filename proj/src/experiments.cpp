#include "critfield/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <numbers>
#include <numeric>
#include <sstream>
#include <thread>

#include "critfield/mckean_vlasov.hpp"
#include "critfield/noise.hpp"

namespace critfield {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

SolverConfig solver_config(const ExperimentConfig& cfg, const Reaction& r, double eps, double T) {
  SolverConfig s{eps, cfg.mass, T, TorusGrid(cfg.L, cfg.n), r, cfg.substeps, cfg.scheme.value_or(default_scheme(r)),
                 cfg.delta};
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return s;
}

void collect_warnings(McResult& result, const SolverConfig& s) {
  for (auto& w : s.resolution_warnings()) {
    const std::string line = "eps=" + fmt(s.eps) + ": " + w;
    if (std::find(result.warnings.begin(), result.warnings.end(), line) == result.warnings.end()) {
      result.warnings.push_back(line);
    }
  }
}

// Per-replica values with blow-ups flagged; summarized over finite replicas.
struct ReplicaValues {
  std::vector<double> values;
  std::vector<char> blown;

  explicit ReplicaValues(int r) : values(static_cast<std::size_t>(r), 0.0), blown(static_cast<std::size_t>(r), 0) {}

  McRow row(std::string name, double eps, double T, double wall_ms) const {
    std::vector<double> finite;
    for (std::size_t k = 0; k < values.size(); ++k) {
      if (!blown[k]) finite.push_back(values[k]);
    }
    const Summary s = summarize(finite);
    McRow out{std::move(name), eps, T, s.mean, s.stderr_, static_cast<int>(finite.size()), wall_ms, RowStatus::ok};
    if (finite.size() != values.size()) out.status = RowStatus::blowup;
    return out;
  }
  bool any_blown() const { return std::any_of(blown.begin(), blown.end(), [](char b) { return b != 0; }); }
};

// Strict decrease along the rows, each step beyond `k` joint standard errors.
// Rows share their noise replicas, so the joint SE is that of the paired
// per-replica differences.
CheckOutcome decreasing_check(std::string name, const std::vector<McRow>& rows,
                              const std::vector<ReplicaValues>& replicas, double k) {
  CheckOutcome out{std::move(name), rows.size() >= 2, ""};
  std::ostringstream os;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const ReplicaValues& a = replicas[i - 1];
    const ReplicaValues& b = replicas[i];
    std::vector<double> diff;
    for (std::size_t r = 0; r < a.values.size(); ++r) {
      if (!a.blown[r] && !b.blown[r]) diff.push_back(a.values[r] - b.values[r]);
    }
    const Summary d = summarize(diff);
    const bool ok = d.mean > k * d.stderr_ && rows[i].status == RowStatus::ok && rows[i - 1].status == RowStatus::ok;
    out.passed = out.passed && ok;
    os << "eps " << rows[i - 1].epsilon << "->" << rows[i].epsilon << ": drop " << d.mean << " vs " << k
       << "*SE " << k * d.stderr_ << (ok ? " ok" : " FAIL") << "; ";
  }
  out.detail = os.str();
  return out;
}

double spatial_fraction_above(const Field& u, double theta) {
  return static_cast<double>((u.abs() >= theta).count()) / static_cast<double>(u.size());
}

}  // namespace

std::string to_string(RowStatus s) {
  switch (s) {
    case RowStatus::ok: return "ok";
    case RowStatus::fail: return "fail";
    case RowStatus::blowup: return "blowup";
  }
  return "?";
}

bool McResult::all_passed() const {
  return !numerical_fault && std::all_of(checks.begin(), checks.end(), [](const CheckOutcome& c) { return c.passed; });
}

Summary summarize(const std::vector<double>& values) {
  Summary s;
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    const double var = ss / static_cast<double>(values.size() - 1);
    s.stderr_ = std::sqrt(var / static_cast<double>(values.size()));
  }
  return s;
}

void parallel_for(int count, int threads, const std::function<void(int)>& body) {
  const int workers = std::max(1, std::min(threads, count));
  if (workers == 1) {
    for (int r = 0; r < count; ++r) body(r);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int r = next++; r < count; r = next++) {
        try {
          body(r);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

double normalized_error(const RealField& u, const RealField& v, double T, double eps) {
  if (!(u.grid == v.grid)) throw std::invalid_argument("fields live on different grids");
  const double rms = std::sqrt((u.values - v.values).square().mean());
  return std::sqrt(T + eps * eps) * rms;
}

McResult run_convergence(const ExperimentConfig& cfg) {
  cfg.validate();
  McResult result{cfg, {}, {}, {}, json::object(), {}, false};
  const Reaction reaction = cfg.reaction.build();
  if (!reaction.in_restricted_class()) {
    throw ConfigError("convergence runs need gamma2 < 2 for the monotone part of the reaction");
  }
  const TorusGrid grid(cfg.L, cfg.n);
  const QuadratureRule rule(cfg.quadrature_nodes);

  std::vector<ReplicaValues> per_eps;
  for (double eps : cfg.epsilons) {
    const auto start = Clock::now();
    const SolverConfig scfg = solver_config(cfg, reaction, eps, cfg.T);
    collect_warnings(result, scfg);
    const SigmaPath path = solve_sigma_eps(reaction, eps, cfg.mass, cfg.T, cfg.dq, cfg.variance_mode, rule, grid);
    ReplicaValues errs(cfg.replicas);
    parallel_for(cfg.replicas, cfg.threads, [&](int r) {
      const auto noise = sample_white_noise(grid, cfg.seed, static_cast<std::uint64_t>(r));
      const RealField eta_eps = mollify(noise, eps);
      try {
        const Trajectory traj = evolve(eta_eps, scfg);
        const RealField v = mkv_field(path, cfg.T, eta_eps, cfg.mass);
        errs.values[r] = normalized_error(traj.u, v, cfg.T, eps);
      } catch (const BlowUpError&) {
        errs.blown[r] = 1;
      }
    });
    result.rows.push_back(errs.row("convergence", eps, cfg.T, elapsed_ms(start)));
    result.numerical_fault = result.numerical_fault || errs.any_blown();
    per_eps.push_back(std::move(errs));
  }
  result.checks.push_back(
      decreasing_check("normalized error decreases in eps beyond 2 joint SE", result.rows, per_eps, 2.0));

  // F = 0 control: u and v coincide, so only round-off remains.
  {
    const auto start = Clock::now();
    const double eps = cfg.epsilons.front();
    const Reaction zero = zero_reaction();
    const SolverConfig scfg = solver_config(cfg, zero, eps, cfg.T);
    const SigmaPath path = solve_sigma_eps(zero, eps, cfg.mass, cfg.T, cfg.dq, cfg.variance_mode, rule, grid);
    const int R = std::min(cfg.replicas, 4);
    ReplicaValues errs(R);
    parallel_for(R, cfg.threads, [&](int r) {
      const RealField eta_eps = mollify(sample_white_noise(grid, cfg.seed, static_cast<std::uint64_t>(r)), eps);
      errs.values[r] = normalized_error(evolve(eta_eps, scfg).u, mkv_field(path, cfg.T, eta_eps, cfg.mass), cfg.T, eps);
    });
    McRow row = errs.row("convergence-control", eps, cfg.T, elapsed_ms(start));
    const double worst = *std::max_element(errs.values.begin(), errs.values.end());
    const bool ok = worst < 1e-10;
    if (!ok) row.status = RowStatus::fail;
    result.rows.push_back(row);
    result.checks.push_back({"zero-reaction control below 1e-10", ok, "max " + fmt(worst)});
  }

  // Slope of log(error) against log(log(1/eps)); reported, not gated.
  std::vector<double> xs, ys;
  for (const auto& row : result.rows) {
    if (row.experiment == "convergence" && row.value > 0.0) {
      xs.push_back(std::log(-std::log(row.epsilon)));
      ys.push_back(std::log(row.value));
    }
  }
  if (xs.size() >= 2) {
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      sxy += (xs[k] - mx) * (ys[k] - my);
      sxx += (xs[k] - mx) * (xs[k] - mx);
    }
    result.extra["loglog_slope_vs_log_inv_eps"] = sxy / sxx;
  }
  return result;
}

McResult run_corollary(const ExperimentConfig& cfg) {
  cfg.validate();
  McResult result{cfg, {}, {}, {}, json::object(), {}, false};
  const double lambda = cfg.reaction.lambda;
  const Reaction reaction = allen_cahn(lambda);
  const TorusGrid grid(cfg.L, cfg.n);
  const double constant_coef = 1.0 / std::sqrt(1.0 + 3.0 * lambda * lambda / std::numbers::pi);

  std::vector<double> times;
  if (cfg.Tprime && *cfg.Tprime < cfg.T) times.push_back(*cfg.Tprime);
  times.push_back(cfg.T);

  json coefficients = json::array();
  std::vector<McRow> trend_rows;
  std::vector<ReplicaValues> trend_replicas;
  bool gap_ok = true;
  std::ostringstream gap_detail;
  for (double eps : cfg.epsilons) {
    for (double T : times) {
      const auto start = Clock::now();
      const SolverConfig scfg = solver_config(cfg, reaction, eps, T);
      collect_warnings(result, scfg);
      const double q = std::max(0.0, 2.0 + std::log(T) / -std::log(eps));
      const double full_coef = allen_cahn_sigma_closed(lambda, q);
      const double gap = std::abs(full_coef - constant_coef);
      coefficients.push_back({{"epsilon", eps}, {"T", T}, {"full", full_coef}, {"constant", constant_coef}, {"gap", gap}});
      if (eps <= 0.05 + 1e-15 && T == times.front()) {
        gap_ok = gap_ok && gap < 0.05;
        gap_detail << "eps " << eps << " T " << T << ": gap " << gap << "; ";
      }

      ReplicaValues full(cfg.replicas), constant(cfg.replicas);
      parallel_for(cfg.replicas, cfg.threads, [&](int r) {
        const auto noise = sample_white_noise(grid, cfg.seed, static_cast<std::uint64_t>(r));
        try {
          const RealField u = evolve(mollify(noise, eps), scfg).u;
          RealField heat = apply_semigroup(noise.eta, T, cfg.mass);
          RealField pred = heat;
          pred.values *= full_coef;
          full.values[r] = normalized_error(u, pred, T, eps);
          heat.values *= constant_coef;
          constant.values[r] = normalized_error(u, heat, T, eps);
        } catch (const BlowUpError&) {
          full.blown[r] = constant.blown[r] = 1;
        }
      });
      const double wall = elapsed_ms(start);
      result.rows.push_back(full.row("corollary", eps, T, wall));
      if (T == cfg.T) {
        trend_rows.push_back(result.rows.back());
        trend_replicas.push_back(full);
      }
      result.rows.push_back(constant.row("corollary-const", eps, T, wall));
      result.numerical_fault = result.numerical_fault || full.any_blown();
    }
  }
  result.extra["coefficients"] = coefficients;
  result.checks.push_back(decreasing_check("corollary error decreases in eps beyond 2 joint SE", trend_rows, trend_replicas, 2.0));
  if (!gap_detail.str().empty()) {
    result.checks.push_back({"full vs constant coefficient gap < 0.05 for eps <= 0.05", gap_ok, gap_detail.str()});
  }
  return result;
}

McResult run_tails(const ExperimentConfig& cfg) {
  cfg.validate();
  McResult result{cfg, {}, {}, {}, json::object(), {}, false};
  const Reaction reaction = cfg.reaction.build();
  const TorusGrid grid(cfg.L, cfg.n);
  const double L1 = reaction.constants().L1;
  const double t = cfg.T;
  constexpr int kThetas = 4;  // theta = k / sqrt(t + eps^2), k = 0..3

  std::vector<McRow> moments;
  bool tails_ok = true;
  std::ostringstream detail;
  bool moment_bound_ok = true;
  std::ostringstream moment_detail;
  for (double eps : cfg.epsilons) {
    const auto start = Clock::now();
    const SolverConfig scfg = solver_config(cfg, reaction, eps, t);
    collect_warnings(result, scfg);
    const double s = t + eps * eps;
    std::vector<ReplicaValues> freq(kThetas, ReplicaValues(cfg.replicas));
    ReplicaValues moment(cfg.replicas);
    parallel_for(cfg.replicas, cfg.threads, [&](int r) {
      const auto noise = sample_white_noise(grid, cfg.seed, static_cast<std::uint64_t>(r));
      try {
        const Field u = evolve(mollify(noise, eps), scfg).u.values;
        for (int k = 0; k < kThetas; ++k) freq[k].values[r] = spatial_fraction_above(u, k / std::sqrt(s));
        moment.values[r] = u.square().mean() * s;
      } catch (const BlowUpError&) {
        for (auto& f : freq) f.blown[r] = 1;
        moment.blown[r] = 1;
      }
    });
    const double wall = elapsed_ms(start);
    const double spread = std::exp(2.0 * std::abs(cfg.mass) * t + 6.0 * L1);
    for (int k = 0; k < kThetas; ++k) {
      const double theta = k / std::sqrt(s);
      const double bound = 2.0 * std::exp(-theta * theta * s / (2.0 * spread));
      McRow row = freq[k].row("tails@" + std::to_string(k), eps, t, wall);
      const bool ok = row.status == RowStatus::ok && row.value <= bound + 3.0 * row.stderr_;
      if (!ok && row.status == RowStatus::ok) row.status = RowStatus::fail;
      tails_ok = tails_ok && ok;
      detail << "eps " << eps << " k " << k << ": " << row.value << " <= " << bound << " + 3*" << row.stderr_
             << (ok ? "" : " FAIL") << "; ";
      result.rows.push_back(row);
      result.rows.push_back({"tails-bound@" + std::to_string(k), eps, t, bound, 0.0, 0, 0.0, RowStatus::ok});
    }
    McRow m = moment.row("second-moment", eps, t, wall);
    // Poincare with the pointwise Malliavin bound: Var u <= e^{6 L1 + 2|m| t} / (4 pi (t + eps^2)).
    const double moment_bound = spread / (4.0 * std::numbers::pi);
    const bool within = m.value <= moment_bound + 3.0 * m.stderr_;
    moment_bound_ok = moment_bound_ok && within;
    moment_detail << "eps " << eps << ": " << m.value << " <= " << moment_bound << "; ";
    result.rows.push_back(m);
    moments.push_back(m);
    result.numerical_fault = result.numerical_fault || moment.any_blown();
  }
  result.checks.push_back({"empirical tails below the sub-Gaussian bound + 3 SE", tails_ok, detail.str()});
  result.checks.push_back({"scaled second moment below the Poincare bound", moment_bound_ok, moment_detail.str()});
  if (moments.size() >= 2) {
    bool flat = true;
    std::ostringstream os;
    for (std::size_t i = 1; i < moments.size(); ++i) {
      const double rise = moments[i].value - moments[0].value;
      const double joint = std::hypot(moments[i].stderr_, moments[0].stderr_);
      flat = flat && rise <= 3.0 * joint;
      os << "eps " << moments[i].epsilon << ": rise " << rise << " vs 3*SE " << 3.0 * joint << "; ";
    }
    result.checks.push_back({"scaled second moment has no upward trend in eps", flat, os.str()});
  }
  return result;
}

McResult run_malliavin(const ExperimentConfig& cfg) {
  cfg.validate();
  McResult result{cfg, {}, {}, {}, json::object(), {}, false};
  const Reaction reaction = cfg.reaction.build();
  const TorusGrid grid(cfg.L, cfg.n);
  const double h = grid.spacing();

  for (double eps : cfg.epsilons) {
    const auto start = Clock::now();
    const SolverConfig scfg = solver_config(cfg, reaction, eps, cfg.T);
    collect_warnings(result, scfg);

    struct Worst {
      double min_rel = std::numeric_limits<double>::infinity();
      double max_ratio = 0.0;
      double far_excess = 0.0;
      int checks = 0;
      int failures = 0;
    };
    std::vector<Worst> worst(static_cast<std::size_t>(cfg.replicas));
    std::vector<char> blown(static_cast<std::size_t>(cfg.replicas), 0);
    std::vector<double> fd_errors;
    std::mutex fd_mutex;

    auto z_points_for = [&](int r) {
      auto engine = replica_engine(cfg.seed, static_cast<std::uint64_t>(r), 1);
      std::uniform_int_distribution<Index> pick(0, grid.size() - 1);
      std::vector<GridPoint> z;
      for (int k = 0; k < cfg.z_points; ++k) {
        const Index i = pick(engine);
        const Index j = pick(engine);
        z.push_back({i, j});
      }
      return z;
    };

    parallel_for(cfg.replicas, cfg.threads, [&](int r) {
      const auto noise = sample_white_noise(grid, cfg.seed, static_cast<std::uint64_t>(r));
      const RealField eta_eps = mollify(noise, eps);
      const auto z = z_points_for(r);
      Worst& w = worst[static_cast<std::size_t>(r)];
      try {
        const Trajectory traj = evolve_malliavin(eta_eps, z, scfg, [&](const Trajectory& tr) {
          if (tr.time <= 0.0) return;
          for (const auto& c : tr.companions) {
            const auto rep = malliavin_bound_check(c.D, tr.time, c.z, scfg);
            w.min_rel = std::min(w.min_rel, rep.min_D / rep.max_D);
            w.max_ratio = std::max(w.max_ratio, rep.max_ratio);
            w.far_excess = std::max(w.far_excess, rep.far_excess);
            ++w.checks;
            if (!rep.passed) ++w.failures;
          }
        });
        if (r != 0) return;
        // Gateaux-derivative oracle: bump the noise cell at z and difference.
        const double bump = 1e-4 / h;
        const double width = std::sqrt(cfg.T + eps * eps);
        auto engine = replica_engine(cfg.seed, 0, 2);
        std::uniform_real_distribution<double> offset(-1.5 * width, 1.5 * width);
        for (const auto& c : traj.companions) {
          RealField eta = noise.eta;
          eta.values(c.z.i, c.z.j) += bump;
          const RealField u_bumped = evolve(mollify(eta, eps), scfg).u;
          const Field fd = (u_bumped.values - traj.u.values) / bump;
          const Field predicted = c.D.values * (h * h);
          const double peak = predicted.maxCoeff();
          int taken = 0;
          for (int attempt = 0; taken < cfg.fd_probes && attempt < 100 * cfg.fd_probes; ++attempt) {
            const auto wrap = [&](Index base, double d) {
              const Index k = base + static_cast<Index>(std::lround(d / h));
              return ((k % grid.size()) + grid.size()) % grid.size();
            };
            const Index i = wrap(c.z.i, offset(engine));
            const Index j = wrap(c.z.j, offset(engine));
            if (predicted(i, j) < 1e-3 * peak) continue;
            const double rel = std::abs(fd(i, j) - predicted(i, j)) / predicted(i, j);
            std::lock_guard lock(fd_mutex);
            fd_errors.push_back(rel);
            ++taken;
          }
        }
      } catch (const BlowUpError&) {
        blown[static_cast<std::size_t>(r)] = 1;
      }
    });

    Worst total;
    for (const auto& w : worst) {
      total.min_rel = std::min(total.min_rel, w.min_rel);
      total.max_ratio = std::max(total.max_ratio, w.max_ratio);
      total.far_excess = std::max(total.far_excess, w.far_excess);
      total.checks += w.checks;
      total.failures += w.failures;
    }
    const bool any_blown = std::any_of(blown.begin(), blown.end(), [](char b) { return b != 0; });
    result.numerical_fault = result.numerical_fault || any_blown;
    const double fd_max = fd_errors.empty() ? INFINITY : *std::max_element(fd_errors.begin(), fd_errors.end());
    const double wall = elapsed_ms(start);
    const auto status = [&](bool ok) { return any_blown ? RowStatus::blowup : ok ? RowStatus::ok : RowStatus::fail; };

    const bool min_ok = total.min_rel >= -1e-8;
    const bool ratio_ok = total.max_ratio <= 1.05 && total.far_excess <= 1e-8;
    const bool fd_ok = fd_max <= 1e-2;
    result.rows.push_back({"malliavin-min", eps, cfg.T, total.min_rel, 0.0, cfg.replicas, wall, status(min_ok)});
    result.rows.push_back({"malliavin-ratio", eps, cfg.T, total.max_ratio, 0.0, cfg.replicas, wall, status(ratio_ok)});
    result.rows.push_back({"malliavin-fd", eps, cfg.T, fd_max, 0.0, 1, wall, status(fd_ok)});
    result.checks.push_back({"eps " + fmt(eps) + ": min D >= -1e-8 max D", min_ok, "min D / max D = " + fmt(total.min_rel)});
    result.checks.push_back({"eps " + fmt(eps) + ": D / bound <= 1.05", ratio_ok,
                             "max ratio " + fmt(total.max_ratio) + ", far excess " + fmt(total.far_excess) + " over " +
                                 std::to_string(total.checks) + " snapshots"});
    result.checks.push_back({"eps " + fmt(eps) + ": finite-difference oracle within 1e-2", fd_ok,
                             "max relative error " + fmt(fd_max) + " over " + std::to_string(fd_errors.size()) +
                                 " probes"});
  }
  return result;
}

McResult run_sigma_limit(const ExperimentConfig& cfg) {
  cfg.validate();
  McResult result{cfg, {}, {}, {}, json::object(), {}, false};
  const Reaction reaction = cfg.reaction.build();
  if (!reaction.self_similar()) {
    throw ConfigError("the eps -> 0 limit of sigma needs a self-similar reaction (F independent of t)");
  }
  const QuadratureRule rule(cfg.quadrature_nodes);
  const std::optional<TorusGrid> grid =
      cfg.variance_mode == VarianceMode::grid ? std::optional<TorusGrid>(TorusGrid(cfg.L, cfg.n)) : std::nullopt;

  const auto start = Clock::now();
  const SigmaPath limit = solve_sigma_limit(reaction, 2.0, cfg.dq, rule);
  const bool cubic = reaction.cubic_coefficient().has_value();
  const double lambda = cubic ? std::sqrt(*reaction.cubic_coefficient()) : 0.0;

  std::vector<SigmaPath> paths;
  for (double eps : cfg.epsilons) {
    paths.push_back(solve_sigma_eps(reaction, eps, cfg.mass, cfg.T, cfg.dq, cfg.variance_mode, rule, grid));
  }

  // sup gap over the shared q-mesh; both meshes are k * dq, so indices align.
  auto value_at = [](const SigmaPath& p, std::size_t k, double q) -> std::optional<double> {
    if (q > p.q_max()) return std::nullopt;
    if (k < p.q().size() && p.q()[k] == q) return p.sigma()[k];
    return p.at_q(q);
  };

  std::ostringstream table;
  table.precision(17);
  table << "q,sigma_limit";
  if (cubic) table << ",closed_form";
  for (double eps : cfg.epsilons) table << ",sigma_eps_" << eps;
  table << '\n';
  std::vector<double> gaps(paths.size(), 0.0);
  double closed_dev = 0.0;
  for (std::size_t k = 0; k < limit.q().size(); ++k) {
    const double q = limit.q()[k];
    table << q << ',' << limit.sigma()[k];
    if (cubic) {
      const double c = allen_cahn_sigma_closed(lambda, q);
      closed_dev = std::max(closed_dev, std::abs(limit.sigma()[k] - c));
      table << ',' << c;
    }
    for (std::size_t p = 0; p < paths.size(); ++p) {
      table << ',';
      if (const auto v = value_at(paths[p], k, q)) {
        gaps[p] = std::max(gaps[p], std::abs(*v - limit.sigma()[k]));
        table << *v;
      }
    }
    table << '\n';
  }
  result.table_csv = table.str();
  const double wall = elapsed_ms(start);

  for (std::size_t p = 0; p < paths.size(); ++p) {
    result.rows.push_back({"sigma-gap", cfg.epsilons[p], cfg.T, gaps[p], 0.0, 0, wall, RowStatus::ok});
  }
  if (cubic) {
    const bool ok = closed_dev < 1e-8;
    result.rows.push_back({"sigma-closed", 0.0, cfg.T, closed_dev, 0.0, 0, wall, ok ? RowStatus::ok : RowStatus::fail});
    result.checks.push_back({"limit path matches the closed form within 1e-8", ok, "max deviation " + fmt(closed_dev)});
  }
  if (cfg.mass == 0.0) {
    const double worst = *std::max_element(gaps.begin(), gaps.end());
    const bool ok = worst < 1e-12;
    result.checks.push_back({"m = 0: sigma_eps equals the limit within 1e-12", ok, "max gap " + fmt(worst)});
  } else if (paths.size() >= 2) {
    bool ok = true;
    std::ostringstream os;
    for (std::size_t p = 1; p < gaps.size(); ++p) {
      ok = ok && gaps[p] < gaps[p - 1];
      os << gaps[p - 1] << " -> " << gaps[p] << "; ";
    }
    result.checks.push_back({"sup gap strictly decreases in eps", ok, os.str()});
  }
  return result;
}

McResult run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.experiment) {
    case ExperimentKind::convergence: return run_convergence(cfg);
    case ExperimentKind::corollary: return run_corollary(cfg);
    case ExperimentKind::tails: return run_tails(cfg);
    case ExperimentKind::malliavin: return run_malliavin(cfg);
    case ExperimentKind::sigma_limit: return run_sigma_limit(cfg);
  }
  throw ConfigError("unknown experiment");
}

void write_results_csv(std::ostream& out, const McResult& result) {
  out << "experiment,epsilon,T,value,stderr,replicas,wall_ms,status,config_hash,seed,code_version\n";
  const std::string provenance =
      "," + result.config.hash() + "," + std::to_string(result.config.seed) + "," + kCodeVersion + "\n";
  std::ostringstream line;
  for (const auto& row : result.rows) {
    line.str("");
    line.precision(17);
    line << row.experiment << ',' << row.epsilon << ',' << row.T << ',' << row.value << ',' << row.stderr_ << ','
         << row.replicas << ',';
    line.precision(6);
    line << row.wall_ms << ',' << to_string(row.status) << provenance;
    out << line.str();
  }
}

nlohmann::json result_metadata(const McResult& result) {
  json checks = json::array();
  for (const auto& c : result.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  return {{"config", result.config.to_json()},
          {"config_hash", result.config.hash()},
          {"seed", result.config.seed},
          {"generator", std::string(kGeneratorName)},
          {"code_version", kCodeVersion},
          {"threads", result.config.threads},
          {"checks", checks},
          {"all_passed", result.all_passed()},
          {"numerical_fault", result.numerical_fault},
          {"warnings", result.warnings},
          {"extra", result.extra}};
}

void write_results(const McResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "results.csv");
    write_results_csv(out, result);
  }
  {
    std::ofstream out(dir / "meta.json");
    out << result_metadata(result).dump(2) << '\n';
  }
  if (!result.table_csv.empty()) {
    std::ofstream out(dir / "sigma_paths.csv");
    out << result.table_csv;
  }
}

}  // namespace critfield
