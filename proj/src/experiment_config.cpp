#include "critfield/experiments.hpp"

#include <cstdio>
#include <fstream>
#include <set>

namespace critfield {
namespace {

using nlohmann::json;

ExperimentKind parse_kind(const std::string& s) {
  if (s == "convergence") return ExperimentKind::convergence;
  if (s == "corollary") return ExperimentKind::corollary;
  if (s == "tails") return ExperimentKind::tails;
  if (s == "malliavin") return ExperimentKind::malliavin;
  if (s == "sigma-limit") return ExperimentKind::sigma_limit;
  throw ConfigError("unknown experiment '" + s + "'");
}

template <typename T>
T get(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

ReactionSpec parse_reaction(const json& j) {
  if (!j.is_object()) throw ConfigError("reaction must be an object");
  reject_unknown(j, {"name", "lambda", "coefficients", "coefficient", "constants"}, "reaction");
  ReactionSpec spec;
  if (j.contains("name")) spec.name = get<std::string>(j, "name");
  if (j.contains("lambda")) spec.lambda = get<double>(j, "lambda");
  if (j.contains("coefficients")) spec.coefficients = get<std::vector<double>>(j, "coefficients");
  if (j.contains("coefficient")) spec.coefficients = {get<double>(j, "coefficient")};
  if (j.contains("constants")) {
    const json& c = j.at("constants");
    reject_unknown(c, {"L1", "L2", "gamma1", "gamma2", "ell1", "ell2"}, "reaction.constants");
    ClassConstants k = spec.build().constants();
    if (c.contains("L1")) k.L1 = get<double>(c, "L1");
    if (c.contains("L2")) k.L2 = get<double>(c, "L2");
    if (c.contains("gamma1")) k.gamma1 = get<double>(c, "gamma1");
    if (c.contains("gamma2")) k.gamma2 = get<double>(c, "gamma2");
    if (c.contains("ell1")) k.ell1 = get<double>(c, "ell1");
    if (c.contains("ell2")) k.ell2 = get<double>(c, "ell2");
    spec.constants = k;
  }
  return spec;
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::convergence: return "convergence";
    case ExperimentKind::corollary: return "corollary";
    case ExperimentKind::tails: return "tails";
    case ExperimentKind::malliavin: return "malliavin";
    case ExperimentKind::sigma_limit: return "sigma-limit";
  }
  return "?";
}

Reaction ReactionSpec::build() const {
  try {
    Reaction r = [&] {
      if (name == "allen-cahn") return allen_cahn(lambda);
      if (name == "zero") return zero_reaction();
      if (name == "linear") {
        if (coefficients.size() != 1) throw ConfigError("linear reaction needs one coefficient");
        return linear(coefficients.front());
      }
      if (name == "odd-poly") return odd_poly(coefficients);
      throw ConfigError("unknown reaction '" + name + "'");
    }();
    return constants ? r.with_constants(*constants) : r;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid reaction: ") + e.what());
  }
}

void ExperimentConfig::validate() const {
  reaction.build();
  if (epsilons.empty()) throw ConfigError("epsilons must not be empty");
  for (double e : epsilons) {
    if (!(e > 0.0 && e < 1.0)) throw ConfigError("every epsilon must lie in (0, 1)");
  }
  for (std::size_t k = 1; k < epsilons.size(); ++k) {
    if (!(epsilons[k] < epsilons[k - 1])) throw ConfigError("epsilons must be strictly descending");
  }
  if (!(T > 0.0)) throw ConfigError("T must be positive");
  if (Tprime && !(*Tprime > 0.0 && *Tprime <= T)) throw ConfigError("Tprime must lie in (0, T]");
  if (!(L > 0.0)) throw ConfigError("grid.L must be positive");
  if (n < 8) throw ConfigError("grid.n must be at least 8");
  if (replicas < 1) throw ConfigError("replicas must be at least 1");
  if (experiment == ExperimentKind::tails && replicas < 400) throw ConfigError("tails needs at least 400 replicas");
  if (substeps < 1) throw ConfigError("substeps must be at least 1");
  if (!(dq > 0.0)) throw ConfigError("dq must be positive");
  if (quadrature_nodes < 2) throw ConfigError("quadrature_nodes must be at least 2");
  if (delta && !(*delta > 0.0)) throw ConfigError("delta must be positive");
  if (z_points < 1) throw ConfigError("z_points must be at least 1");
  if (fd_probes < 1) throw ConfigError("fd_probes must be at least 1");
  if (threads < 1) throw ConfigError("threads must be at least 1");
  if (!std::isfinite(mass)) throw ConfigError("m must be finite");
}

json ExperimentConfig::to_json() const {
  json r{{"name", reaction.name}, {"lambda", reaction.lambda}, {"coefficients", reaction.coefficients}};
  if (reaction.constants) {
    const auto& c = *reaction.constants;
    r["constants"] = {{"L1", c.L1}, {"L2", c.L2}, {"gamma1", c.gamma1},
                      {"gamma2", c.gamma2}, {"ell1", c.ell1}, {"ell2", c.ell2}};
  }
  json j{{"experiment", to_string(experiment)},
         {"reaction", r},
         {"epsilons", epsilons},
         {"m", mass},
         {"T", T},
         {"grid", {{"L", L}, {"n", n}}},
         {"replicas", replicas},
         {"seed", seed},
         {"substeps", substeps},
         {"dq", dq},
         {"variance_mode", variance_mode == VarianceMode::grid ? "grid" : "continuum"},
         {"quadrature_nodes", quadrature_nodes},
         {"z_points", z_points},
         {"fd_probes", fd_probes}};
  if (Tprime) j["Tprime"] = *Tprime;
  if (scheme) j["scheme"] = *scheme == NonlinearScheme::rk4 ? "rk4" : "exact-cubic";
  if (delta) j["delta"] = *delta;
  return j;
}

std::string ExperimentConfig::hash() const {
  const std::string text = to_json().dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(j,
                 {"experiment", "reaction", "epsilons", "m", "T", "Tprime", "grid", "replicas", "seed", "substeps",
                  "dq", "variance_mode", "quadrature_nodes", "scheme", "delta", "z_points", "fd_probes", "threads"},
                 "config");
  ExperimentConfig cfg;
  if (j.contains("experiment")) cfg.experiment = parse_kind(get<std::string>(j, "experiment"));
  if (cfg.experiment == ExperimentKind::sigma_limit) cfg.variance_mode = VarianceMode::continuum;
  if (j.contains("reaction")) cfg.reaction = parse_reaction(j.at("reaction"));
  if (j.contains("epsilons")) cfg.epsilons = get<std::vector<double>>(j, "epsilons");
  if (j.contains("m")) cfg.mass = get<double>(j, "m");
  if (j.contains("T")) cfg.T = get<double>(j, "T");
  if (j.contains("Tprime")) cfg.Tprime = get<double>(j, "Tprime");
  if (j.contains("grid")) {
    const json& g = j.at("grid");
    reject_unknown(g, {"L", "n"}, "grid");
    if (g.contains("L")) cfg.L = get<double>(g, "L");
    if (g.contains("n")) cfg.n = get<Index>(g, "n");
  }
  if (j.contains("replicas")) cfg.replicas = get<int>(j, "replicas");
  if (j.contains("seed")) cfg.seed = get<std::uint64_t>(j, "seed");
  if (j.contains("substeps")) cfg.substeps = get<int>(j, "substeps");
  if (j.contains("dq")) cfg.dq = get<double>(j, "dq");
  if (j.contains("variance_mode")) {
    const auto mode = get<std::string>(j, "variance_mode");
    if (mode == "grid") {
      cfg.variance_mode = VarianceMode::grid;
    } else if (mode == "continuum") {
      cfg.variance_mode = VarianceMode::continuum;
    } else {
      throw ConfigError("variance_mode must be 'grid' or 'continuum'");
    }
  }
  if (j.contains("quadrature_nodes")) cfg.quadrature_nodes = get<int>(j, "quadrature_nodes");
  if (j.contains("scheme")) {
    const auto s = get<std::string>(j, "scheme");
    if (s == "rk4") {
      cfg.scheme = NonlinearScheme::rk4;
    } else if (s == "exact-cubic") {
      cfg.scheme = NonlinearScheme::exact_cubic;
    } else {
      throw ConfigError("scheme must be 'rk4' or 'exact-cubic'");
    }
  }
  if (j.contains("delta")) cfg.delta = get<double>(j, "delta");
  if (j.contains("z_points")) cfg.z_points = get<int>(j, "z_points");
  if (j.contains("fd_probes")) cfg.fd_probes = get<int>(j, "fd_probes");
  if (j.contains("threads")) cfg.threads = get<int>(j, "threads");
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  return parse_config(j);
}

}  // namespace critfield
