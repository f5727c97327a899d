#include "critfield/reaction.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace critfield {

Reaction::Reaction(std::string name, std::optional<Part> lipschitz_part, std::optional<Part> monotone_part,
                   ClassConstants constants, bool self_similar)
    : name_(std::move(name)),
      lipschitz_(std::move(lipschitz_part)),
      monotone_(std::move(monotone_part)),
      constants_(constants),
      self_similar_(self_similar) {
  const auto& c = constants_;
  if (c.L1 < 0 || c.L2 < 0 || c.ell1 < 0 || c.ell2 < 0) {
    throw std::invalid_argument("reaction class constants must be non-negative");
  }
  if (monotone_ && (c.gamma1 < 2.0 || c.gamma2 < 1.0)) {
    throw std::invalid_argument("monotone part needs gamma1 >= 2 and gamma2 >= 1");
  }
}

double Reaction::F(double t, double w) const {
  double out = 0.0;
  if (lipschitz_) out += lipschitz_->value(t, w);
  if (monotone_) out += monotone_->value(t, w);
  return out;
}

double Reaction::F_prime(double t, double w) const {
  double out = 0.0;
  if (lipschitz_) out += lipschitz_->derivative(t, w);
  if (monotone_) out += monotone_->derivative(t, w);
  return out;
}

Reaction Reaction::with_cubic_coefficient(double a) const {
  Reaction out = *this;
  out.cubic_ = a;
  return out;
}

Reaction Reaction::with_constants(ClassConstants c) const {
  Reaction out(name_, lipschitz_, monotone_, c, self_similar_);
  out.cubic_ = cubic_;
  return out;
}

Reaction Reaction::with_name(std::string name) const {
  Reaction out = *this;
  out.name_ = std::move(name);
  return out;
}

bool Reaction::in_restricted_class() const {
  return !monotone_ || (constants_.gamma2 < 2.0 && constants_.gamma1 < 3.0);
}

double eval_f(const Reaction& r, double t, double u) {
  if (!(t > 0.0)) throw std::invalid_argument("eval_f needs t > 0");
  const double s = std::sqrt(t);
  return r.F(t, s * u) / (t * s);
}

double eval_f_prime(const Reaction& r, double t, double u) {
  if (!(t > 0.0)) throw std::invalid_argument("eval_f_prime needs t > 0");
  return r.F_prime(t, std::sqrt(t) * u) / t;
}

Reaction zero_reaction() {
  return Reaction("zero", std::nullopt, std::nullopt, ClassConstants{}, true);
}

Reaction allen_cahn(double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("allen_cahn needs lambda > 0");
  return odd_poly({0.0, lambda * lambda}).with_cubic_coefficient(lambda * lambda).with_name("allen-cahn");
}

Reaction linear(double coefficient) {
  Reaction::Part part{[coefficient](double, double w) { return coefficient * w; },
                      [coefficient](double, double) { return coefficient; }};
  ClassConstants c;
  c.L1 = std::abs(coefficient);
  return Reaction("linear", part, std::nullopt, c, true);
}

Reaction odd_poly(std::vector<double> coefficients) {
  if (coefficients.empty()) throw std::invalid_argument("odd_poly needs at least one coefficient");
  for (std::size_t k = 1; k < coefficients.size(); ++k) {
    if (coefficients[k] < 0.0) {
      throw std::invalid_argument("odd_poly coefficients beyond the linear term must be non-negative");
    }
  }
  while (coefficients.size() > 1 && coefficients.back() == 0.0) coefficients.pop_back();

  std::optional<Reaction::Part> lipschitz;
  ClassConstants c;
  const double a0 = coefficients.front();
  if (a0 != 0.0) {
    lipschitz = Reaction::Part{[a0](double, double w) { return a0 * w; }, [a0](double, double) { return a0; }};
    c.L1 = std::abs(a0);
  }

  std::optional<Reaction::Part> monotone;
  const std::size_t top = coefficients.size() - 1;
  if (top >= 1) {
    std::vector<double> a(coefficients.begin(), coefficients.end());
    a[0] = 0.0;
    // Horner in w^2
    auto value = [a](double, double w) {
      const double w2 = w * w;
      double acc = 0.0;
      for (std::size_t k = a.size(); k-- > 1;) acc = acc * w2 + a[k];
      return acc * w2 * w;
    };
    auto derivative = [a](double, double w) {
      const double w2 = w * w;
      double acc = 0.0;
      for (std::size_t k = a.size(); k-- > 1;) acc = acc * w2 + static_cast<double>(2 * k + 1) * a[k];
      return acc * w2;
    };
    monotone = Reaction::Part{value, derivative};
    // w^{2k} <= 1 + w^{2K} for 1 <= k <= K, likewise for the odd powers.
    c.gamma1 = static_cast<double>(2 * top);
    c.gamma2 = static_cast<double>(2 * top - 1);
    for (std::size_t k = 1; k <= top; ++k) {
      c.ell1 += static_cast<double>(2 * k + 1) * a[k];
      c.ell2 += static_cast<double>((2 * k + 1) * (2 * k)) * a[k];
    }
  }
  return Reaction("odd-poly", lipschitz, monotone, c, true);
}

Reaction cutoff(const Reaction& r, double g) {
  if (!(g > 0.0)) throw std::invalid_argument("cutoff level must be positive");
  const auto& c = r.constants();
  ClassConstants out;
  out.L1 = c.L1;
  out.L2 = c.L2;
  std::optional<Reaction::Part> lipschitz = r.lipschitz_part();
  if (r.monotone_part()) {
    const Reaction::Part m = *r.monotone_part();
    out.L1 += c.ell1 * (1.0 + std::pow(g, c.gamma1));
    out.L2 += c.ell2 * (1.0 + std::pow(g, c.gamma2));
    // int_0^w F2'(|p| ^ g) dp, continued linearly past |w| = g
    Reaction::Part frozen{
        [m, g](double t, double w) {
          if (std::abs(w) <= g) return m.value(t, w);
          const double s = std::copysign(1.0, w);
          return s * (m.value(t, g) + m.derivative(t, g) * (std::abs(w) - g));
        },
        [m, g](double t, double w) { return m.derivative(t, std::min(std::abs(w), g)); }};
    if (lipschitz) {
      const Reaction::Part l = *lipschitz;
      lipschitz = Reaction::Part{
          [l, frozen](double t, double w) { return l.value(t, w) + frozen.value(t, w); },
          [l, frozen](double t, double w) { return l.derivative(t, w) + frozen.derivative(t, w); }};
    } else {
      lipschitz = frozen;
    }
  }
  return Reaction(r.name() + "-cutoff", lipschitz, std::nullopt, out, r.self_similar());
}

std::string ClassReport::summary() const {
  std::ostringstream os;
  auto line = [&os](const char* what, const Violation& v) {
    os << what << ": " << v.amount << " at (t=" << v.t << ", w=" << v.w << ")\n";
  };
  os << (passed ? "class check passed" : "class check FAILED") << " (slack " << slack << ")\n";
  line("oddness", oddness);
  line("monotonicity", monotonicity);
  line("lipschitz F", value_lipschitz);
  line("lipschitz F'", derivative_lipschitz);
  return os.str();
}

ClassReport verify_class(const Reaction& r, std::span<const double> t_samples, std::span<const double> w_samples) {
  ClassReport report;
  report.oddness.amount = report.monotonicity.amount = -1.0;
  report.value_lipschitz.amount = report.derivative_lipschitz.amount = -1.0;
  if (t_samples.empty() || w_samples.empty()) return report;

  std::vector<double> ws(w_samples.begin(), w_samples.end());
  std::sort(ws.begin(), ws.end());
  ws.erase(std::unique(ws.begin(), ws.end()), ws.end());

  const auto& c = r.constants();
  const bool monotone = r.has_monotone_part();
  auto value_bound = [&](double u) { return c.L1 + (monotone ? c.ell1 * (1.0 + std::pow(u, c.gamma1)) : 0.0); };
  auto deriv_bound = [&](double u) { return c.L2 + (monotone ? c.ell2 * (1.0 + std::pow(u, c.gamma2)) : 0.0); };
  auto record = [](Violation& v, double amount, double t, double w) {
    if (amount > v.amount) v = {amount, t, w};
  };

  for (double t : t_samples) {
    for (double w : ws) {
      const double fp = r.F(t, w);
      const double fm = r.F(t, -w);
      record(report.oddness, std::abs(fp + fm) - report.slack * (1.0 + std::abs(fp)), t, w);
      if (monotone) record(report.monotonicity, -r.monotone_part()->derivative(t, w) - report.slack, t, w);
      const double b = value_bound(std::abs(w));
      record(report.value_lipschitz, std::abs(r.F_prime(t, w)) - b - report.slack * std::max(1.0, b), t, w);
    }
    for (std::size_t k = 0; k + 1 < ws.size(); ++k) {
      const double a = ws[k];
      const double b = ws[k + 1];
      const double u = std::max(std::abs(a), std::abs(b));
      const double dw = b - a;
      const double qf = std::abs(r.F(t, b) - r.F(t, a)) / dw;
      const double qd = std::abs(r.F_prime(t, b) - r.F_prime(t, a)) / dw;
      const double vb = value_bound(u);
      const double db = deriv_bound(u);
      record(report.value_lipschitz, qf - vb - report.slack * std::max(1.0, vb), t, b);
      record(report.derivative_lipschitz, qd - db - report.slack * std::max(1.0, db), t, b);
    }
  }
  report.passed = report.oddness.amount <= 0 && report.monotonicity.amount <= 0 &&
                  report.value_lipschitz.amount <= 0 && report.derivative_lipschitz.amount <= 0;
  return report;
}

}  // namespace critfield
