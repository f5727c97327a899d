#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace critfield {

/// F(t, w) or one of its w-derivatives.
using ScalarFn = std::function<double(double t, double w)>;

/// Constants of the two reaction classes. The globally Lipschitz part F1
/// obeys Lip F1 <= L1 and Lip F1' <= L2; the increasing part F2 obeys
/// Lip F2|[0,u] <= ell1 (1 + u^gamma1) and Lip F2'|[0,u] <= ell2 (1 + u^gamma2).
struct ClassConstants {
  double L1 = 0.0;
  double L2 = 0.0;
  double gamma1 = 2.0;
  double gamma2 = 1.0;
  double ell1 = 0.0;
  double ell2 = 0.0;
};

/// An odd nonlinearity F = F1 + F2 given as evaluators plus class metadata.
/// Immutable; the evaluators must be pure.
class Reaction {
 public:
  struct Part {
    ScalarFn value;
    ScalarFn derivative;
  };

  Reaction(std::string name, std::optional<Part> lipschitz_part, std::optional<Part> monotone_part,
           ClassConstants constants, bool self_similar);

  const std::string& name() const { return name_; }
  const ClassConstants& constants() const { return constants_; }
  bool self_similar() const { return self_similar_; }

  double F(double t, double w) const;
  double F_prime(double t, double w) const;

  bool has_lipschitz_part() const { return lipschitz_.has_value(); }
  bool has_monotone_part() const { return monotone_.has_value(); }
  const std::optional<Part>& lipschitz_part() const { return lipschitz_; }
  const std::optional<Part>& monotone_part() const { return monotone_; }

  /// Set when F(t, w) = a w^3 exactly; enables the closed-form substep.
  std::optional<double> cubic_coefficient() const { return cubic_; }
  Reaction with_cubic_coefficient(double a) const;

  /// Convergence runs need gamma2 < 2 (and so gamma1 < 3) for the
  /// monotone part.
  bool in_restricted_class() const;

  Reaction with_constants(ClassConstants c) const;
  Reaction with_name(std::string name) const;

 private:
  std::string name_;
  std::optional<Part> lipschitz_;
  std::optional<Part> monotone_;
  ClassConstants constants_;
  bool self_similar_;
  std::optional<double> cubic_;
};

/// f(t, u) = t^{-3/2} F(t, sqrt(t) u); requires t > 0.
double eval_f(const Reaction& r, double t, double u);
/// f'(t, u) = t^{-1} F'(t, sqrt(t) u); requires t > 0.
double eval_f_prime(const Reaction& r, double t, double u);

Reaction zero_reaction();
/// F(w) = lambda^2 w^3.
Reaction allen_cahn(double lambda);
/// F(w) = c w, globally Lipschitz with L1 = |c|.
Reaction linear(double coefficient);
/// F(w) = sum_k a_k w^{2k+1}. The linear term goes to the Lipschitz part,
/// higher terms (which must be non-negative) to the monotone part.
Reaction odd_poly(std::vector<double> coefficients);

/// Freezes F2' outside |w| <= g. The result agrees with r for |w| <= g and is
/// globally Lipschitz with L1 + ell1 (1 + g^gamma1), L2 + ell2 (1 + g^gamma2).
Reaction cutoff(const Reaction& r, double g);

struct Violation {
  double amount = 0.0;  // how far past the allowed bound (<= 0 means fine)
  double t = 0.0;
  double w = 0.0;
};

struct ClassReport {
  Violation oddness;
  Violation monotonicity;
  Violation value_lipschitz;
  Violation derivative_lipschitz;
  double slack = 1e-9;
  bool passed = true;

  std::string summary() const;
};

/// Sampling check of the class conditions over t_samples x w_samples.
/// Lipschitz conditions use difference quotients between neighbouring
/// w-samples (sorted internally).
ClassReport verify_class(const Reaction& r, std::span<const double> t_samples,
                         std::span<const double> w_samples);

}  // namespace critfield
