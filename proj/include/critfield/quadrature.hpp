#pragma once

#include <cmath>
#include <optional>

#include <Eigen/Dense>

#include "critfield/grid.hpp"
#include "critfield/reaction.hpp"

namespace critfield {

/// Gauss-Hermite rule for the standard normal: E[g(Z)] ~ sum_i w_i g(x_i),
/// exact for polynomials of degree <= 2N - 1.
template <typename Scalar>
class GaussHermiteRule {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  explicit GaussHermiteRule(int nodes = 64);

  int size() const { return static_cast<int>(nodes_.size()); }
  const Vector& nodes() const { return nodes_; }
  const Vector& weights() const { return weights_; }

  /// E[g(X)] for X ~ N(0, variance).
  template <typename Fn>
  Scalar expect(Fn&& g, Scalar variance) const {
    const Scalar sd = std::sqrt(variance);
    Scalar acc = 0;
    for (Eigen::Index i = 0; i < nodes_.size(); ++i) acc += weights_(i) * g(sd * nodes_(i));
    return acc;
  }

 private:
  Vector nodes_;
  Vector weights_;
};

using QuadratureRule = GaussHermiteRule<double>;

/// E[F'(t, scale * X)] for X ~ N(0, variance).
double expect_F_prime(const Reaction& r, double t, double scale, double variance, const QuadratureRule& rule);

enum class VarianceMode { continuum, grid };

/// Variance of G_{t_eff} * eta at a point: 1/(4 pi t_eff) in the continuum,
/// the grid mode sum otherwise (grid required).
double variance_for_sigma_ode(VarianceMode mode, const std::optional<TorusGrid>& grid, double t_eff);

// -- implementation -----------------------------------------------------------

template <typename Scalar>
GaussHermiteRule<Scalar>::GaussHermiteRule(int nodes) {
  if (nodes < 1) throw std::invalid_argument("quadrature needs at least one node");
  const Eigen::Index n = nodes;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  // Golub-Welsch on the Jacobi matrix of the probabilists' Hermite recurrence.
  Vector diag = Vector::Zero(n);
  Vector sub(std::max<Eigen::Index>(n - 1, 1));
  for (Eigen::Index k = 1; k < n; ++k) sub(k - 1) = std::sqrt(static_cast<Scalar>(k));
  Eigen::SelfAdjointEigenSolver<Matrix> solver;
  solver.computeFromTridiagonal(diag, sub.head(n - 1), Eigen::EigenvaluesOnly);
  nodes_ = solver.eigenvalues();

  // Orthonormal recurrence p_{k+1} = (x p_k - sqrt(k) p_{k-1}) / sqrt(k+1).
  auto evaluate = [n](Scalar x, Scalar& pn, Scalar& pn1, Scalar& christoffel) {
    Scalar prev = 0, cur = 1;
    christoffel = 1;
    for (Eigen::Index k = 0; k < n; ++k) {
      const Scalar next = (x * cur - std::sqrt(static_cast<Scalar>(k)) * prev) / std::sqrt(static_cast<Scalar>(k + 1));
      prev = cur;
      cur = next;
      if (k + 1 < n) christoffel += cur * cur;
    }
    pn = cur;
    pn1 = prev;
  };

  weights_.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Scalar x = nodes_(i), pn, pn1, sum;
    for (int iter = 0; iter < 3; ++iter) {
      evaluate(x, pn, pn1, sum);
      x -= pn / (std::sqrt(static_cast<Scalar>(n)) * pn1);
    }
    evaluate(x, pn, pn1, sum);
    nodes_(i) = x;
    weights_(i) = 1 / sum;
  }
  // exact symmetry about zero
  for (Eigen::Index i = 0; i < n / 2; ++i) {
    const Eigen::Index j = n - 1 - i;
    const Scalar x = (nodes_(j) - nodes_(i)) / 2;
    const Scalar w = (weights_(i) + weights_(j)) / 2;
    nodes_(i) = -x;
    nodes_(j) = x;
    weights_(i) = weights_(j) = w;
  }
  if (n % 2 == 1) nodes_(n / 2) = 0;
  weights_ /= weights_.sum();
}

}  // namespace critfield
