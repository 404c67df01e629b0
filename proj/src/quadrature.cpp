#include "skr/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <numbers>

#include "skr/errors.hpp"

namespace skr {

namespace {

// Recurrence for the orthonormal Jacobi polynomials: t p_k = b_{k+1} p_{k+1} + a_k p_k + b_k p_{k-1}.
struct JacobiCoefficients {
  std::vector<double> a;  // diagonal, size n
  std::vector<double> b;  // b[k] couples p_{k-1} and p_k, k = 1..n (b[0] unused)
};

JacobiCoefficients jacobi_coefficients(int n, double alpha, double beta) {
  JacobiCoefficients c;
  c.a.resize(n);
  c.b.assign(n + 1, 0.0);
  const double ab = alpha + beta;
  for (int k = 0; k < n; ++k) {
    const double s = 2.0 * k + ab;
    if (k == 0) {
      c.a[k] = (beta - alpha) / (ab + 2.0);
    } else {
      c.a[k] = (beta * beta - alpha * alpha) / (s * (s + 2.0));
    }
  }
  for (int k = 1; k <= n; ++k) {
    const double s = 2.0 * k + ab;
    double b2;
    if (k == 1) {
      b2 = 4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab) * (2.0 + ab) * (3.0 + ab));
    } else {
      b2 = 4.0 * k * (k + alpha) * (k + beta) * (k + ab) / (s * s * (s + 1.0) * (s - 1.0));
    }
    c.b[k] = std::sqrt(b2);
  }
  return c;
}

// Orthonormal p_n(x) and p_n'(x); also returns sum_{k<n} p_k(x)^2 for the Christoffel weight.
struct Evaluated {
  double p = 0.0;
  double dp = 0.0;
  double sum_sq = 0.0;
};

Evaluated evaluate(const JacobiCoefficients& c, int n, double x) {
  double pm1 = 0.0, p = 1.0;
  double dpm1 = 0.0, dp = 0.0;
  double sum_sq = 0.0;
  for (int k = 0; k < n; ++k) {
    sum_sq += p * p;
    const double bk = k > 0 ? c.b[k] : 0.0;
    const double pn = ((x - c.a[k]) * p - bk * pm1) / c.b[k + 1];
    const double dpn = (p + (x - c.a[k]) * dp - bk * dpm1) / c.b[k + 1];
    pm1 = p;
    p = pn;
    dpm1 = dp;
    dp = dpn;
    if (std::abs(p) > 1e150) {
      // far tail of a concentrated weight: the Christoffel weight underflows to 0
      return {p / std::abs(p), dp / std::abs(p), std::numeric_limits<double>::infinity()};
    }
  }
  return {p, dp, sum_sq};
}

}  // namespace

double log_jacobi_mass(double alpha, double beta) {
  return (alpha + beta + 1.0) * std::numbers::ln2 + std::lgamma(alpha + 1.0) +
         std::lgamma(beta + 1.0) - std::lgamma(alpha + beta + 2.0);
}

double log_sphere_ratio(int d) {
  return std::lgamma((d + 1) / 2.0) - 0.5 * std::log(std::numbers::pi) - std::lgamma(d / 2.0);
}

QuadratureRule gauss_jacobi(int n, double alpha, double beta) {
  if (n < 1) throw InvalidArgument("gauss_jacobi: n must be >= 1");
  if (!(alpha > -1.0) || !(beta > -1.0))
    throw InvalidArgument("gauss_jacobi: exponents must exceed -1");
  const JacobiCoefficients c = jacobi_coefficients(n, alpha, beta);

  Eigen::VectorXd diag(n);
  Eigen::VectorXd sub(std::max(n - 1, 0));
  for (int k = 0; k < n; ++k) diag(k) = c.a[k];
  for (int k = 1; k < n; ++k) sub(k - 1) = c.b[k];

  QuadratureRule rule;
  rule.alpha = alpha;
  rule.beta = beta;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  if (n == 1) {
    rule.nodes[0] = c.a[0];
    rule.weights[0] = 1.0;
    return rule;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw NumericError("gauss_jacobi: tridiagonal eigensolver failed for n=" + std::to_string(n));

  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    double x = solver.eigenvalues()(i);
    for (int it = 0; it < 2; ++it) {
      const Evaluated e = evaluate(c, n, x);
      if (e.dp == 0.0) break;
      const double step = e.p / e.dp;
      if (!std::isfinite(step) || std::abs(step) > 1e-6) break;
      x -= step;
    }
    const Evaluated e = evaluate(c, n, x);
    rule.nodes[i] = x;
    rule.weights[i] = e.sum_sq > 0.0 && std::isfinite(e.sum_sq) ? 1.0 / e.sum_sq : 0.0;
    total += rule.weights[i];
  }
  for (double& w : rule.weights) w /= total;
  return rule;
}

}  // namespace skr
