#pragma once

#include <vector>

namespace skr {

/// Gauss rule for the weight (1 - t)^alpha (1 + t)^beta on [-1, 1].
/// Weights are normalized to sum to 1, so the rule integrates against the
/// probability measure proportional to the Jacobi weight.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  double alpha = 0.0;
  double beta = 0.0;

  std::size_t size() const { return nodes.size(); }
};

/// n-point Gauss-Jacobi rule via the Golub-Welsch eigenvalue problem, with the
/// weights taken from the Christoffel function and nodes polished by Newton.
/// Requires alpha, beta > -1 and n >= 1.
QuadratureRule gauss_jacobi(int n, double alpha, double beta);

/// log of int_{-1}^{1} (1 - t)^alpha (1 + t)^beta dt.
double log_jacobi_mass(double alpha, double beta);

/// log(omega_{d-1} / omega_d) = log Gamma((d+1)/2) - log sqrt(pi) - log Gamma(d/2):
/// the normalizing constant of the projected surface measure on S^d.
double log_sphere_ratio(int d);

}  // namespace skr
