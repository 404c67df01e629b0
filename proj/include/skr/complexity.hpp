#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "skr/gram_eigen.hpp"
#include "skr/spectrum.hpp"

namespace skr {

enum class MendelsonKind { Population, Empirical };
std::string_view to_string(MendelsonKind kind);

struct MendelsonSolution {
  MendelsonKind kind = MendelsonKind::Population;
  double epsilon = 0.0;
  double epsilon_sq = 0.0;
  double stopping_time = 0.0;  // 1 / epsilon^2
  double residual = 0.0;       // |R(eps) - eps^2 / (2 e sigma)|
  double sigma = 1.0;
  double n = 0.0;
};

/// Eigenvalues with multiplicities, stored so that huge counts with tiny values stay finite.
/// `tail_mass` is the summed mass of eigenvalues beyond the listed ones; it is treated as
/// lying below any radius the solver visits.
struct WeightedEigenvalues {
  std::vector<double> values;  // non-increasing
  std::vector<double> counts;
  std::vector<double> masses;  // value * count, computed in the log domain
  double tail_mass = 0.0;

  static WeightedEigenvalues from_sequence(std::span<const double> eigvals);
  static WeightedEigenvalues from_spectrum(const Spectrum& spectrum);
  double max_value() const { return values.empty() ? 0.0 : values.front(); }
  double total_mass() const;
};

/// [(1/n) sum_j min{lambda_j, eps^2}]^{1/2}. Throws InvalidArgument for eigenvalues
/// below -1e-12 (smaller negatives count as 0).
double r_function(std::span<const double> eigvals, double n, double eps);
/// Multiplicity-weighted form sum_k N(d,k) min{mu_k, eps^2}, plus the truncated tail.
double r_function(const Spectrum& spectrum, double n, double eps);
double r_function(const WeightedEigenvalues& eig, double n, double eps);

/// Root of R(eps) = eps^2 / (2 e sigma) by bisection, then an exact solve of the
/// quadratic on the linear piece of R^2 containing the root. `bracket` overrides the
/// default initial bracket; it is widened geometrically when the sign test fails.
MendelsonSolution solve_mendelson(const WeightedEigenvalues& eig, double n, double sigma,
                                  std::optional<std::pair<double, double>> bracket = std::nullopt,
                                  MendelsonKind kind = MendelsonKind::Population);
MendelsonSolution solve_mendelson(std::span<const double> eigvals, double n, double sigma,
                                  std::optional<std::pair<double, double>> bracket = std::nullopt);
MendelsonSolution population_mendelson(const Spectrum& spectrum, double n, double sigma);
MendelsonSolution empirical_mendelson(const GramEigen& eig, double sigma);

double stopping_time(const MendelsonSolution& solution);

/// sup over g in the unit RKHS ball with ||g||_n <= t of |(1/n) sum_i w_i g(x_i)|,
/// solved through its one-dimensional dual.
double rademacher_z(const GramEigen& eig, const Eigen::VectorXd& w, double t);
/// Same from eigenvalues and the projections U^T w.
double rademacher_z(const Eigen::VectorXd& lambdas, const Eigen::VectorXd& projected_w,
                    double n, double t);

struct RademacherEstimate {
  double t = 0.0;
  double q_hat = 0.0;
  double std_err = 0.0;
  int draws = 0;
  double r_hat = 0.0;  // R_hat_K(t) from the same eigenvalues
};

RademacherEstimate rademacher_estimate(const GramEigen& eig, double t, int draws,
                                       std::uint64_t seed);

}  // namespace skr
