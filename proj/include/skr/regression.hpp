#pragma once

#include <Eigen/Dense>
#include <limits>
#include <memory>

#include "skr/gram_eigen.hpp"
#include "skr/kernels.hpp"
#include "skr/sphere_data.hpp"

namespace skr {

inline constexpr double kInfiniteTime = std::numeric_limits<double>::infinity();

enum class FlowMode { Flow, Interpolation };

/// f_t(x) = sum_i alpha_i K(x, x_i), the gradient-flow iterate started at f_0 = 0.
struct FlowPredictor {
  std::shared_ptr<const GramEigen> gram_eigen;
  SphereSample train;
  KernelProfile profile = KernelProfile::ntk2();
  Eigen::VectorXd y;
  double t = 0.0;
  Eigen::VectorXd dual_weights;
  Eigen::VectorXd train_predictions;  // U (I - e^{-t Sigma}) U^T y
  FlowMode mode = FlowMode::Flow;
  double jitter = 0.0;          // added to every eigenvalue for t = inf
  bool ill_conditioned = false;  // lambda_min / lambda_max < 1e-14 before jitter
};

/// (1 - e^{-t lambda}) / lambda, equal to t in the lambda -> 0 limit.
double flow_filter(double lambda, double t);

/// t = kInfiniteTime gives kernel interpolation with a 1e-12 trace jitter.
/// Throws InvalidArgument for t < 0 or a length mismatch.
FlowPredictor fit_flow(std::shared_ptr<const GramEigen> eig, const SphereSample& train,
                       const KernelProfile& profile, const Eigen::VectorXd& y, double t);

Eigen::VectorXd predict(const FlowPredictor& predictor, const SphereSample& queries);
/// Predictions from a precomputed cross-kernel matrix K(queries, train).
Eigen::VectorXd predict(const FlowPredictor& predictor, const Eigen::MatrixXd& cross);

struct FlowDiagnostics {
  double t = 0.0;
  double bias_sq = 0.0;         // (2/n) ||e^{-t Sigma} U^T f*(X)||^2
  double variance = 0.0;        // (2/n) ||(I - e^{-t Sigma}) U^T (y - f*(X))||^2
  double empirical_risk = 0.0;  // (1/n) ||f_t(X) - f*(X)||^2
};

FlowDiagnostics diagnostics(const GramEigen& eig, const Eigen::VectorXd& y,
                            const Eigen::VectorXd& f_star_values, double t);

/// Mean of (f_t(z) - f*(z))^2 over the test sample.
double excess_risk(const FlowPredictor& predictor, const TargetFunction& target,
                   const SphereSample& test);
double excess_risk(const Eigen::VectorXd& predictions, const Eigen::VectorXd& target_values);

}  // namespace skr
