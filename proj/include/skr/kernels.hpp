#pragma once

#include <Eigen/Dense>
#include <string>
#include <string_view>
#include <vector>

namespace skr {

struct SphereSample;

enum class KernelKind { Ntk2, RbfSphere, Taylor };

std::string_view to_string(KernelKind kind);
/// Accepts "ntk2"/"ntk", "rbf", "taylor".
KernelKind parse_kernel_kind(std::string_view name);

/// Inner-product kernel profile: K(x, x') = phi(<x, x'>) on the unit sphere.
///
/// NTK2 is the two-layer ReLU neural tangent kernel, RBF_SPHERE the Gaussian
/// kernel with unit bandwidth restricted to the sphere (exp(t - 1)), and TAYLOR a
/// truncated power series sum_j a_j t^j with nonnegative coefficients.
class KernelProfile {
 public:
  static KernelProfile ntk2();
  static KernelProfile rbf_sphere();
  /// Throws InvalidArgument for an empty list or a negative coefficient.
  /// `tail_bound` is the caller's bound on |sum_{j>J} a_j| for the discarded series tail.
  static KernelProfile taylor(std::vector<double> coeffs, std::string label = "taylor",
                              double tail_bound = 0.0);
  /// a_j = 1 for j = 0..degree.
  static KernelProfile taylor_all_ones(int degree);

  KernelKind kind() const { return kind_; }
  const std::string& label() const { return label_; }
  const std::vector<double>& taylor_coeffs() const { return coeffs_; }
  double tail_bound() const { return tail_bound_; }

  /// phi(t). Inputs within 1e-12 of [-1, 1] are clamped; farther out throws DomainError.
  double operator()(double t) const;
  /// phi(1) = max_x K(x, x).
  double kappa() const;

 private:
  KernelProfile(KernelKind kind, std::string label) : kind_(kind), label_(std::move(label)) {}

  KernelKind kind_;
  std::string label_;
  std::vector<double> coeffs_;
  double tail_bound_ = 0.0;
};

double phi(const KernelProfile& profile, double t);

struct GramMatrix {
  Eigen::MatrixXd entries;
  bool normalized = false;
  std::string source_profile;

  Eigen::Index size() const { return entries.rows(); }
};

/// K(X, X), optionally scaled by 1/n. The diagonal is evaluated at exactly t = 1.
GramMatrix gram(const KernelProfile& profile, const SphereSample& sample, bool normalized);

/// m x n matrix of phi(<q_i, x_j>). Throws InvalidArgument on a dimension mismatch.
Eigen::MatrixXd cross_kernel(const KernelProfile& profile, const SphereSample& queries,
                             const SphereSample& train);

/// Applies phi entrywise to a matrix of inner products.
Eigen::MatrixXd apply_profile(const KernelProfile& profile, const Eigen::MatrixXd& inner);

}  // namespace skr
