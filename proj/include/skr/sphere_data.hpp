#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "skr/kernels.hpp"

namespace skr {

/// n points drawn uniformly from the unit sphere S^d in R^{d+1}; one point per row.
struct SphereSample {
  int d = 0;
  Eigen::MatrixXd points;
  std::uint64_t seed = 0;

  Eigen::Index n() const { return points.rows(); }
  Eigen::Index ambient_dim() const { return points.cols(); }
};

/// Gaussian vectors normalized to unit length. Exact zero draws are redrawn.
/// Throws InvalidArgument when d == 0 or n == 0.
SphereSample sample_sphere(int d, int n, std::uint64_t seed);

/// f(x) = sum_i w_i phi(<x, u_i>): a finite combination of kernel sections.
struct TargetFunction {
  Eigen::MatrixXd anchors;  // one unit vector per row
  Eigen::VectorXd weights;
  KernelProfile profile = KernelProfile::ntk2();
  double rkhs_norm_sq = 0.0;  // sum_ij w_i w_j phi(<u_i, u_j>)

  int d() const { return static_cast<int>(anchors.cols()) - 1; }
  double operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  Eigen::VectorXd evaluate(const SphereSample& sample) const;
  /// Same anchors with weights rescaled so that ||f||_H = 1.
  TargetFunction unit_norm() const;
};

/// Anchors uniform on S^d. Weights default to 1 for every anchor.
TargetFunction make_target(const KernelProfile& profile, int d, int n_anchors,
                           std::uint64_t seed,
                           std::optional<std::vector<double>> weights = std::nullopt);

/// y = f*(x) + sigma z with z ~ N(0, 1).
struct Dataset {
  SphereSample sample;
  Eigen::VectorXd responses;
  Eigen::VectorXd f_star;  // f*(x_i), exact
  Eigen::VectorXd noise;   // y_i - f*(x_i)
  double noise_sd = 0.0;
  TargetFunction target;
  std::uint64_t seed = 0;
};

Dataset generate_dataset(const TargetFunction& target, const SphereSample& sample,
                         double noise_sd, std::uint64_t seed);

/// CSV with header x_0,...,x_d,y and shortest round-trip decimal formatting.
void write_dataset_csv(const Dataset& data, std::ostream& out);

struct CsvDataset {
  Eigen::MatrixXd points;
  Eigen::VectorXd responses;
};
CsvDataset read_dataset_csv(std::istream& in);

}  // namespace skr
