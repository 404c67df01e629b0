#include "skr/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "skr/errors.hpp"
#include "skr/sphere_data.hpp"

namespace skr {

namespace {

constexpr double kDomainSlack = 1e-12;

double ntk2_profile(double t) {
  const double theta = std::acos(t);
  return (std::sin(theta) + 2.0 * (std::numbers::pi - theta) * t) / (2.0 * std::numbers::pi);
}

double horner(const std::vector<double>& a, double t) {
  double acc = 0.0;
  for (auto it = a.rbegin(); it != a.rend(); ++it) acc = acc * t + *it;
  return acc;
}

double evaluate_clamped(const KernelProfile& p, double t) {
  switch (p.kind()) {
    case KernelKind::Ntk2:
      return ntk2_profile(t);
    case KernelKind::RbfSphere:
      // ||x - x'||^2 = 2 - 2t on the sphere, bandwidth 1
      return std::exp(t - 1.0);
    case KernelKind::Taylor:
      return horner(p.taylor_coeffs(), t);
  }
  return 0.0;
}

}  // namespace

std::string_view to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::Ntk2:
      return "ntk2";
    case KernelKind::RbfSphere:
      return "rbf";
    case KernelKind::Taylor:
      return "taylor";
  }
  return "unknown";
}

KernelKind parse_kernel_kind(std::string_view name) {
  if (name == "ntk2" || name == "ntk") return KernelKind::Ntk2;
  if (name == "rbf" || name == "rbf_sphere") return KernelKind::RbfSphere;
  if (name == "taylor") return KernelKind::Taylor;
  throw InvalidArgument("unknown kernel '" + std::string(name) + "' (expected ntk2|rbf|taylor)");
}

KernelProfile KernelProfile::ntk2() { return KernelProfile(KernelKind::Ntk2, "ntk2"); }

KernelProfile KernelProfile::rbf_sphere() { return KernelProfile(KernelKind::RbfSphere, "rbf"); }

KernelProfile KernelProfile::taylor(std::vector<double> coeffs, std::string label,
                                    double tail_bound) {
  if (coeffs.empty()) throw InvalidArgument("taylor profile needs at least one coefficient");
  for (double a : coeffs) {
    if (!std::isfinite(a) || a < 0.0)
      throw InvalidArgument("taylor coefficients must be finite and nonnegative");
  }
  if (!(tail_bound >= 0.0)) throw InvalidArgument("taylor tail bound must be >= 0");
  KernelProfile p(KernelKind::Taylor, std::move(label));
  p.coeffs_ = std::move(coeffs);
  p.tail_bound_ = tail_bound;
  return p;
}

KernelProfile KernelProfile::taylor_all_ones(int degree) {
  if (degree < 0) throw InvalidArgument("taylor degree must be >= 0");
  return taylor(std::vector<double>(static_cast<std::size_t>(degree) + 1, 1.0),
                "taylor_ones_" + std::to_string(degree));
}

double KernelProfile::operator()(double t) const {
  if (!(std::abs(t) <= 1.0 + kDomainSlack))
    throw DomainError("profile argument outside [-1, 1]: " + std::to_string(t));
  return evaluate_clamped(*this, std::clamp(t, -1.0, 1.0));
}

double KernelProfile::kappa() const { return evaluate_clamped(*this, 1.0); }

double phi(const KernelProfile& profile, double t) { return profile(t); }

Eigen::MatrixXd apply_profile(const KernelProfile& profile, const Eigen::MatrixXd& inner) {
  Eigen::MatrixXd out(inner.rows(), inner.cols());
  for (Eigen::Index j = 0; j < inner.cols(); ++j)
    for (Eigen::Index i = 0; i < inner.rows(); ++i) out(i, j) = profile(inner(i, j));
  return out;
}

GramMatrix gram(const KernelProfile& profile, const SphereSample& sample, bool normalized) {
  const Eigen::Index n = sample.n();
  if (n == 0) throw InvalidArgument("gram: empty sample");
  Eigen::MatrixXd inner = sample.points * sample.points.transpose();
  GramMatrix g;
  g.entries.resize(n, n);
  const double diag = profile.kappa();
  for (Eigen::Index j = 0; j < n; ++j) {
    g.entries(j, j) = diag;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double v = profile(inner(i, j));
      g.entries(i, j) = v;
      g.entries(j, i) = v;
    }
  }
  if (normalized) g.entries /= static_cast<double>(n);
  g.normalized = normalized;
  g.source_profile = profile.label();
  return g;
}

Eigen::MatrixXd cross_kernel(const KernelProfile& profile, const SphereSample& queries,
                             const SphereSample& train) {
  if (queries.ambient_dim() != train.ambient_dim())
    throw InvalidArgument("cross_kernel: query dimension " +
                          std::to_string(queries.ambient_dim()) + " != training dimension " +
                          std::to_string(train.ambient_dim()));
  return apply_profile(profile, queries.points * train.points.transpose());
}

}  // namespace skr
