#include "skr/regression.hpp"

#include <cmath>

#include "skr/errors.hpp"

namespace skr {

namespace {

// e^{-t lambda}, with the t = inf convention e^{-inf * 0} = 1 on the null space
double decay(double lambda, double t) {
  if (lambda <= 0.0) return 1.0;
  if (std::isinf(t)) return 0.0;
  return std::exp(-t * lambda);
}

}  // namespace

double flow_filter(double lambda, double t) {
  if (lambda <= 0.0) return t;
  const double x = t * lambda;
  if (x < 1e-8) return t * (1.0 - 0.5 * x);  // series, avoids cancellation
  return -std::expm1(-x) / lambda;
}

FlowPredictor fit_flow(std::shared_ptr<const GramEigen> eig, const SphereSample& train,
                       const KernelProfile& profile, const Eigen::VectorXd& y, double t) {
  if (!eig) throw InvalidArgument("fit_flow: missing eigendecomposition");
  if (!(t >= 0.0)) throw InvalidArgument("fit_flow: t must be >= 0");
  const Eigen::Index n = eig->n;
  if (y.size() != n || train.n() != n)
    throw InvalidArgument("fit_flow: responses, sample and Gram matrix sizes differ");

  FlowPredictor f;
  f.gram_eigen = eig;
  f.train = train;
  f.profile = profile;
  f.y = y;
  f.t = t;
  f.mode = std::isinf(t) ? FlowMode::Interpolation : FlowMode::Flow;

  const Eigen::VectorXd& lam = eig->lambdas;
  Eigen::VectorXd d(n), fit(n);
  if (f.mode == FlowMode::Interpolation) {
    const double lmax = lam.size() ? lam(0) : 0.0;
    f.ill_conditioned = lmax <= 0.0 || lam(n - 1) / lmax < 1e-14;
    f.jitter = 1e-12 * lam.sum();
    for (Eigen::Index j = 0; j < n; ++j) {
      const double l = lam(j) + f.jitter;
      d(j) = l > 0.0 ? 1.0 / l : 0.0;
      fit(j) = lam(j) * d(j);
    }
  } else {
    for (Eigen::Index j = 0; j < n; ++j) {
      d(j) = flow_filter(lam(j), t);
      fit(j) = lam(j) > 0.0 ? -std::expm1(-t * lam(j)) : 0.0;
    }
  }
  const Eigen::VectorXd uty = eig->U.transpose() * y;
  f.dual_weights = eig->U * (d.cwiseProduct(uty)) / static_cast<double>(n);
  f.train_predictions = eig->U * (fit.cwiseProduct(uty));
  return f;
}

Eigen::VectorXd predict(const FlowPredictor& predictor, const Eigen::MatrixXd& cross) {
  if (cross.cols() != predictor.dual_weights.size())
    throw InvalidArgument("predict: cross-kernel has the wrong number of columns");
  return cross * predictor.dual_weights;
}

Eigen::VectorXd predict(const FlowPredictor& predictor, const SphereSample& queries) {
  return predict(predictor, cross_kernel(predictor.profile, queries, predictor.train));
}

FlowDiagnostics diagnostics(const GramEigen& eig, const Eigen::VectorXd& y,
                            const Eigen::VectorXd& f_star_values, double t) {
  if (!(t >= 0.0)) throw InvalidArgument("diagnostics: t must be >= 0");
  const Eigen::Index n = eig.n;
  if (y.size() != n || f_star_values.size() != n)
    throw InvalidArgument("diagnostics: vector lengths must equal n");
  const Eigen::VectorXd g = eig.U.transpose() * f_star_values;
  const Eigen::VectorXd e = eig.U.transpose() * (y - f_star_values);
  FlowDiagnostics out;
  out.t = t;
  double b = 0.0, v = 0.0;
  Eigen::VectorXd resid(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double dj = decay(eig.lambdas(j), t);
    b += dj * dj * g(j) * g(j);
    v += (1.0 - dj) * (1.0 - dj) * e(j) * e(j);
    resid(j) = (1.0 - dj) * (g(j) + e(j)) - g(j);
  }
  out.bias_sq = 2.0 * b / static_cast<double>(n);
  out.variance = 2.0 * v / static_cast<double>(n);
  out.empirical_risk = resid.squaredNorm() / static_cast<double>(n);
  return out;
}

double excess_risk(const Eigen::VectorXd& predictions, const Eigen::VectorXd& target_values) {
  if (predictions.size() != target_values.size() || predictions.size() == 0)
    throw InvalidArgument("excess_risk: need equal, nonzero lengths");
  return (predictions - target_values).squaredNorm() / static_cast<double>(predictions.size());
}

double excess_risk(const FlowPredictor& predictor, const TargetFunction& target,
                   const SphereSample& test) {
  return excess_risk(predict(predictor, test), target.evaluate(test));
}

}  // namespace skr
