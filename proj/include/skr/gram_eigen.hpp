#pragma once

#include <Eigen/Dense>
#include <string>

#include "skr/kernels.hpp"

namespace skr {

/// (1/n) K(X, X) = U diag(lambdas) U^T with lambdas sorted non-increasing.
struct GramEigen {
  Eigen::MatrixXd U;
  Eigen::VectorXd lambdas;
  Eigen::Index n = 0;
  std::string profile_label;
};

/// Full symmetric eigendecomposition of a normalized Gram matrix. Eigenvalues in
/// [-1e-12 lambda_1, 0) are clamped to 0; anything more negative throws NumericError,
/// as does a LAPACK failure. Throws InvalidArgument for an unnormalized input.
GramEigen eigendecompose(const GramMatrix& gram);

/// Same, but eigenvalues only (sorted non-increasing, same clamping).
Eigen::VectorXd gram_eigenvalues(const GramMatrix& gram);

}  // namespace skr
