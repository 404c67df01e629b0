#include "skr/gram_eigen.hpp"

#include <lapacke.h>

#include <algorithm>
#include <string>

#include "skr/errors.hpp"

namespace skr {

namespace {

void check_input(const GramMatrix& gram) {
  if (!gram.normalized) throw InvalidArgument("eigendecompose: Gram matrix must be normalized by 1/n");
  if (gram.entries.rows() != gram.entries.cols() || gram.entries.rows() == 0)
    throw InvalidArgument("eigendecompose: Gram matrix must be square and nonempty");
}

// LAPACK returns ascending order; flip and clamp round-off negatives.
Eigen::VectorXd finish(Eigen::VectorXd& w) {
  const Eigen::Index n = w.size();
  Eigen::VectorXd out = w.reverse();
  const double floor = -1e-12 * std::max(out(0), 0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (out(i) < 0.0) {
      if (out(i) < floor && out(i) < -1e-300)
        throw NumericError("eigendecompose: eigenvalue " + std::to_string(out(i)) +
                           " below the clamping floor; Gram matrix is not PSD");
      out(i) = 0.0;
    }
  }
  return out;
}

Eigen::VectorXd run_dsyevd(Eigen::MatrixXd& a, char jobz) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  Eigen::VectorXd w(n);
  const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, jobz, 'L', n, a.data(), n, w.data());
  if (info != 0) throw NumericError("eigendecompose: dsyevd failed with info=" + std::to_string(info));
  return w;
}

}  // namespace

GramEigen eigendecompose(const GramMatrix& gram) {
  check_input(gram);
  Eigen::MatrixXd a = gram.entries;
  Eigen::VectorXd w = run_dsyevd(a, 'V');
  GramEigen g;
  g.n = a.rows();
  g.lambdas = finish(w);
  g.U = a.rowwise().reverse();
  g.profile_label = gram.source_profile;
  return g;
}

Eigen::VectorXd gram_eigenvalues(const GramMatrix& gram) {
  check_input(gram);
  Eigen::MatrixXd a = gram.entries;
  Eigen::VectorXd w = run_dsyevd(a, 'N');
  return finish(w);
}

}  // namespace skr
