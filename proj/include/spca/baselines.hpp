#pragma once

#include <algorithm>
#include <cstdint>

#include "spca/linalg.hpp"
#include "spca/projection.hpp"
#include "spca/spca.hpp"
#include "spca/types.hpp"

namespace spca {

struct PcaModel {
  ProjectionBasis basis;
  Vector mean;
};

/// Classical PCA: training mean and the top-k eigenvectors of the centered
/// covariance, in descending eigenvalue order.
inline PcaModel fit_pca(const DataMatrix& X, Index k) {
  const Index limit = std::min(X.dim(), X.samples());
  if (k < 1 || k > limit) detail::fail("fit_pca: k must be in [1, ", limit, "], got ", k);
  return {ProjectionBasis(centered_principal_basis(X.values(), k)), X.values().rowwise().mean()};
}

struct InnerControls {
  double inner_tol = 1e-6;
  int inner_max = 50;
  double eps_dist = 1e-8;
  Initialization init = Initialization::pca;
  std::uint64_t seed = 0;
};

/// l2,p pairwise-difference PCA: the projection update run with unit weights.
/// Returns the full update so callers can inspect the trace sequence.
inline ProjectionUpdate run_l2p_rpca(const DataMatrix& X, Index k, double p, const InnerControls& ctl = {}) {
  if (k < 1 || k > X.dim()) detail::fail("fit_l2p_rpca: k must be in [1, ", X.dim(), "], got ", k);
  detail::check_p(p, "fit_l2p_rpca");
  const ProjectionBasis U0 = initial_basis(X, k, ctl.init, ctl.seed);
  return update_projection(X, SampleWeights::ones(X.samples()), p, U0, ctl.inner_tol, ctl.inner_max, ctl.eps_dist);
}

inline ProjectionBasis fit_l2p_rpca(const DataMatrix& X, Index k, double p, const InnerControls& ctl = {}) {
  return run_l2p_rpca(X, k, p, ctl).basis;
}

/// Average reconstruction error (1/n) sum_i ||x_i - U U' x_i||_2 over the
/// columns of X, with no mean subtraction.
inline double reconstruction_error(const Matrix& X, const ProjectionBasis& U) {
  if (X.rows() != U.dim()) detail::fail("reconstruction_error: data has d=", X.rows(), " but basis has d=", U.dim());
  if (X.cols() == 0) detail::fail("reconstruction_error: no test samples");
  const Matrix& B = U.matrix();
  const Matrix residual = X - B * (B.transpose() * X);
  return residual.colwise().norm().mean();
}

inline double reconstruction_error(const DataMatrix& X, const ProjectionBasis& U) {
  return reconstruction_error(X.values(), U);
}

inline Vector reconstruct(const Vector& x, const ProjectionBasis& U) {
  if (x.size() != U.dim()) detail::fail("reconstruct: vector has length ", x.size(), ", basis has d=", U.dim());
  const Matrix& B = U.matrix();
  return B * (B.transpose() * x);
}

}  // namespace spca
