#pragma once

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "spca/types.hpp"

namespace spca {

// Flip column pairs of (Q, V) so that the largest-magnitude entry of each Q
// column is positive. Ties go to the first index.
inline void fix_signs(Matrix& Q, Matrix* V = nullptr) {
  for (Index j = 0; j < Q.cols(); ++j) {
    Index arg = 0;
    double best = -1.0;
    for (Index i = 0; i < Q.rows(); ++i) {
      const double a = std::abs(Q(i, j));
      if (a > best) {
        best = a;
        arg = i;
      }
    }
    if (Q(arg, j) < 0.0) {
      Q.col(j) = -Q.col(j);
      if (V != nullptr) V->col(j) = -V->col(j);
    }
  }
}

/// Polar factor of H: U = Q V' for the thin SVD H = Q S V'. U maximizes
/// tr(W'H) over all column-orthonormal W. For rank-deficient H the SVD still
/// returns orthonormal Q and V, so U stays orthonormal and deterministic.
inline ProjectionBasis procrustes_polar(const Matrix& H) {
  if (H.cols() < 1 || H.rows() < H.cols())
    detail::fail("procrustes_polar: need d >= k >= 1, got ", H.rows(), "x", H.cols());
  if (!H.allFinite()) detail::fail("procrustes_polar: non-finite input");
  Eigen::JacobiSVD<Matrix> svd(H, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Matrix Q = svd.matrixU();
  Matrix V = svd.matrixV();
  fix_signs(Q, &V);
  return ProjectionBasis(Q * V.transpose());
}

/// Orthonormal d x k basis from the QR factorization of a Gaussian matrix.
template <typename Rng>
Matrix random_orthonormal(Index d, Index k, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix G(d, k);
  for (Index j = 0; j < k; ++j)
    for (Index i = 0; i < d; ++i) G(i, j) = normal(rng);
  Eigen::HouseholderQR<Matrix> qr(G);
  Matrix Q = qr.householderQ() * Matrix::Identity(d, k);
  return Q;
}

inline Matrix orthonormalize(const Matrix& A) {
  Eigen::HouseholderQR<Matrix> qr(A);
  return qr.householderQ() * Matrix::Identity(A.rows(), A.cols());
}

/// Principal angles (radians, ascending) between span(A) and span(B).
/// Small angles come from the sines and large ones from the cosines, so both
/// ends of the range are resolved to full precision.
inline Vector principal_angles(const Matrix& A, const Matrix& B) {
  if (A.rows() != B.rows()) detail::fail("principal_angles: dimension mismatch");
  const Matrix QA = orthonormalize(A);
  const Matrix QB = orthonormalize(B);
  const Index m = std::min(QA.cols(), QB.cols());

  Eigen::JacobiSVD<Matrix> cos_svd(QA.transpose() * QB);
  const Vector cosines = cos_svd.singularValues();  // descending

  const Matrix& narrow = QA.cols() >= QB.cols() ? QA : QB;
  const Matrix& wide = QA.cols() >= QB.cols() ? QB : QA;
  const Matrix residual = wide - narrow * (narrow.transpose() * wide);
  Eigen::JacobiSVD<Matrix> sin_svd(residual);
  Vector sines = sin_svd.singularValues();  // descending
  std::sort(sines.data(), sines.data() + sines.size());

  Vector angles(m);
  for (Index i = 0; i < m; ++i) {
    const double c = std::clamp(cosines[i], 0.0, 1.0);
    const double s = std::clamp(sines[i], 0.0, 1.0);
    angles[i] = c * c < 0.5 ? std::acos(c) : std::asin(s);
  }
  std::sort(angles.data(), angles.data() + angles.size());
  return angles;
}

inline double max_principal_angle(const Matrix& A, const Matrix& B) {
  return principal_angles(A, B).maxCoeff();
}

/// Top-k left singular vectors of the column-centered data, ordered by
/// descending singular value and sign-fixed. When k exceeds the number of
/// samples the basis is completed from the full SVD.
inline Matrix centered_principal_basis(const Matrix& X, Index k) {
  const Index d = X.rows();
  const Index n = X.cols();
  if (k < 1 || k > d) detail::fail("principal basis: k must be in [1, ", d, "], got ", k);
  const Vector mean = X.rowwise().mean();
  const Matrix centered = X.colwise() - mean;
  const unsigned options = k <= n ? Eigen::ComputeThinU : Eigen::ComputeFullU;
  Eigen::BDCSVD<Matrix> svd(centered, options);
  Matrix U = svd.matrixU().leftCols(k);
  fix_signs(U);
  return U;
}

}  // namespace spca
