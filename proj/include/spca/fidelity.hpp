#pragma once

#include <cmath>

#include "spca/types.hpp"

namespace spca {

namespace detail {

inline void check_p(double p, const char* who) {
  if (!(p > 0.0 && p <= 2.0)) fail(who, ": p must be in (0, 2], got ", p);
}

inline void check_dims(const DataMatrix& X, const ProjectionBasis& U, const char* who) {
  if (X.dim() != U.dim()) fail(who, ": data has d=", X.dim(), " but basis has d=", U.dim());
}

}  // namespace detail

/// Squared distances between projected samples, ||U'(x_i - x_j)||^2.
inline Matrix projected_sq_distances(const DataMatrix& X, const ProjectionBasis& U) {
  detail::check_dims(X, U, "projected_sq_distances");
  const Matrix Y = U.matrix().transpose() * X.values();
  const Index n = Y.cols();
  Matrix D2 = Matrix::Zero(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = j + 1; i < n; ++i) {
      const double v = (Y.col(i) - Y.col(j)).squaredNorm();
      D2(i, j) = v;
      D2(j, i) = v;
    }
  }
  return D2;
}

/// l_i = sum_j ||U'(x_i - x_j)||_2^p.
inline FidelityVector fidelity(const DataMatrix& X, const ProjectionBasis& U, double p) {
  detail::check_p(p, "fidelity");
  const Matrix D2 = projected_sq_distances(X, U);
  const Index n = D2.cols();
  Vector ell = Vector::Zero(n);
  for (Index i = 0; i < n; ++i) {
    double acc = 0.0;
    for (Index j = 0; j < n; ++j) {
      if (j != i) acc += std::pow(D2(i, j), 0.5 * p);
    }
    ell[i] = acc;
  }
  return {ell, false};
}

/// Rescales so that the largest fidelity equals c.
inline FidelityVector normalize_fidelity(const FidelityVector& f, double c) {
  if (f.normalized) detail::fail("normalize_fidelity: vector is already normalized");
  if (!(c > 0.0) || !std::isfinite(c)) detail::fail("normalize_fidelity: c must be > 0, got ", c);
  if (f.ell.size() == 0) detail::fail("normalize_fidelity: empty fidelity vector");
  if ((f.ell.array() < 0.0).any()) detail::fail("normalize_fidelity: negative fidelity");
  const double top = f.ell.maxCoeff();
  if (!(top > 0.0)) throw degenerate_input("normalize_fidelity: all fidelities are zero (fully duplicated data)");
  Vector out = f.ell * (c / top);
  // c * top / top may land one ulp off; pin the maxima exactly.
  for (Index i = 0; i < out.size(); ++i) {
    if (f.ell[i] == top) out[i] = c;
  }
  return {out, true};
}

/// sum_{i,j} w_i ||U'(x_i - x_j)||^p, the projection subproblem's objective.
inline double weighted_pairwise_objective(const DataMatrix& X, const ProjectionBasis& U, const Vector& w,
                                          double p) {
  if (w.size() != X.samples()) detail::fail("weighted_pairwise_objective: weight length mismatch");
  return w.dot(fidelity(X, U, p).ell);
}

}  // namespace spca
