#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "spca/fidelity.hpp"
#include "spca/linalg.hpp"
#include "spca/types.hpp"

namespace spca {

/// Reweighted pair graph at a fixed basis.
///   scale(i,j)      = (||U'(x_i - x_j)||^2 + eps)^{(p-2)/2}, zero diagonal
///   similarity(i,j) = scale(i,j) * (w_i + w_j) / 2
///   laplacian       = diag(degree) - similarity
struct PairGraph {
  Matrix scale;
  Matrix similarity;
  Vector degree;
  Matrix laplacian;
};

/// Builds the symmetrized weighted graph whose Laplacian L satisfies
/// 2 tr(U'X L X'U) = sum_ij w_i ||U'(x_i - x_j)||^p (up to eps smoothing).
/// eps_dist may be 0 only when no two projected samples coincide or p = 2.
inline PairGraph pair_weights(const DataMatrix& X, const ProjectionBasis& U, const SampleWeights& w, double p,
                              double eps_dist) {
  detail::check_p(p, "pair_weights");
  if (w.size() != X.samples()) detail::fail("pair_weights: ", w.size(), " weights for ", X.samples(), " samples");
  if (!(eps_dist >= 0.0)) detail::fail("pair_weights: eps_dist must be >= 0");
  const Matrix D2 = projected_sq_distances(X, U);
  const Index n = D2.cols();
  const double exponent = 0.5 * (p - 2.0);

  PairGraph g;
  g.scale = Matrix::Zero(n, n);
  g.similarity = Matrix::Zero(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = j + 1; i < n; ++i) {
      const double base = D2(i, j) + eps_dist;
      if (base == 0.0 && exponent < 0.0)
        detail::fail("pair_weights: samples ", j, " and ", i, " coincide in projection; eps_dist must be > 0");
      const double s = exponent == 0.0 ? 1.0 : std::pow(base, exponent);
      const double sym = s * 0.5 * (w[i] + w[j]);
      g.scale(i, j) = g.scale(j, i) = s;
      g.similarity(i, j) = g.similarity(j, i) = sym;
    }
  }
  g.degree = g.similarity.rowwise().sum();
  g.laplacian = -g.similarity;
  g.laplacian.diagonal() += g.degree;
  return g;
}

struct ProjectionUpdate {
  ProjectionBasis basis;
  std::vector<double> trace_objective;  // tr(U'H) at U0, U1, ...
  int iterations = 0;                   // number of polar updates applied
  bool degenerate = false;              // H vanished; basis returned unchanged
};

namespace detail {

// H is zero up to the rounding of X L X'U.
inline bool negligible(const Matrix& H, const Matrix& X, const Matrix& L, const Matrix& U) {
  const double scale = X.squaredNorm() * L.norm() * U.norm();
  const double eps = std::numeric_limits<double>::epsilon();
  return H.norm() <= static_cast<double>(X.cols() + 1) * eps * scale;
}

}  // namespace detail

/// Maximizes sum_ij w_i ||U'(x_i - x_j)||^p over orthonormal U by repeatedly
/// forming H = X L(U) X'U and replacing U with the polar factor of H. Stops
/// when the relative change of tr(U'H) drops below inner_tol or after
/// inner_max updates.
inline ProjectionUpdate update_projection(const DataMatrix& X, const SampleWeights& w, double p,
                                          const ProjectionBasis& U0, double inner_tol, int inner_max,
                                          double eps_dist) {
  detail::check_dims(X, U0, "update_projection");
  if (!(inner_tol >= 0.0)) detail::fail("update_projection: inner_tol must be >= 0");
  if (inner_max < 0) detail::fail("update_projection: inner_max must be >= 0");

  const Matrix& data = X.values();
  ProjectionUpdate out{U0, {}, 0, false};
  ProjectionBasis U = U0;
  for (;;) {
    const PairGraph g = pair_weights(X, U, w, p, eps_dist);
    const Matrix& Um = U.matrix();
    const Matrix H = data * (g.laplacian * (data.transpose() * Um));
    const double t = (Um.transpose() * H).trace();

    if (detail::negligible(H, data, g.laplacian, Um)) {
      out.trace_objective.push_back(t);
      out.degenerate = out.iterations == 0;
      break;
    }
    if (!out.trace_objective.empty()) {
      const double prev = out.trace_objective.back();
      out.trace_objective.push_back(t);
      if (std::abs(t - prev) < inner_tol * std::abs(prev)) break;
    } else {
      out.trace_objective.push_back(t);
    }
    if (out.iterations >= inner_max) break;
    U = procrustes_polar(H);
    ++out.iterations;
  }
  out.basis = U;
  return out;
}

}  // namespace spca
