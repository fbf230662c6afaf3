#pragma once

#include <random>
#include <string>

#include "spca/fidelity.hpp"
#include "spca/linalg.hpp"
#include "spca/projection.hpp"
#include "spca/self_paced.hpp"
#include "spca/types.hpp"

namespace spca {

struct SpcaResult {
  ProjectionBasis basis;
  SampleWeights weights;
  TrainingHistory history;
};

/// Starting basis: principal subspace of the centered data, or a seeded
/// random orthonormal matrix.
inline ProjectionBasis initial_basis(const DataMatrix& X, Index k, Initialization init, std::uint64_t seed) {
  if (init == Initialization::random) {
    std::mt19937_64 rng(seed);
    return ProjectionBasis(random_orthonormal(X.dim(), k, rng));
  }
  return ProjectionBasis(centered_principal_basis(X.values(), k));
}

/// Self-paced PCA. Each outer iteration recomputes the fidelities at the
/// current basis, rescales them to [0, c], sets the closed-form weights and
/// runs the inner projection update with those weights held fixed. Exactly
/// cfg.outer_iters outer iterations are run.
///
/// Columns of X are expected to have unit norm; this is not checked.
inline SpcaResult fit_spca(const DataMatrix& X, const SelfPacedConfig& cfg) {
  cfg.validate(X.dim());
  ProjectionBasis U = initial_basis(X, cfg.k, cfg.init, cfg.seed);
  const Index n = X.samples();

  SpcaResult result{U, SampleWeights::ones(n), {}};
  double frozen_scale = 0.0;
  for (int t = 0; t < cfg.outer_iters; ++t) {
    IterationRecord rec;
    const FidelityVector raw = fidelity(X, U, cfg.p);
    rec.raw_fidelity = raw.ell;

    const bool rescale = cfg.renormalization == Renormalization::every_iteration || t == 0;
    if (rescale) {
      FidelityVector scaled;
      try {
        scaled = normalize_fidelity(raw, cfg.c);
      } catch (const degenerate_input& e) {
        throw degenerate_input(detail::concat("fit_spca: outer iteration ", t + 1, ": ", e.what()));
      }
      frozen_scale = cfg.c / raw.ell.maxCoeff();
      rec.fidelity = scaled.ell;
    } else {
      rec.fidelity = raw.ell * frozen_scale;
    }

    Vector w(n);
    double objective = 0.0;
    for (Index i = 0; i < n; ++i) {
      w[i] = optimal_weight(rec.fidelity[i], cfg.eta);
      objective += w[i] * rec.fidelity[i] + regularizer_value(w[i], cfg.eta);
    }
    rec.weights = w;
    rec.objective = objective;

    const SampleWeights weights(w);
    ProjectionUpdate step = update_projection(X, weights, cfg.p, U, cfg.inner_tol, cfg.inner_max, cfg.eps_dist);
    U = step.basis;
    rec.trace_objective = std::move(step.trace_objective);
    rec.inner_iterations = step.iterations;

    result.weights = weights;
    result.history.records.push_back(std::move(rec));
  }
  result.basis = U;
  return result;
}

}  // namespace spca
