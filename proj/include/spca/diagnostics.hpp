#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "spca/self_paced.hpp"
#include "spca/types.hpp"

namespace spca {

inline constexpr int kDefaultQuadratureSteps = 1024;

/// F_eta(l) = integral_0^l w*(s, eta) ds by composite Simpson with `steps`
/// (even, >= 16) subintervals.
inline double surrogate_F(double ell, double eta, int steps = kDefaultQuadratureSteps) {
  detail::check_eta(eta, "surrogate_F");
  if (!(ell >= 0.0) || !std::isfinite(ell)) detail::fail("surrogate_F: fidelity must be finite and >= 0, got ", ell);
  if (steps < 16 || steps % 2 != 0) detail::fail("surrogate_F: steps must be even and >= 16, got ", steps);
  if (ell == 0.0) return 0.0;
  const double h = ell / steps;
  double odd = 0.0;
  double even = 0.0;
  for (int i = 1; i < steps; ++i) {
    const double v = optimal_weight(i * h, eta);
    (i % 2 == 1 ? odd : even) += v;
  }
  const double ends = optimal_weight(0.0, eta) + optimal_weight(ell, eta);
  return h / 3.0 * (ends + 4.0 * odd + 2.0 * even);
}

/// Tangent of F_eta at l*, evaluated at l: F(l*) + w*(l*) (l - l*).
inline double surrogate_Q(double ell, double ell_star, double eta, int steps = kDefaultQuadratureSteps) {
  if (!(ell >= 0.0) || !(ell_star >= 0.0)) detail::fail("surrogate_Q: fidelities must be >= 0");
  return surrogate_F(ell_star, eta, steps) + optimal_weight(ell_star, eta) * (ell - ell_star);
}

struct SurrogateCurve {
  double eta = 0.0;
  std::vector<double> ell;
  std::vector<double> F;
  int steps = 0;
};

inline SurrogateCurve surrogate_curve(double eta, std::vector<double> grid, int steps = kDefaultQuadratureSteps) {
  SurrogateCurve c{eta, std::move(grid), {}, steps};
  c.F.reserve(c.ell.size());
  for (double l : c.ell) c.F.push_back(surrogate_F(l, eta, steps));
  return c;
}

// ---------------------------------------------------------------------------
// Ascent checks on a training history

struct MonotonicityRow {
  int iter = 0;  // 1-based outer iteration
  double objective = 0.0;
  double delta = 0.0;
  bool violation = false;
};

struct InnerTraceViolation {
  int iter = 0;  // 1-based outer iteration
  int step = 0;  // index into the trace sequence
  double drop = 0.0;
};

struct MonotonicityReport {
  std::vector<MonotonicityRow> rows;
  std::vector<InnerTraceViolation> inner_violations;

  bool outer_monotone() const {
    return std::none_of(rows.begin(), rows.end(), [](const MonotonicityRow& r) { return r.violation; });
  }
  bool inner_monotone() const { return inner_violations.empty(); }
};

inline constexpr double kOuterRelTolerance = 1e-6;
inline constexpr double kInnerRelTolerance = 1e-8;

/// Evaluates sum_i F_eta(l_i) for the recorded (normalized) fidelities of each
/// outer iteration and flags decreases beyond 1e-6 |value|; also flags any
/// inner step where tr(U'H) drops by more than 1e-8 relative.
inline MonotonicityReport check_mm_monotonicity(const TrainingHistory& history, double eta,
                                                int steps = kDefaultQuadratureSteps) {
  if (history.empty()) detail::fail("check_mm_monotonicity: empty history");
  detail::check_eta(eta, "check_mm_monotonicity");
  MonotonicityReport report;
  double prev = 0.0;
  for (std::size_t t = 0; t < history.records.size(); ++t) {
    const IterationRecord& rec = history.records[t];
    double value = 0.0;
    for (Index i = 0; i < rec.fidelity.size(); ++i) value += surrogate_F(rec.fidelity[i], eta, steps);
    MonotonicityRow row{static_cast<int>(t + 1), value, 0.0, false};
    if (t > 0) {
      row.delta = value - prev;
      row.violation = row.delta < -kOuterRelTolerance * std::abs(prev);
    }
    report.rows.push_back(row);
    prev = value;

    const auto& tr = rec.trace_objective;
    for (std::size_t s = 1; s < tr.size(); ++s) {
      const double drop = tr[s - 1] - tr[s];
      if (drop > kInnerRelTolerance * std::abs(tr[s - 1]))
        report.inner_violations.push_back({static_cast<int>(t + 1), static_cast<int>(s), drop});
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Lipschitz bound |F(l_i) - F(l_j)| <= w*(M) |l_i - l_j|

struct RobustnessReport {
  double lipschitz = 0.0;  // w*(M, eta)
  double min_slack = std::numeric_limits<double>::infinity();  // min over pairs of bound - |dF|
  std::size_t pairs = 0;
  std::size_t violations = 0;

  bool ok() const { return violations == 0; }
};

inline constexpr double kRobustnessTolerance = 1e-9;

inline RobustnessReport check_robustness_bound(const std::vector<double>& ells, double eta, double M,
                                               int steps = kDefaultQuadratureSteps) {
  detail::check_eta(eta, "check_robustness_bound");
  if (!std::isfinite(M)) detail::fail("check_robustness_bound: M must be finite");
  std::vector<double> F;
  F.reserve(ells.size());
  for (double l : ells) {
    if (!(l >= 0.0)) detail::fail("check_robustness_bound: fidelity must be >= 0, got ", l);
    if (!(l < M)) detail::fail("check_robustness_bound: fidelity ", l, " is not below M = ", M);
    F.push_back(surrogate_F(l, eta, steps));
  }
  RobustnessReport r;
  r.lipschitz = optimal_weight(M, eta);
  for (std::size_t i = 0; i < ells.size(); ++i) {
    for (std::size_t j = i + 1; j < ells.size(); ++j) {
      const double slack = r.lipschitz * std::abs(ells[i] - ells[j]) - std::abs(F[i] - F[j]);
      r.min_slack = std::min(r.min_slack, slack);
      ++r.pairs;
      if (slack < -kRobustnessTolerance) ++r.violations;
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// w*(l, eta) table for plotting the weight curves

struct WeightCurveRow {
  double eta = 0.0;
  double ell = 0.0;
  double w = 0.0;
  double threshold = 0.0;  // 1/eta, the inflection point
};

inline std::vector<WeightCurveRow> weight_curve(const std::vector<double>& etas, const std::vector<double>& ells) {
  if (etas.empty() || ells.empty()) detail::fail("weight_curve: grids must be nonempty");
  std::vector<WeightCurveRow> rows;
  rows.reserve(etas.size() * ells.size());
  for (double eta : etas) {
    for (double l : ells) rows.push_back({eta, l, optimal_weight(l, eta), 1.0 / eta});
  }
  return rows;
}

}  // namespace spca
