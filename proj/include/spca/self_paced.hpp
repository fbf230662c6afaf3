#pragma once

#include <cmath>

#include "spca/types.hpp"

namespace spca {

namespace detail {

inline void check_eta(double eta, const char* who) {
  if (!(eta > 0.0) || std::isnan(eta)) fail(who, ": eta must be > 0, got ", eta);
}

// x log x with the continuous extension 0 at x = 0.
inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

}  // namespace detail

/// Self-paced regularizer for the maximization form:
///   f(w, eta) = -(w + e^{-1/eta}) log(w + e^{-1/eta}) - (1-w) log(1-w) - w / eta
/// Its maximizer of w*l + f(w, eta) over [0, 1] is optimal_weight(l, eta).
inline double regularizer_value(double w, double eta) {
  detail::check_eta(eta, "regularizer_value");
  if (!(w >= 0.0 && w <= 1.0)) detail::fail("regularizer_value: w must be in [0,1], got ", w);
  const double shift = std::exp(-1.0 / eta);
  const double one_minus_log = w < 1.0 ? (1.0 - w) * std::log1p(-w) : 0.0;
  return -detail::xlogx(w + shift) - one_minus_log - w / eta;
}

/// Closed-form weight w* = (e^{l - 1/eta} - e^{-1/eta}) / (1 + e^{l - 1/eta}).
/// Nondecreasing in l, w*(0) = 0 and w* -> 1 as l -> inf; the inflection sits
/// at l = 1/eta.
inline double optimal_weight(double ell, double eta) {
  detail::check_eta(eta, "optimal_weight");
  if (!(ell >= 0.0)) detail::fail("optimal_weight: fidelity must be >= 0, got ", ell);
  const double inv_eta = 1.0 / eta;
  const double shift = std::exp(-inv_eta);
  const double x = ell - inv_eta;
  if (x > 30.0) {
    // 1 - (1 + e^{-1/eta}) / (1 + e^x), with the large exponential kept in
    // the denominator.
    const double t = std::exp(-x);
    return 1.0 - (1.0 + shift) * t / (1.0 + t);
  }
  const double e = std::exp(x);
  // Past the inflection the complement form keeps w* monotone to the last ulp.
  if (x >= 0.0) return 1.0 - (1.0 + shift) / (1.0 + e);
  return (e - shift) / (1.0 + e);
}

/// Value of the weight subproblem w*l + f(w, eta).
inline double weight_subproblem(double w, double ell, double eta) {
  return w * ell + regularizer_value(w, eta);
}

}  // namespace spca
