#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace spca {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Invalid parameters, out-of-domain values, shape mismatches.
class invalid_argument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The input is well-formed but the model is undefined on it
// (e.g. every sample coincides, so all fidelities vanish).
class degenerate_input : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

template <typename... Args>
std::string concat(Args&&... args) {
  std::ostringstream oss;
  (oss << ... << std::forward<Args>(args));
  return oss.str();
}

template <typename... Args>
[[noreturn]] void fail(Args&&... args) {
  throw invalid_argument(concat(std::forward<Args>(args)...));
}

inline void require(bool cond, const char* what) {
  if (!cond) throw invalid_argument(what);
}

}  // namespace detail

// Maximum deviation of U^T U from the identity.
inline double orthonormality_error(const Matrix& U) {
  const Index k = U.cols();
  return (U.transpose() * U - Matrix::Identity(k, k)).cwiseAbs().maxCoeff();
}

/// d x n data, one sample per column. Entries are finite and n >= 2.
class DataMatrix {
 public:
  DataMatrix() = default;

  explicit DataMatrix(Matrix values) : values_(std::move(values)) {
    if (values_.rows() < 1) detail::fail("DataMatrix: need d >= 1, got ", values_.rows());
    if (values_.cols() < 2) detail::fail("DataMatrix: need n >= 2 samples, got ", values_.cols());
    if (!values_.allFinite()) detail::fail("DataMatrix: entries must be finite");
  }

  const Matrix& values() const { return values_; }
  Index dim() const { return values_.rows(); }
  Index samples() const { return values_.cols(); }
  auto col(Index i) const { return values_.col(i); }

 private:
  Matrix values_;
};

/// d x k matrix with orthonormal columns.
class ProjectionBasis {
 public:
  static constexpr double kTolerance = 1e-8;

  ProjectionBasis() = default;

  explicit ProjectionBasis(Matrix U) : U_(std::move(U)) {
    if (U_.cols() < 1 || U_.rows() < U_.cols())
      detail::fail("ProjectionBasis: need 1 <= k <= d, got d=", U_.rows(), " k=", U_.cols());
    if (!U_.allFinite()) detail::fail("ProjectionBasis: entries must be finite");
    const double err = orthonormality_error(U_);
    if (err > kTolerance) detail::fail("ProjectionBasis: columns not orthonormal (|U'U - I|max = ", err, ")");
  }

  const Matrix& matrix() const { return U_; }
  Index dim() const { return U_.rows(); }
  Index rank() const { return U_.cols(); }

 private:
  Matrix U_;
};

/// Per-sample weights, each in [0, 1].
class SampleWeights {
 public:
  SampleWeights() = default;

  explicit SampleWeights(Vector w) : w_(std::move(w)) {
    for (Index i = 0; i < w_.size(); ++i) {
      if (!(w_[i] >= 0.0 && w_[i] <= 1.0)) detail::fail("SampleWeights: w[", i, "] = ", w_[i], " outside [0,1]");
    }
  }

  static SampleWeights ones(Index n) { return SampleWeights(Vector::Ones(n)); }

  const Vector& values() const { return w_; }
  Index size() const { return w_.size(); }
  double operator[](Index i) const { return w_[i]; }

 private:
  Vector w_;
};

/// Per-sample fidelities l_i >= 0, optionally normalized so max l_i = c.
struct FidelityVector {
  Vector ell;
  bool normalized = false;
};

enum class Initialization { pca, random };

/// How fidelities are rescaled at each outer iteration.
///  - every_iteration: rescale so that max l_i = c each time.
///  - frozen_after_first: compute the scale c / max l_i at the first outer
///    iteration and reuse it; the implicit surrogate objective is then fixed
///    across iterations (diagnostic mode).
enum class Renormalization { every_iteration, frozen_after_first };

struct SelfPacedConfig {
  Index k = 1;
  double p = 1.0;
  double eta = 0.1;
  double c = 15.0;
  int outer_iters = 10;
  double inner_tol = 1e-6;
  int inner_max = 50;
  double eps_dist = 1e-8;
  std::uint64_t seed = 0;
  Initialization init = Initialization::pca;
  Renormalization renormalization = Renormalization::every_iteration;

  void validate(Index d) const {
    if (k < 1 || k > d) detail::fail("SelfPacedConfig: k must be in [1, ", d, "], got ", k);
    if (!(p > 0.0 && p <= 2.0)) detail::fail("SelfPacedConfig: p must be in (0, 2], got ", p);
    if (!(eta > 0.0) || !std::isfinite(eta)) detail::fail("SelfPacedConfig: eta must be > 0, got ", eta);
    if (!(c > 0.0) || !std::isfinite(c)) detail::fail("SelfPacedConfig: c must be > 0, got ", c);
    if (outer_iters < 1) detail::fail("SelfPacedConfig: outer_iters must be positive");
    if (!(inner_tol > 0.0)) detail::fail("SelfPacedConfig: inner_tol must be > 0");
    if (inner_max < 1) detail::fail("SelfPacedConfig: inner_max must be positive");
    if (!(eps_dist > 0.0)) detail::fail("SelfPacedConfig: eps_dist must be > 0");
  }
};

/// One outer iteration of the self-paced fit.
struct IterationRecord {
  Vector weights;
  Vector raw_fidelity;
  Vector fidelity;  // after normalization
  double objective = 0.0;  // sum_i w_i l_i + f(w_i, eta)
  std::vector<double> trace_objective;  // tr(U'H) at every inner step
  int inner_iterations = 0;
};

struct TrainingHistory {
  std::vector<IterationRecord> records;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
};

}  // namespace spca
