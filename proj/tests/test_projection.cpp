#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "spca/fidelity.hpp"
#include "spca/linalg.hpp"
#include "spca/projection.hpp"
#include "test_util.hpp"

namespace {

using namespace spca;
using spca::testing::gaussian;

ProjectionBasis random_basis(Index d, Index k, std::mt19937_64& rng) { return ProjectionBasis(random_orthonormal(d, k, rng)); }

TEST(Fidelity, IdenticalColumnsGiveZero) {
  Matrix X(3, 2);
  X << 1, 1, 2, 2, 3, 3;
  std::mt19937_64 rng(1);
  for (double p : {0.5, 1.0, 2.0}) {
    const auto f = fidelity(DataMatrix(X), random_basis(3, 2, rng), p);
    EXPECT_EQ(f.ell, Vector::Zero(2));
    EXPECT_FALSE(f.normalized);
  }
}

TEST(Fidelity, ThreeScalarSamples) {
  Matrix X(1, 3);
  X << 0, 1, 1;
  const auto f = fidelity(DataMatrix(X), ProjectionBasis(Matrix::Ones(1, 1)), 1.0);
  EXPECT_EQ(f.ell, Eigen::Vector3d(2, 1, 1));
}

TEST(Fidelity, MatchesBruteForce) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix X = gaussian(3, 4, rng);
    const ProjectionBasis U = random_basis(3, 2, rng);
    const Vector expected = spca::testing::brute_force_fidelity(X, U.matrix(), 0.5);
    const Vector got = fidelity(DataMatrix(X), U, 0.5).ell;
    EXPECT_LT((got - expected).cwiseAbs().maxCoeff(), 1e-12 * expected.cwiseAbs().maxCoeff());
  }
}

TEST(Fidelity, PermutationEquivariant) {
  std::mt19937_64 rng(11);
  const Matrix X = gaussian(5, 9, rng);
  const ProjectionBasis U = random_basis(5, 2, rng);
  std::vector<Index> perm(9);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Matrix Xp(5, 9);
  for (Index j = 0; j < 9; ++j) Xp.col(j) = X.col(perm[j]);
  const Vector a = fidelity(DataMatrix(X), U, 1.3).ell;
  const Vector b = fidelity(DataMatrix(Xp), U, 1.3).ell;
  for (Index j = 0; j < 9; ++j) EXPECT_NEAR(b[j], a[perm[j]], 1e-12 * a.maxCoeff());
}

TEST(Fidelity, DimensionMismatch) {
  std::mt19937_64 rng(3);
  EXPECT_THROW(fidelity(DataMatrix(gaussian(3, 4, rng)), random_basis(4, 2, rng), 1.0), spca::invalid_argument);
}

TEST(NormalizeFidelity, ScalesToC) {
  const auto f = normalize_fidelity({Eigen::Vector3d(1, 2, 4), false}, 15.0);
  EXPECT_TRUE(f.normalized);
  EXPECT_EQ(f.ell, Eigen::Vector3d(3.75, 7.5, 15));
}

TEST(NormalizeFidelity, ConstantMapsToC) {
  const auto f = normalize_fidelity({Vector::Constant(4, 7.0), false}, 15.0);
  EXPECT_EQ(f.ell, Vector::Constant(4, 15.0));
}

TEST(NormalizeFidelity, MaxIsExactlyC) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 100; ++t) {
    const Vector v = spca::testing::uniform(10, rng, 0.0, 1e3);
    const double c = spca::testing::uniform(1, rng, 0.1, 50)[0];
    EXPECT_EQ(normalize_fidelity({v, false}, c).ell.maxCoeff(), c);
  }
}

TEST(NormalizeFidelity, Errors) {
  EXPECT_THROW(normalize_fidelity({Vector::Zero(2), false}, 15.0), spca::degenerate_input);
  EXPECT_THROW(normalize_fidelity({Vector::Ones(2), true}, 15.0), spca::invalid_argument);
  EXPECT_THROW(normalize_fidelity({Vector::Ones(2), false}, 0.0), spca::invalid_argument);
}

TEST(PairWeights, CompleteGraphAtPEqualsTwo) {
  Matrix X(2, 3);
  X << 0, 1, 0, 0, 0, 2;
  const ProjectionBasis U(Matrix::Identity(2, 2));
  const auto g = pair_weights(DataMatrix(X), U, SampleWeights::ones(3), 2.0, 0.0);
  Matrix expected = 3 * Matrix::Identity(3, 3) - Matrix::Ones(3, 3);
  EXPECT_LT((g.laplacian - expected).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(g.scale, Matrix::Ones(3, 3) - Matrix::Identity(3, 3));
}

TEST(PairWeights, ZeroWeightsAnnihilate) {
  std::mt19937_64 rng(2);
  const auto g = pair_weights(DataMatrix(gaussian(4, 6, rng)), random_basis(4, 2, rng), SampleWeights(Vector::Zero(6)),
                              0.7, 1e-8);
  EXPECT_EQ(g.similarity, Matrix::Zero(6, 6));
  EXPECT_EQ(g.laplacian, Matrix::Zero(6, 6));
}

TEST(PairWeights, TraceIdentityAndPsd) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const Index d = 6, n = 10, k = 3;
    const Matrix X = gaussian(d, n, rng);
    const ProjectionBasis U = random_basis(d, k, rng);
    const Vector w = spca::testing::uniform(n, rng);
    const double p = spca::testing::uniform(1, rng, 0.2, 2.0)[0];
    const auto g = pair_weights(DataMatrix(X), U, SampleWeights(w), p, 1e-8);

    EXPECT_EQ(g.laplacian, g.laplacian.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(g.laplacian);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10);

    // brute force both sides of 2 tr(U'XLX'U) = sum_ij s_ij (w_i+w_j)/2 ||U'(x_i-x_j)||^2
    double symmetric = 0.0, one_sided = 0.0;
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) {
        if (i == j) continue;
        const double d2 = (U.matrix().transpose() * (X.col(i) - X.col(j))).squaredNorm();
        const double s = std::pow(d2 + 1e-8, (p - 2) / 2);
        symmetric += s * (w[i] + w[j]) / 2 * d2;
        one_sided += s * w[i] * d2;
      }
    }
    const double lhs = 2 * (U.matrix().transpose() * X * g.laplacian * X.transpose() * U.matrix()).trace();
    EXPECT_NEAR(lhs, symmetric, 1e-10 * std::abs(symmetric));
    EXPECT_NEAR(symmetric, one_sided, 1e-10 * std::abs(symmetric));
  }
}

TEST(PairWeights, CoincidentNeedsSmoothing) {
  Matrix X(2, 2);
  X << 1, 1, 0, 0;
  const ProjectionBasis U(Matrix::Identity(2, 1));
  EXPECT_THROW(pair_weights(DataMatrix(X), U, SampleWeights::ones(2), 1.0, 0.0), spca::invalid_argument);
  EXPECT_NO_THROW(pair_weights(DataMatrix(X), U, SampleWeights::ones(2), 1.0, 1e-8));
  EXPECT_NO_THROW(pair_weights(DataMatrix(X), U, SampleWeights::ones(2), 2.0, 0.0));
}

TEST(Procrustes, AlreadyOrthogonalColumns) {
  Matrix H(3, 2);
  H << 2, 0, 0, 3, 0, 0;
  const auto U = procrustes_polar(H);
  EXPECT_LT((U.matrix() - Matrix::Identity(3, 2)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Procrustes, PositiveScalingInvariant) {
  std::mt19937_64 rng(17);
  const Matrix H = gaussian(6, 3, rng);
  EXPECT_LT((procrustes_polar(H).matrix() - procrustes_polar(5 * H).matrix()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Procrustes, MonteCarloOptimality) {
  std::mt19937_64 rng(19);
  const Matrix H = gaussian(6, 3, rng);
  const auto U = procrustes_polar(H);
  EXPECT_LE(orthonormality_error(U.matrix()), 1e-12);
  const double best = (U.matrix().transpose() * H).trace();
  for (int t = 0; t < 10000; ++t) {
    const Matrix W = random_orthonormal(6, 3, rng);
    ASSERT_GE(best, (W.transpose() * H).trace());
  }
}

TEST(Procrustes, RankDeficientStaysOrthonormal) {
  Matrix H = Matrix::Zero(5, 3);
  H(0, 0) = 1.0;
  H(1, 1) = 2.0;  // third column zero
  const auto U = procrustes_polar(H);
  EXPECT_LE(orthonormality_error(U.matrix()), 1e-12);
  EXPECT_EQ(procrustes_polar(H).matrix(), U.matrix());
  EXPECT_LE(orthonormality_error(procrustes_polar(Matrix::Zero(4, 2)).matrix()), 1e-12);
}

TEST(UpdateProjection, PEqualsTwoFindsCovarianceEigenspace) {
  std::mt19937_64 rng(23);
  const Matrix X = gaussian(20, 50, rng);
  const Index k = 4;
  const ProjectionBasis U0 = random_basis(20, k, rng);
  const auto res = update_projection(DataMatrix(X), SampleWeights::ones(50), 2.0, U0, 0.0, 20000, 1e-8);
  EXPECT_LE(orthonormality_error(res.basis.matrix()), 1e-8);
  EXPECT_LT(max_principal_angle(res.basis.matrix(), spca::testing::eigen_pca(X, k)), 1e-6);
}

TEST(UpdateProjection, IdenticalSamplesReturnStart) {
  Matrix X(3, 2);
  X << 1, 1, -2, -2, 0.5, 0.5;
  std::mt19937_64 rng(29);
  const ProjectionBasis U0 = random_basis(3, 2, rng);
  for (double p : {0.5, 1.0, 2.0}) {
    const auto res = update_projection(DataMatrix(X), SampleWeights(Eigen::Vector2d(0.3, 0.9)), p, U0, 1e-6, 50, 1e-8);
    EXPECT_TRUE(res.degenerate);
    EXPECT_EQ(res.iterations, 0);
    EXPECT_EQ(res.basis.matrix(), U0.matrix());
  }
}

TEST(UpdateProjection, WeightedObjectiveDoesNotDecrease) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 5; ++trial) {
    const DataMatrix X(gaussian(10, 30, rng));
    const SampleWeights w(spca::testing::uniform(30, rng));
    const ProjectionBasis U0 = random_basis(10, 3, rng);
    const auto res = update_projection(X, w, 1.0, U0, 1e-6, 50, 1e-8);
    EXPECT_GE(weighted_pairwise_objective(X, res.basis, w.values(), 1.0),
              weighted_pairwise_objective(X, U0, w.values(), 1.0) - 1e-8);
    EXPECT_LE(orthonormality_error(res.basis.matrix()), 1e-8);
    for (std::size_t s = 1; s < res.trace_objective.size(); ++s)
      EXPECT_GE(res.trace_objective[s], res.trace_objective[s - 1] * (1 - 1e-8));
  }
}

TEST(UpdateProjection, StopsAtInnerMax) {
  std::mt19937_64 rng(37);
  const DataMatrix X(gaussian(8, 12, rng));
  const auto res = update_projection(X, SampleWeights::ones(12), 0.5, random_basis(8, 2, rng), 1e-300, 3, 1e-8);
  EXPECT_EQ(res.iterations, 3);
  EXPECT_EQ(res.trace_objective.size(), 4u);
}

TEST(PrincipalAngles, KnownAngle) {
  Matrix A(3, 1), B(3, 1);
  A << 1, 0, 0;
  for (double theta : {1e-9, 1e-4, 0.3, 1.2, M_PI / 2}) {
    B << std::cos(theta), std::sin(theta), 0;
    EXPECT_NEAR(max_principal_angle(A, B), theta, 1e-15 + 1e-12 * theta);
  }
}

}  // namespace
