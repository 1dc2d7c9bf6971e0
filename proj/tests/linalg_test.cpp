#include "gsanss/linalg.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "gsanss/error.hpp"
#include "test_util.hpp"

namespace gsanss {
namespace {

using testing::gram_of;
using testing::jacobi_eigenvalues;
using testing::random_matrix;

TEST(MatrixTest, RejectsBadData) {
  EXPECT_THROW(Matrix(2, 2, {1.0, 2.0, 3.0}), Error);
  try {
    Matrix(1, 1, {std::nan("")});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kNonFinite);
  }
}

TEST(OrthonormalizeTest, AxisAlignedPair) {
  const Matrix m(2, 2, {2.0, 0.0, 1.0, 1.0});
  const Matrix r = orthonormalize(m);
  EXPECT_EQ(r, Matrix::identity(2));
}

TEST(OrthonormalizeTest, IdentityUnchanged) {
  const Matrix id = Matrix::identity(4);
  EXPECT_EQ(orthonormalize(id), id);
}

TEST(OrthonormalizeTest, RandomFullRankKeepsSpan) {
  Rng rng(7);
  const Matrix m = random_matrix(8, 3, rng);
  const Matrix r = orthonormalize(m);
  EXPECT_LE(orthonormality_error(r), 1e-10);
  // Oracle: projecting the original columns onto span(R) reproduces them.
  const Matrix proj = r.multiply(r.transpose().multiply(m));
  for (std::size_t i = 0; i < m.data().size(); ++i) {
    EXPECT_NEAR(proj.data()[i], m.data()[i], 1e-8);
  }
}

TEST(OrthonormalizeTest, RankDeficient) {
  const Matrix m(3, 2, {1.0, 2.0, 3.0, 2.0, 4.0, 6.0});
  try {
    orthonormalize(m);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kRankDeficient);
  }
  EXPECT_THROW(orthonormalize(Matrix(2, 3)), Error);
}

TEST(OrthonormalizeTest, SignConventionLargestEntryPositive) {
  const Matrix m(3, 1, {0.1, -0.9, 0.2});
  const Matrix r = orthonormalize(m);
  EXPECT_GT(r(1, 0), 0.0);
}

TEST(OrthonormalizeTest, IdempotentBitForBit) {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix m = random_matrix(12, 1 + trial % 6, rng);
    const Matrix once = orthonormalize(m);
    EXPECT_EQ(orthonormalize(once), once);
  }
}

TEST(SingularValuesTest, Identity) {
  const SingularSpectrum s = singular_values(Matrix::identity(3));
  ASSERT_EQ(s.values.size(), 3U);
  for (double v : s.values) EXPECT_DOUBLE_EQ(v, 1.0);
}

TEST(SingularValuesTest, Diagonal) {
  const SingularSpectrum s = singular_values(Matrix(2, 2, {0.2, 0.0, 0.0, 0.5}));
  ASSERT_EQ(s.values.size(), 2U);
  EXPECT_DOUBLE_EQ(s.values[0], 0.5);
  EXPECT_DOUBLE_EQ(s.values[1], 0.2);
}

TEST(SingularValuesTest, MatchesJacobiEigenOracle) {
  Rng rng(3);
  const Matrix m = random_matrix(5, 5, rng);
  const auto lambdas = jacobi_eigenvalues(gram_of(m));
  const SingularSpectrum s = singular_values(m);
  ASSERT_EQ(s.values.size(), 5U);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_NEAR(s.values[i], std::sqrt(std::max(lambdas[i], 0.0)), 1e-9);
  }
}

TEST(SingularValuesTest, FrobeniusIdentityProperty) {
  Rng rng(19);
  for (std::size_t m = 1; m <= 8; ++m) {
    for (int trial = 0; trial < 25; ++trial) {
      const Matrix a = random_matrix(m, m, rng);
      const SingularSpectrum s = singular_values(a);
      double sum = 0.0;
      for (double v : s.values) sum += v * v;
      const double fro = frobenius_norm_sq(a);
      EXPECT_NEAR(sum, fro, 1e-9 * fro);
      EXPECT_TRUE(std::is_sorted(s.values.rbegin(), s.values.rend()));
      for (double v : s.values) EXPECT_GE(v, 0.0);
    }
  }
}

TEST(SingularValuesTest, OrthonormalGramIsAllOnes) {
  Rng rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix y = orthonormalize(random_matrix(20, 6, rng));
    for (double v : singular_values(cross_gram(y, y)).values) EXPECT_NEAR(v, 1.0, 1e-9);
  }
}

TEST(SingularValuesTest, BudgetExhaustionReportsNoConvergence) {
  Rng rng(5);
  LinalgConfig cfg;
  cfg.jacobi_max_sweeps = 0;
  try {
    singular_values(random_matrix(4, 4, rng), cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kNoConvergence);
  }
}

TEST(PcaBasisTest, SingleAxis) {
  const Matrix samples(2, 2, {1.0, 0.0, -1.0, 0.0});
  const Matrix b = pca_basis(samples, 1);
  EXPECT_NEAR(b(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(b(1, 0), 0.0, 1e-15);
}

TEST(PcaBasisTest, DegenerateSymmetricGivesIdentityColumns) {
  const Matrix samples = Matrix::identity(2);
  const Matrix b = pca_basis(samples, 2);
  const bool straight = std::abs(b(0, 0) - 1.0) < 1e-12 && std::abs(b(1, 1) - 1.0) < 1e-12;
  const bool swapped = std::abs(b(1, 0) - 1.0) < 1e-12 && std::abs(b(0, 1) - 1.0) < 1e-12;
  EXPECT_TRUE(straight || swapped);
}

TEST(PcaBasisTest, ReconstructionEnergyMatchesTopEigenvalues) {
  Rng rng(31);
  const std::size_t dim = 16, n = 50, m = 4;
  const Matrix x = random_matrix(dim, n, rng);
  // Oracle: full Jacobi eigen-decomposition of the autocorrelation matrix.
  std::vector<std::vector<double>> c(dim, std::vector<double>(dim, 0.0));
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j)
      for (std::size_t s = 0; s < n; ++s) c[i][j] += x(i, s) * x(j, s) / static_cast<double>(n);
  const auto lambdas = jacobi_eigenvalues(c);
  double expected = 0.0;
  for (std::size_t j = 0; j < m; ++j) expected += lambdas[j] * static_cast<double>(n);

  const Matrix b = pca_basis(x, m);
  EXPECT_LE(orthonormality_error(b), 1e-10);
  const double energy = frobenius_norm_sq(b.transpose().multiply(x));
  EXPECT_NEAR(energy, expected, 1e-8 * expected);
}

TEST(PcaBasisTest, DualPathMatchesPrimalPath) {
  // n < D routes through the Gram matrix; compare against a square case
  // where both paths see the same spectrum.
  Rng rng(37);
  const Matrix x = random_matrix(30, 8, rng);
  const Matrix b = pca_basis(x, 3);
  EXPECT_LE(orthonormality_error(b), 1e-10);
  std::vector<std::vector<double>> g(8, std::vector<double>(8, 0.0));
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 8; ++j)
      for (std::size_t r = 0; r < 30; ++r) g[i][j] += x(r, i) * x(r, j);
  const auto lambdas = jacobi_eigenvalues(g);
  const double energy = frobenius_norm_sq(b.transpose().multiply(x));
  EXPECT_NEAR(energy, lambdas[0] + lambdas[1] + lambdas[2], 1e-8 * energy);
}

TEST(PcaBasisTest, AlwaysOrthonormalProperty) {
  Rng rng(41);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t dim = 4 + trial % 20;
    const std::size_t n = 3 + trial % 17;
    const std::size_t m = 1 + trial % std::min<std::size_t>(n, 3);
    const Matrix b = pca_basis(random_matrix(dim, n, rng), m);
    EXPECT_LE(orthonormality_error(b), 1e-10);
  }
}

TEST(PcaBasisTest, MeanSubtractionFlag) {
  // Two samples symmetric about (1, 1): centred data lies along (1, -1).
  const Matrix x(2, 2, {2.0, 0.0, 0.0, 2.0});
  const Matrix centred = pca_basis(x, 1, PcaOptions{true});
  EXPECT_NEAR(std::abs(centred(0, 0)), std::sqrt(0.5), 1e-12);
  EXPECT_NEAR(centred(0, 0) * centred(1, 0), -0.5, 1e-12);
}

TEST(PcaBasisTest, RankDeficiency) {
  const Matrix x(3, 2, {1.0, 0.0, 0.0, 2.0, 0.0, 0.0});
  try {
    pca_basis(x, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kRankDeficient);
  }
  EXPECT_THROW(pca_basis(Matrix(3, 4), 1), Error);
  EXPECT_THROW(pca_basis(x, 3), Error);
}

TEST(CrossGramTest, IdentityAndOrthogonal) {
  const Matrix id = Matrix::identity(3);
  EXPECT_EQ(cross_gram(id, id), id);
  const Matrix p(4, 2, {1, 0, 0, 0, 0, 1, 0, 0});
  const Matrix q(4, 2, {0, 0, 1, 0, 0, 0, 0, 1});
  EXPECT_EQ(cross_gram(p, q), Matrix(2, 2));
}

TEST(CrossGramTest, MatchesNaiveTripleLoopExactly) {
  // Dyadic entries keep every partial sum exact, so any summation order
  // must agree bit for bit.
  Rng rng(43);
  std::uniform_int_distribution<int> pick(-16, 16);
  Matrix p(9, 3), q(9, 3);
  for (double& v : p.data()) v = pick(rng) / 8.0;
  for (double& v : q.data()) v = pick(rng) / 8.0;
  const Matrix g = cross_gram(p, q);
  for (std::size_t s = 0; s < 3; ++s) {
    for (std::size_t t = 0; t < 3; ++t) {
      double naive = 0.0;
      for (std::size_t r = 0; r < 9; ++r) naive += p(r, s) * q(r, t);
      EXPECT_EQ(g(s, t), naive);
    }
  }
}

TEST(CrossGramTest, DimensionMismatch) {
  try {
    cross_gram(Matrix(3, 2), Matrix(4, 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kDimensionMismatch);
  }
}

}  // namespace
}  // namespace gsanss
