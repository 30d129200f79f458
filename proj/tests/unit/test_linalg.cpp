#include <gtest/gtest.h>

#include "linalg.hpp"

using bhpair::detail::product_svd;
using bhpair::detail::svd;
using bhpair::detail::truncated_svd;
using bhpair::detail::UniformStream;
using Eigen::MatrixXd;

namespace {

MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  UniformStream rng(seed);
  MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.next();
  return m;
}

// Matrix with a geometric singular spectrum, like a Schmidt decomposition.
MatrixXd decaying_matrix(Eigen::Index rows, Eigen::Index cols, double ratio, std::uint64_t seed) {
  const Eigen::Index k = std::min(rows, cols);
  Eigen::HouseholderQR<MatrixXd> qu(random_matrix(rows, k, seed));
  Eigen::HouseholderQR<MatrixXd> qv(random_matrix(cols, k, seed + 1));
  const MatrixXd u = qu.householderQ() * MatrixXd::Identity(rows, k);
  const MatrixXd v = qv.householderQ() * MatrixXd::Identity(cols, k);
  Eigen::VectorXd s(k);
  for (Eigen::Index i = 0; i < k; ++i) s(i) = std::pow(ratio, static_cast<double>(i));
  return u * s.asDiagonal() * v.transpose();
}

double orthogonality_defect(const MatrixXd& q) {
  return (q.transpose() * q - MatrixXd::Identity(q.cols(), q.cols())).norm();
}

}  // namespace

TEST(Linalg, SvdReconstructsAcrossSizes) {
  for (Eigen::Index n : {1, 7, 40, 41, 100, 220, 400}) {
    const MatrixXd a = random_matrix(n, n / 2 + 1, static_cast<std::uint64_t>(n));
    const auto s = svd(a);
    EXPECT_LT((a - s.U * s.S.asDiagonal() * s.Vt).norm(), 1e-10 * std::max(1.0, a.norm())) << n;
    EXPECT_LT(orthogonality_defect(s.U), 1e-10);
    EXPECT_LT(orthogonality_defect(s.Vt.transpose()), 1e-10);
    for (Eigen::Index i = 1; i < s.S.size(); ++i) EXPECT_GE(s.S(i - 1), s.S(i));
  }
}

TEST(Linalg, SvdHandlesDecayingSpectrum) {
  const MatrixXd a = decaying_matrix(300, 200, 0.7, 17);
  const auto s = svd(a);
  EXPECT_LT((a - s.U * s.S.asDiagonal() * s.Vt).norm(), 1e-10);
  EXPECT_NEAR(s.S(0), 1.0, 1e-12);
  EXPECT_NEAR(s.S(5), std::pow(0.7, 5), 1e-12);
}

TEST(Linalg, SvdRejectsNonFiniteInput) {
  MatrixXd a = MatrixXd::Ones(3, 3);
  a(1, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(svd(a), bhpair::Error);
}

TEST(Linalg, TruncatedSvdMatchesLeadingTriplets) {
  const MatrixXd a = decaying_matrix(400, 240, 0.8, 5);
  const auto full = svd(a);
  const auto part = truncated_svd(a, 20);
  ASSERT_EQ(part.S.size(), 20);
  for (Eigen::Index i = 0; i < 20; ++i) EXPECT_NEAR(part.S(i), full.S(i), 1e-10);
  EXPECT_LT(orthogonality_defect(part.U), 1e-10);
  EXPECT_LT(orthogonality_defect(part.Vt.transpose()), 1e-10);
  const MatrixXd best = full.U.leftCols(20) * full.S.head(20).asDiagonal() * full.Vt.topRows(20);
  EXPECT_LT((part.U * part.S.asDiagonal() * part.Vt - best).norm(), 1e-8);
}

TEST(Linalg, TruncatedSvdIsReproducible) {
  const MatrixXd a = random_matrix(300, 200, 23);
  const auto x = truncated_svd(a, 12);
  const auto y = truncated_svd(a, 12);
  EXPECT_EQ(x.S, y.S);
  EXPECT_EQ(x.U, y.U);
}

TEST(Linalg, TruncatedSvdSmallRankFallsBackToFull) {
  const MatrixXd a = random_matrix(10, 8, 2);
  const auto part = truncated_svd(a, 3);
  const auto full = svd(a);
  EXPECT_NEAR((part.S - full.S.head(3)).norm(), 0.0, 1e-12);
  EXPECT_EQ(truncated_svd(a, 50).S.size(), 8);
}

TEST(Linalg, ProductSvdIsExact) {
  for (Eigen::Index inner : {3, 20, 60}) {
    const MatrixXd left = random_matrix(200, inner, 31 + inner);
    const MatrixXd right = random_matrix(inner, 150, 77 + inner);
    const auto s = product_svd(left, right);
    const MatrixXd prod = left * right;
    EXPECT_LT((prod - s.U * s.S.asDiagonal() * s.Vt).norm(), 1e-10 * prod.norm()) << inner;
    EXPECT_LT(orthogonality_defect(s.U), 1e-10);
    EXPECT_LT(orthogonality_defect(s.Vt.transpose()), 1e-10);
    const auto direct = svd(prod);
    for (Eigen::Index i = 0; i < s.S.size(); ++i) EXPECT_NEAR(s.S(i), direct.S(i), 1e-9 * prod.norm());
  }
  EXPECT_THROW(product_svd(MatrixXd::Ones(3, 2), MatrixXd::Ones(3, 2)), bhpair::Error);
}

TEST(Linalg, LanczosFindsLowestEigenvalue) {
  const MatrixXd m = random_matrix(120, 120, 8);
  const MatrixXd h = m + m.transpose();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(h);
  auto apply = [&](const Eigen::VectorXd& in, Eigen::VectorXd& out) { out = h * in; };
  const auto res = bhpair::detail::lanczos_lowest<double>(apply, Eigen::VectorXd::Ones(120), 1e-10);
  EXPECT_TRUE(res.converged);
  EXPECT_NEAR(res.value, es.eigenvalues()(0), 1e-8);
}
