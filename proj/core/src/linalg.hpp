#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "bhpair/error.hpp"

namespace bhpair::detail {

struct Svd {
  Eigen::MatrixXd U;
  Eigen::VectorXd S;
  Eigen::MatrixXd Vt;
};

/// Thin SVD, singular values in descending order.
Svd svd(const Eigen::MatrixXd& A);

/// Leading `rank` singular triplets. Large matrices go through subspace
/// iteration from a fixed pseudo-random start, so results are reproducible.
Svd truncated_svd(const Eigen::MatrixXd& A, Eigen::Index rank);

/// Thin SVD of left * right, exact, at the cost of the inner dimension.
Svd product_svd(const Eigen::MatrixXd& left, const Eigen::MatrixXd& right);

/// Uniform numbers in [-1, 1) from raw 64-bit draws, identical on every platform.
class UniformStream {
 public:
  explicit UniformStream(std::uint64_t seed) : engine_(seed) {}
  double next() { return static_cast<double>(engine_() >> 11) * 0x1.0p-52 - 1.0; }

 private:
  std::mt19937_64 engine_;
};

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
struct LanczosResult {
  double value = 0.0;
  Vec<Scalar> vector;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Lowest eigenpair of a Hermitian operator given only its action `apply(in, out)`.
/// Restarted Lanczos with full reorthogonalization; restarts from the current Ritz vector.
template <typename Scalar, typename Apply>
LanczosResult<Scalar> lanczos_lowest(Apply&& apply, Vec<Scalar> start, double tol,
                                     int krylov_dim = 60, int max_restarts = 200) {
  const Eigen::Index n = start.size();
  LanczosResult<Scalar> res;
  if (n == 0) throw Error("lanczos: empty space");
  if (start.norm() == 0.0) start.setOnes();
  start.normalize();
  const int m_max = static_cast<int>(std::min<Eigen::Index>(krylov_dim, n));

  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> V(n, m_max);
  Vec<Scalar> w(n);
  for (int restart = 0; restart <= max_restarts; ++restart) {
    V.col(0) = start;
    Eigen::VectorXd alpha(m_max), beta(m_max);
    int m = 0;
    bool breakdown = false;
    for (int j = 0; j < m_max; ++j) {
      const Vec<Scalar> vj = V.col(j);
      apply(vj, w);
      ++res.iterations;
      alpha(j) = std::real(vj.dot(w));
      // Two passes of classical Gram-Schmidt against the whole basis.
      for (int pass = 0; pass < 2; ++pass) {
        Vec<Scalar> coeff = V.leftCols(j + 1).adjoint() * w;
        w.noalias() -= V.leftCols(j + 1) * coeff;
      }
      m = j + 1;
      const double b = w.norm();
      beta(j) = b;
      if (b < 1e-14) {
        breakdown = true;
        break;
      }
      if (j + 1 < m_max) V.col(j + 1) = w / b;
    }
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
    for (int j = 0; j < m; ++j) {
      T(j, j) = alpha(j);
      if (j + 1 < m) T(j, j + 1) = T(j + 1, j) = beta(j);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    const Eigen::VectorXd y = es.eigenvectors().col(0);
    res.value = es.eigenvalues()(0);
    Vec<Scalar> x = V.leftCols(m) * y.cast<Scalar>();
    x.normalize();
    const double estimate = breakdown ? 0.0 : std::abs(beta(m - 1) * y(m - 1));
    if (breakdown || estimate < tol * std::max(1.0, std::abs(res.value)) || restart == max_restarts) {
      apply(x, w);
      res.value = std::real(x.dot(w));
      res.residual = (w - res.value * x).norm();
      res.vector = std::move(x);
      res.converged = res.residual < 10.0 * tol * std::max(1.0, std::abs(res.value)) || breakdown;
      if (res.converged || restart == max_restarts) return res;
      start = res.vector;
      continue;
    }
    start = x;
  }
  return res;
}

}  // namespace bhpair::detail
