#include "linalg.hpp"

#include <algorithm>

#include <Eigen/QR>
#include <Eigen/SVD>

namespace bhpair::detail {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;

template <class Decomposition>
Svd extract(const Decomposition& dec) {
  Svd out;
  out.U = dec.matrixU();
  out.S = dec.singularValues();
  out.Vt = dec.matrixV().transpose();
  return out;
}

bool reconstructs(const MatrixXd& A, const Svd& s) {
  if (!s.U.allFinite() || !s.S.allFinite() || !s.Vt.allFinite()) return false;
  const double scale = std::max(1.0, A.norm());
  return (A - s.U * s.S.asDiagonal() * s.Vt).norm() <= 1e-10 * scale;
}

Svd truncate(Svd s, Index rank) {
  rank = std::min(rank, s.S.size());
  s.U.conservativeResize(Eigen::NoChange, rank);
  s.S.conservativeResize(rank);
  s.Vt.conservativeResize(rank, Eigen::NoChange);
  return s;
}

MatrixXd orthonormal_columns(const MatrixXd& m) {
  Eigen::HouseholderQR<MatrixXd> qr(m);
  return qr.householderQ() * MatrixXd::Identity(m.rows(), m.cols());
}

}  // namespace

// Eigen 3.4 BDCSVD occasionally returns NaN on finite input, so every
// result is checked and the slower one-sided Jacobi SVD takes over on failure.
Svd svd(const MatrixXd& A) {
  if (A.size() == 0) return {};
  if (!A.allFinite()) throw Error("SVD of a non-finite matrix");
  Svd out = extract(Eigen::BDCSVD<MatrixXd>(A, Eigen::ComputeThinU | Eigen::ComputeThinV));
  if (reconstructs(A, out)) return out;
  out = extract(Eigen::JacobiSVD<MatrixXd>(A, Eigen::ComputeThinU | Eigen::ComputeThinV));
  if (!reconstructs(A, out)) throw Error("SVD failed to converge");
  return out;
}

Svd truncated_svd(const MatrixXd& A, Index rank) {
  const Index n = std::min(A.rows(), A.cols());
  rank = std::clamp<Index>(rank, 0, n);
  const Index probe = rank + std::max<Index>(8, rank / 2);
  if (rank == 0 || 2 * probe >= n) return truncate(svd(A), rank);
  if (!A.allFinite()) throw Error("SVD of a non-finite matrix");

  UniformStream rng(0x9e3779b97f4a7c15ULL);
  MatrixXd start(A.cols(), probe);
  for (Index j = 0; j < probe; ++j)
    for (Index i = 0; i < A.cols(); ++i) start(i, j) = rng.next();
  MatrixXd q = orthonormal_columns(A * start);

  // Subspace iteration until the leading singular vectors are converged to
  // roundoff; a looser stop leaks weight between symmetry sectors.
  const double tol = 1e-13 * A.norm();
  for (int it = 0; it < 60; ++it) {
    q = orthonormal_columns(A * orthonormal_columns(A.transpose() * q));
    Svd small = truncate(svd(q.transpose() * A), rank);
    small.U = q * small.U;
    const double residual = (A * small.Vt.transpose() - small.U * small.S.asDiagonal()).norm();
    if (residual <= tol) return small;
  }
  return truncate(svd(A), rank);
}

Svd product_svd(const MatrixXd& left, const MatrixXd& right) {
  if (left.cols() != right.rows()) throw Error("product_svd: inner dimensions differ");
  const Index inner = left.cols();
  if (inner >= std::min(left.rows(), right.cols())) return svd(left * right);
  Eigen::HouseholderQR<MatrixXd> ql(left);
  Eigen::HouseholderQR<MatrixXd> qr(right.transpose());
  const MatrixXd rl = ql.matrixQR().topRows(inner).triangularView<Eigen::Upper>();
  const MatrixXd rr = qr.matrixQR().topRows(inner).triangularView<Eigen::Upper>();
  Svd core = svd(rl * rr.transpose());
  core.U = ql.householderQ() * (MatrixXd::Identity(left.rows(), inner) * core.U);
  core.Vt = (qr.householderQ() * (MatrixXd::Identity(right.cols(), inner) * core.Vt.transpose())).transpose();
  return core;
}

}  // namespace bhpair::detail
