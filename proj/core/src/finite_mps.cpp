#include "bhpair/finite_mps.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "bhpair/error.hpp"
#include "linalg.hpp"

namespace bhpair {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using SiteTensor = std::vector<MatrixXd>;
using Env = std::vector<MatrixXd>;

struct Entry {
  int bra;
  int ket;
  double value;
};

// Lower-triangular MPO: row index is the left virtual bond. Index dim-1 means
// "nothing placed yet", index 0 means "term completed".
struct Mpo {
  int dim = 0;
  std::vector<std::vector<std::vector<Entry>>> w;  // w[b][b'] -> sparse d x d
};

std::vector<Entry> sparse(const MatrixXd& m, double scale = 1.0) {
  std::vector<Entry> out;
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j)
      if (m(i, j) != 0.0) out.push_back({i, j, scale * m(i, j)});
  return out;
}

Mpo build_mpo(const LocalTerms& terms, int n_max) {
  const auto products = terms.bond.products(n_max);
  Mpo mpo;
  mpo.dim = 2 + static_cast<int>(products.size());
  const int last = mpo.dim - 1;
  mpo.w.assign(static_cast<std::size_t>(mpo.dim),
               std::vector<std::vector<Entry>>(static_cast<std::size_t>(mpo.dim)));
  const MatrixXd id = identity_operator(n_max);
  mpo.w[0][0] = sparse(id);
  mpo.w[static_cast<std::size_t>(last)][static_cast<std::size_t>(last)] = sparse(id);
  mpo.w[static_cast<std::size_t>(last)][0] = sparse(terms.site.matrix(n_max));
  for (std::size_t k = 0; k < products.size(); ++k) {
    mpo.w[static_cast<std::size_t>(last)][k + 1] = sparse(products[k].left, products[k].coefficient);
    mpo.w[k + 1][0] = sparse(products[k].right);
  }
  return mpo;
}

Env left_boundary(int dim) {
  Env e(static_cast<std::size_t>(dim), MatrixXd::Zero(1, 1));
  e[static_cast<std::size_t>(dim - 1)](0, 0) = 1.0;
  return e;
}

Env right_boundary(int dim) {
  Env e(static_cast<std::size_t>(dim), MatrixXd::Zero(1, 1));
  e[0](0, 0) = 1.0;
  return e;
}

// L'[b'] = sum_{b,s,s'} W[b][b'](s,s') A^s^T L[b] A^s'
Env grow_left(const Env& L, const SiteTensor& A, const Mpo& mpo) {
  const Eigen::Index cr = A[0].cols();
  Env out(static_cast<std::size_t>(mpo.dim), MatrixXd::Zero(cr, cr));
  for (int b = 0; b < mpo.dim; ++b) {
    if (L[static_cast<std::size_t>(b)].isZero(0.0)) continue;
    std::vector<MatrixXd> la(A.size());
    for (std::size_t s = 0; s < A.size(); ++s) la[s] = L[static_cast<std::size_t>(b)] * A[s];
    for (int bp = 0; bp < mpo.dim; ++bp)
      for (const auto& e : mpo.w[static_cast<std::size_t>(b)][static_cast<std::size_t>(bp)])
        out[static_cast<std::size_t>(bp)].noalias() +=
            e.value * A[static_cast<std::size_t>(e.bra)].transpose() * la[static_cast<std::size_t>(e.ket)];
  }
  return out;
}

// R'[b] = sum_{b',s,s'} W[b][b'](s,s') B^s R[b'] B^s'^T
Env grow_right(const Env& R, const SiteTensor& B, const Mpo& mpo) {
  const Eigen::Index cl = B[0].rows();
  Env out(static_cast<std::size_t>(mpo.dim), MatrixXd::Zero(cl, cl));
  for (int bp = 0; bp < mpo.dim; ++bp) {
    if (R[static_cast<std::size_t>(bp)].isZero(0.0)) continue;
    std::vector<MatrixXd> rb(B.size());
    for (std::size_t s = 0; s < B.size(); ++s)
      rb[s] = R[static_cast<std::size_t>(bp)] * B[s].transpose();
    for (int b = 0; b < mpo.dim; ++b)
      for (const auto& e : mpo.w[static_cast<std::size_t>(b)][static_cast<std::size_t>(bp)])
        out[static_cast<std::size_t>(b)].noalias() +=
            e.value * B[static_cast<std::size_t>(e.bra)] * rb[static_cast<std::size_t>(e.ket)];
  }
  return out;
}

// Effective two-site Hamiltonian acting on theta stored as a (d cl) x (d cr)
// matrix with rows s1*cl + a and columns s2*cr + c.
class TwoSiteOperator {
 public:
  TwoSiteOperator(const Env& L, const Env& R, const Mpo& mpo, int d, Eigen::Index cl, Eigen::Index cr)
      : L_(L), R_(R), mpo_(mpo), d_(d), cl_(cl), cr_(cr) {}

  void apply(const VectorXd& in, VectorXd& out) const {
    const Eigen::Map<const MatrixXd> theta(in.data(), d_ * cl_, d_ * cr_);
    const int D = mpo_.dim;
    // T[b''][t2] = theta(:, t2 block) R[b'']^T, rows cover (t1, a).
    std::vector<std::vector<MatrixXd>> T(static_cast<std::size_t>(D));
    for (int b2 = 0; b2 < D; ++b2) {
      if (R_[static_cast<std::size_t>(b2)].isZero(0.0)) continue;
      auto& tb = T[static_cast<std::size_t>(b2)];
      tb.resize(static_cast<std::size_t>(d_));
      for (int t2 = 0; t2 < d_; ++t2)
        tb[static_cast<std::size_t>(t2)].noalias() =
            theta.middleCols(t2 * cr_, cr_) * R_[static_cast<std::size_t>(b2)].transpose();
    }
    // U[b'][s2] = sum_{b'', t2} W[b'][b''](s2, t2) T[b''][t2]
    std::vector<std::vector<MatrixXd>> U(static_cast<std::size_t>(D));
    for (int b1 = 0; b1 < D; ++b1)
      for (int b2 = 0; b2 < D; ++b2) {
        const auto& entries = mpo_.w[static_cast<std::size_t>(b1)][static_cast<std::size_t>(b2)];
        if (entries.empty() || T[static_cast<std::size_t>(b2)].empty()) continue;
        auto& ub = U[static_cast<std::size_t>(b1)];
        if (ub.empty()) ub.assign(static_cast<std::size_t>(d_), MatrixXd::Zero(d_ * cl_, cr_));
        for (const auto& e : entries)
          ub[static_cast<std::size_t>(e.bra)] +=
              e.value * T[static_cast<std::size_t>(b2)][static_cast<std::size_t>(e.ket)];
      }
    // Y_b(a, (s1, s2, c)) = sum_{b', t1} W[b][b'](s1, t1) U[b'][s2](t1 block)
    MatrixXd result = MatrixXd::Zero(cl_, d_ * d_ * cr_);
    MatrixXd Y(cl_, d_ * d_ * cr_);
    for (int b = 0; b < D; ++b) {
      if (L_[static_cast<std::size_t>(b)].isZero(0.0)) continue;
      Y.setZero();
      bool any = false;
      for (int b1 = 0; b1 < D; ++b1) {
        const auto& entries = mpo_.w[static_cast<std::size_t>(b)][static_cast<std::size_t>(b1)];
        if (entries.empty() || U[static_cast<std::size_t>(b1)].empty()) continue;
        any = true;
        for (const auto& e : entries)
          for (int s2 = 0; s2 < d_; ++s2)
            Y.middleCols((e.bra * d_ + s2) * cr_, cr_) +=
                e.value *
                U[static_cast<std::size_t>(b1)][static_cast<std::size_t>(s2)].middleRows(e.ket * cl_, cl_);
      }
      if (any) result.noalias() += L_[static_cast<std::size_t>(b)] * Y;
    }
    out.resize(in.size());
    Eigen::Map<MatrixXd> dst(out.data(), d_ * cl_, d_ * cr_);
    for (int s1 = 0; s1 < d_; ++s1)
      for (int s2 = 0; s2 < d_; ++s2)
        dst.block(s1 * cl_, s2 * cr_, cl_, cr_) = result.middleCols((s1 * d_ + s2) * cr_, cr_);
  }

 private:
  const Env& L_;
  const Env& R_;
  const Mpo& mpo_;
  int d_;
  Eigen::Index cl_, cr_;
};

MatrixXd merge(const SiteTensor& left, const SiteTensor& right) {
  const int d = static_cast<int>(left.size());
  const Eigen::Index cl = left[0].rows(), cr = right[0].cols();
  MatrixXd theta(d * cl, d * cr);
  for (int s1 = 0; s1 < d; ++s1)
    for (int s2 = 0; s2 < d; ++s2)
      theta.block(s1 * cl, s2 * cr, cl, cr) =
          left[static_cast<std::size_t>(s1)] * right[static_cast<std::size_t>(s2)];
  return theta;
}

// Transfer with a single-site operator (nullptr means identity):
// sum_{s,s'} O(s,s') M^s^T V M^s'
MatrixXd transfer(const MatrixXd& V, const SiteTensor& M, const MatrixXd* op) {
  const int d = static_cast<int>(M.size());
  MatrixXd out = MatrixXd::Zero(M[0].cols(), M[0].cols());
  std::vector<MatrixXd> vm(static_cast<std::size_t>(d));
  for (int s = 0; s < d; ++s) vm[static_cast<std::size_t>(s)] = V * M[static_cast<std::size_t>(s)];
  for (int s = 0; s < d; ++s)
    for (int sp = 0; sp < d; ++sp) {
      const double w = op ? (*op)(s, sp) : (s == sp ? 1.0 : 0.0);
      if (w != 0.0)
        out.noalias() += w * M[static_cast<std::size_t>(s)].transpose() * vm[static_cast<std::size_t>(sp)];
    }
  return out;
}

// Identity environments from the right: Rn[i] covers sites i..L-1, oriented (bra, ket).
std::vector<MatrixXd> right_norms(const FiniteMPS& m) {
  std::vector<MatrixXd> rn(static_cast<std::size_t>(m.length + 1));
  rn[static_cast<std::size_t>(m.length)] = MatrixXd::Ones(1, 1);
  for (int i = m.length - 1; i >= 0; --i) {
    const auto& M = m.site[static_cast<std::size_t>(i)];
    MatrixXd acc = MatrixXd::Zero(M[0].rows(), M[0].rows());
    for (const auto& ms : M) acc.noalias() += ms * rn[static_cast<std::size_t>(i + 1)] * ms.transpose();
    rn[static_cast<std::size_t>(i)] = std::move(acc);
  }
  return rn;
}

}  // namespace

FiniteMPS finite_ground(const LocalTerms& terms, int length, const FiniteOptions& opt) {
  if (length < 4) throw ConfigError("finite chains need L >= 4");
  if (opt.chi < 2) throw ConfigError("chi must be at least 2");
  if (opt.n_max < 1) throw ConfigError("n_max must be at least 1");
  if (terms.has_phases()) throw ConfigError("finite MPS solver needs zero bond phases");
  const int d = opt.n_max + 1;
  const Mpo mpo = build_mpo(terms, opt.n_max);

  FiniteMPS m;
  m.length = length;
  m.n_max = opt.n_max;
  m.chi = opt.chi;
  m.site.resize(static_cast<std::size_t>(length));
  m.bond_weights.assign(static_cast<std::size_t>(length - 1), VectorXd::Ones(1));
  {
    const int n0 = lowest_diagonal_occupation(terms.site, opt.n_max);
    detail::UniformStream rng(opt.seed);
    for (auto& t : m.site) {
      VectorXd c(d);
      for (int s = 0; s < d; ++s) c(s) = rng.next();
      if (c.norm() > 0.0) c *= opt.perturbation / c.norm();
      c(n0) += 1.0;
      c.normalize();
      t.assign(static_cast<std::size_t>(d), MatrixXd::Zero(1, 1));
      for (int s = 0; s < d; ++s) t[static_cast<std::size_t>(s)](0, 0) = c(s);
    }
  }

  std::vector<Env> Ls(static_cast<std::size_t>(length + 1)), Rs(static_cast<std::size_t>(length + 1));
  Ls[0] = left_boundary(mpo.dim);
  Rs[static_cast<std::size_t>(length)] = right_boundary(mpo.dim);
  for (int i = length - 1; i >= 2; --i)
    Rs[static_cast<std::size_t>(i)] = grow_right(Rs[static_cast<std::size_t>(i + 1)], m.site[static_cast<std::size_t>(i)], mpo);

  auto optimize = [&](int i, bool moving_right) {
    auto& left = m.site[static_cast<std::size_t>(i)];
    auto& right = m.site[static_cast<std::size_t>(i + 1)];
    const Eigen::Index cl = left[0].rows(), cr = right[0].cols();
    const MatrixXd theta = merge(left, right);
    const TwoSiteOperator op(Ls[static_cast<std::size_t>(i)], Rs[static_cast<std::size_t>(i + 2)], mpo, d, cl, cr);
    VectorXd start = Eigen::Map<const VectorXd>(theta.data(), theta.size());
    auto res = detail::lanczos_lowest<double>(
        [&](const VectorXd& x, VectorXd& y) { op.apply(x, y); }, start, 1e-10, opt.krylov_dim, 3);
    const Eigen::Map<const MatrixXd> ground(res.vector.data(), d * cl, d * cr);
    const detail::Svd sv = detail::truncated_svd(ground, opt.chi);
    const double total = ground.norm();
    Eigen::Index keep = 0;
    while (keep < sv.S.size() && keep < opt.chi && sv.S(keep) / total > opt.schmidt_cutoff) ++keep;
    keep = std::max<Eigen::Index>(keep, 1);
    const VectorXd weights = sv.S.head(keep) / sv.S.head(keep).norm();
    m.bond_weights[static_cast<std::size_t>(i)] = weights;
    for (int s = 0; s < d; ++s) {
      const MatrixXd u = sv.U.block(s * cl, 0, cl, keep);
      const MatrixXd v = sv.Vt.block(0, s * cr, keep, cr);
      if (moving_right) {
        left[static_cast<std::size_t>(s)] = u;
        right[static_cast<std::size_t>(s)] = weights.asDiagonal() * v;
      } else {
        left[static_cast<std::size_t>(s)] = u * weights.asDiagonal();
        right[static_cast<std::size_t>(s)] = v;
      }
    }
    if (moving_right)
      Ls[static_cast<std::size_t>(i + 1)] = grow_left(Ls[static_cast<std::size_t>(i)], left, mpo);
    else
      Rs[static_cast<std::size_t>(i + 1)] = grow_right(Rs[static_cast<std::size_t>(i + 2)], right, mpo);
    return res.value;
  };

  double previous = std::numeric_limits<double>::infinity();
  for (int sweep = 0; sweep < opt.max_sweeps; ++sweep) {
    for (int i = 0; i <= length - 2; ++i) optimize(i, true);
    double e = 0.0;
    for (int i = length - 2; i >= 0; --i) e = optimize(i, false);
    m.sweep_energies.push_back(e);
    m.energy = e;
    if (sweep + 1 >= opt.min_sweeps && std::abs(previous - e) < opt.tolerance_per_site * length) {
      m.converged = true;
      break;
    }
    previous = e;
  }
  if (!m.converged)
    throw ConvergenceError("DMRG did not converge within " + std::to_string(opt.max_sweeps) + " sweeps");
  measure_finite(m);
  return m;
}

double energy_expectation(const FiniteMPS& m, const LocalTerms& terms) {
  const Mpo mpo = build_mpo(terms, m.n_max);
  Env e = left_boundary(mpo.dim);
  MatrixXd norm = MatrixXd::Ones(1, 1);
  for (const auto& t : m.site) {
    e = grow_left(e, t, mpo);
    norm = transfer(norm, t, nullptr);
  }
  return e[0](0, 0) / norm(0, 0);
}

void measure_finite(FiniteMPS& m) {
  const int L = m.length;
  const int nm = m.n_max;
  const MatrixXd a = annihilation(nm);
  const MatrixXd ad = creation(nm);
  const MatrixXd n = number_operator(nm);
  const MatrixXd n2 = n * n;
  const auto rn = right_norms(m);
  const double norm = rn[0](0, 0);

  auto close = [&](const MatrixXd& v, int next) {
    return v.cwiseProduct(rn[static_cast<std::size_t>(next)]).sum() / norm;
  };

  m.density.assign(static_cast<std::size_t>(L), 0.0);
  m.density_sq.assign(static_cast<std::size_t>(L), 0.0);
  m.amp.assign(static_cast<std::size_t>(L), 0.0);
  std::vector<double> create(static_cast<std::size_t>(L), 0.0);
  m.pair_correlator = MatrixXd::Zero(L, L);

  MatrixXd env = MatrixXd::Ones(1, 1);
  for (int i = 0; i < L; ++i) {
    const auto& M = m.site[static_cast<std::size_t>(i)];
    m.density[static_cast<std::size_t>(i)] = close(transfer(env, M, &n), i + 1);
    m.density_sq[static_cast<std::size_t>(i)] = close(transfer(env, M, &n2), i + 1);
    m.amp[static_cast<std::size_t>(i)] = close(transfer(env, M, &a), i + 1);
    create[static_cast<std::size_t>(i)] = close(transfer(env, M, &ad), i + 1);
    MatrixXd v = transfer(env, M, &ad);
    for (int j = i + 1; j < L; ++j) {
      const auto& Mj = m.site[static_cast<std::size_t>(j)];
      m.pair_correlator(i, j) = close(transfer(v, Mj, &ad), j + 1);
      if (j + 1 < L) v = transfer(v, Mj, nullptr);
    }
    env = transfer(env, M, nullptr);
  }
  for (int i = 0; i < L; ++i)
    for (int j = i + 1; j < L; ++j) {
      const double c = m.pair_correlator(i, j) - create[static_cast<std::size_t>(i)] * create[static_cast<std::size_t>(j)];
      m.pair_correlator(i, j) = c;
      m.pair_correlator(j, i) = c;
    }
}

CorrelationProfile correlation_length(const MatrixXd& c, int first, int last) {
  const int L = static_cast<int>(c.rows());
  if (c.cols() != L) throw ConfigError("correlator matrix must be square");
  first = std::clamp(first, 0, std::max(0, L - 1));
  last = std::clamp(last, first, std::max(0, L - 1));
  CorrelationProfile p;
  p.xi_per_site.assign(static_cast<std::size_t>(L), 0.0);
  for (int i = 0; i < L; ++i) {
    double num = 0.0, den = 0.0;
    for (int j = 0; j < L; ++j) {
      if (j == i) continue;
      const double w = std::abs(c(i, j));
      num += std::abs(i - j) * w;
      den += w;
    }
    p.xi_per_site[static_cast<std::size_t>(i)] = den > 0.0 ? num / den : 0.0;
  }
  p.argmax = first;
  p.max_xi = L > 0 ? p.xi_per_site[static_cast<std::size_t>(first)] : 0.0;
  for (int i = first; i <= last && i < L; ++i)
    if (p.xi_per_site[static_cast<std::size_t>(i)] > p.max_xi) {
      p.max_xi = p.xi_per_site[static_cast<std::size_t>(i)];
      p.argmax = i;
    }
  return p;
}

CorrelationProfile correlation_length(const FiniteMPS& m) {
  return correlation_length(m.pair_correlator, m.length / 4, (3 * m.length) / 4);
}

}  // namespace bhpair
