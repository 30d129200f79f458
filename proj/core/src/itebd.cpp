#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <string>

#include <Eigen/Eigenvalues>

#include "bhpair/error.hpp"
#include "bhpair/mps.hpp"
#include "linalg.hpp"

namespace bhpair {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Tensor = std::vector<MatrixXd>;

// Two-site Hamiltonian for one bond: the bond term plus half of each site term.
MatrixXd bond_hamiltonian(const LocalTerms& terms, int n_max) {
  const int d = n_max + 1;
  const MatrixXd site = terms.site.matrix(n_max);
  MatrixXd h = terms.bond.real_matrix(n_max);
  for (int t1 = 0; t1 < d; ++t1)
    for (int t2 = 0; t2 < d; ++t2)
      for (int s = 0; s < d; ++s) {
        h(t1 * d + t2, s * d + t2) += 0.5 * site(t1, s);
        h(t1 * d + t2, t1 * d + s) += 0.5 * site(t2, s);
      }
  return h;
}

MatrixXd imaginary_time_gate(const MatrixXd& h, double tau) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(h);
  const VectorXd w = (-tau * (es.eigenvalues().array() - es.eigenvalues()(0))).exp();
  return es.eigenvectors() * w.asDiagonal() * es.eigenvectors().transpose();
}

MatrixXd kron(const MatrixXd& A, const MatrixXd& B) {
  MatrixXd out(A.rows() * B.rows(), A.cols() * B.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j)
      out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return out;
}

// Tr(rho op) for symmetric rho.
double trace_with(const MatrixXd& rho, const MatrixXd& op) { return rho.cwiseProduct(op.transpose()).sum(); }

// theta^{s1 s2} = L^{s1} R^{s2}, stored with rows s1*ca + a and columns s2*cc + c.
MatrixXd pair_block(const Tensor& left, const Tensor& right) {
  const int d = static_cast<int>(left.size());
  const Eigen::Index ca = left[0].rows(), cb = left[0].cols(), cc = right[0].cols();
  MatrixXd mstack(d * ca, cb);
  MatrixXd nstack(cb, d * cc);
  for (int s = 0; s < d; ++s) {
    mstack.middleRows(s * ca, ca) = left[static_cast<std::size_t>(s)];
    nstack.middleCols(s * cc, cc) = right[static_cast<std::size_t>(s)];
  }
  return mstack * nstack;
}

void scale_rows(MatrixXd& big, const VectorXd& w, int d) {
  const Eigen::Index c = w.size();
  for (int s = 0; s < d; ++s) big.middleRows(s * c, c) = w.asDiagonal() * big.middleRows(s * c, c);
}

// (s1 a, s2 c) -> (s1 s2, a c)
MatrixXd to_physical_rows(const MatrixXd& big, int d, Eigen::Index ca, Eigen::Index cc) {
  MatrixXd x(d * d, ca * cc);
  for (int s1 = 0; s1 < d; ++s1)
    for (int s2 = 0; s2 < d; ++s2)
      for (Eigen::Index a = 0; a < ca; ++a)
        x.row(s1 * d + s2).segment(a * cc, cc) = big.block(s1 * ca + a, s2 * cc, 1, cc);
  return x;
}

MatrixXd from_physical_rows(const MatrixXd& x, int d, Eigen::Index ca, Eigen::Index cc) {
  MatrixXd big(d * ca, d * cc);
  for (int s1 = 0; s1 < d; ++s1)
    for (int s2 = 0; s2 < d; ++s2)
      for (Eigen::Index a = 0; a < ca; ++a)
        big.block(s1 * ca + a, s2 * cc, 1, cc) = x.row(s1 * d + s2).segment(a * cc, cc);
  return big;
}

// Bond 0 joins A|B and bond 1 joins B|A; the left site of bond `which` is `which`.
const VectorXd& weights_left_of(const MPSState& st, std::size_t site) { return st.schmidt[1 - site]; }

// Normalized two-site density matrix on bond `which`, rows/cols s1*d + s2.
MatrixXd reduced_two_site(const MPSState& st, int which) {
  const int d = st.phys_dim();
  const std::size_t l = static_cast<std::size_t>(which), r = 1 - l;
  MatrixXd big = pair_block(st.tensors[l], st.tensors[r]);
  scale_rows(big, weights_left_of(st, l), d);
  const MatrixXd x = to_physical_rows(big, d, st.tensors[l][0].rows(), st.tensors[r][0].cols());
  const MatrixXd rho = x * x.transpose();
  return rho / rho.trace();
}

// Gate on bond `which`, then truncation to chi. Right-normalized tensors are
// rebuilt without dividing by small Schmidt weights.
// Number of Schmidt values to keep: at most `limit`, above `cutoff` relative to
// `total`, and never splitting a degenerate multiplet, since a cut through one
// mixes symmetry sectors.
Eigen::Index kept_count(const Eigen::VectorXd& s, Eigen::Index limit, double total, double cutoff) {
  Eigen::Index keep = 0;
  while (keep < s.size() && keep < limit && s(keep) / total > cutoff) ++keep;
  while (keep > 1 && keep < s.size() && s(keep) >= (1.0 - 1e-8) * s(keep - 1)) --keep;
  return keep;
}

using Charges = std::vector<int>;
using Indices = std::vector<Eigen::Index>;

// Charge added by site `site` in physical state s; zero when charges are not tracked.
int charge_step(const MPSState& st, std::size_t site, int s) {
  if (!st.charged()) return 0;
  return site == 0 ? s : -s;
}

// Labels of bond `bond`; a single sector when charges are not tracked.
Charges bond_charges(const MPSState& st, std::size_t bond) {
  if (st.charged()) return st.charges[bond];
  return Charges(static_cast<std::size_t>(st.schmidt[bond].size()), 0);
}

// Labels of rows (s, a) of a physical-major stack over bond labels `q`.
Charges stacked_charges(const Charges& q, const MPSState& st, std::size_t site, int sign) {
  Charges out;
  out.reserve(q.size() * static_cast<std::size_t>(st.phys_dim()));
  for (int s = 0; s < st.phys_dim(); ++s)
    for (int c : q) out.push_back(c + sign * charge_step(st, site, s));
  return out;
}

std::map<int, Indices> sectors_of(const Charges& q) {
  std::map<int, Indices> out;
  for (std::size_t i = 0; i < q.size(); ++i) out[q[i]].push_back(static_cast<Eigen::Index>(i));
  return out;
}

struct ChargedSvd {
  detail::Svd svd;
  Charges charges;
};

// SVD of a matrix coupling only rows and columns of equal charge, assembled
// from per-sector decompositions so that every singular vector has one charge.
// Entries between different charges are dropped. `factor(charge, rows, cols)`
// decomposes one sector.
template <class Factor>
ChargedSvd charged_svd(const Charges& row_q, const Charges& col_q, Factor factor) {
  const auto rows_by = sectors_of(row_q);
  const auto cols_by = sectors_of(col_q);
  struct Part {
    const Indices* rows;
    const Indices* cols;
    detail::Svd svd;
    int charge;
  };
  std::vector<Part> parts;
  for (const auto& [charge, rows] : rows_by) {
    const auto it = cols_by.find(charge);
    if (it == cols_by.end()) continue;
    parts.push_back({&rows, &it->second, factor(charge, rows, it->second), charge});
  }
  std::vector<std::pair<std::size_t, Eigen::Index>> order;
  for (std::size_t p = 0; p < parts.size(); ++p)
    for (Eigen::Index j = 0; j < parts[p].svd.S.size(); ++j) order.emplace_back(p, j);
  std::stable_sort(order.begin(), order.end(), [&](const auto& x, const auto& y) {
    return parts[x.first].svd.S(x.second) > parts[y.first].svd.S(y.second);
  });

  const auto k = static_cast<Eigen::Index>(order.size());
  ChargedSvd out;
  out.svd.U = MatrixXd::Zero(static_cast<Eigen::Index>(row_q.size()), k);
  out.svd.S.resize(k);
  out.svd.Vt = MatrixXd::Zero(k, static_cast<Eigen::Index>(col_q.size()));
  for (Eigen::Index j = 0; j < k; ++j) {
    const auto& [p, idx] = order[static_cast<std::size_t>(j)];
    const Part& part = parts[p];
    out.svd.S(j) = part.svd.S(idx);
    for (std::size_t i = 0; i < part.rows->size(); ++i)
      out.svd.U((*part.rows)[i], j) = part.svd.U(static_cast<Eigen::Index>(i), idx);
    for (std::size_t i = 0; i < part.cols->size(); ++i)
      out.svd.Vt(j, (*part.cols)[i]) = part.svd.Vt(idx, static_cast<Eigen::Index>(i));
    out.charges.push_back(part.charge);
  }
  return out;
}

// Zeroes tensor entries that change the sublattice charge; they are roundoff.
void project_charges(MPSState& st) {
  if (!st.charged()) return;
  for (std::size_t site = 0; site < 2; ++site) {
    const Charges& left = st.charges[1 - site];
    const Charges& right = st.charges[site];
    for (int s = 0; s < st.phys_dim(); ++s) {
      MatrixXd& m = st.tensors[site][static_cast<std::size_t>(s)];
      const int step = charge_step(st, site, s);
      for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
          if (right[static_cast<std::size_t>(j)] != left[static_cast<std::size_t>(i)] + step) m(i, j) = 0.0;
    }
  }
}

Charges head(const Charges& q, Eigen::Index n) { return Charges(q.begin(), q.begin() + n); }

void update_bond(MPSState& st, int which, const MatrixXd& gate, double cutoff) {
  const int d = st.phys_dim();
  const std::size_t l = static_cast<std::size_t>(which), r = 1 - l;
  Tensor& bl = st.tensors[l];
  Tensor& br = st.tensors[r];
  const Eigen::Index ca = bl[0].rows(), cc = br[0].cols();

  const MatrixXd evolved = from_physical_rows(gate * to_physical_rows(pair_block(bl, br), d, ca, cc), d, ca, cc);
  MatrixXd weighted = evolved;
  scale_rows(weighted, weights_left_of(st, l), d);
  // Row (s1, a) and column (s2, c) meet on the middle bond with these charges.
  const Charges outer = bond_charges(st, r);
  const auto sv = charged_svd(stacked_charges(outer, st, l, +1), stacked_charges(outer, st, r, -1),
                              [&](int, const Indices& rows, const Indices& cols) {
                                // One extra triplet shows whether the cut would split a multiplet.
                                return detail::truncated_svd(weighted(rows, cols), st.chi + 1);
                              });

  const double total = weighted.norm();
  if (!(total > 0.0) || !std::isfinite(total)) throw ConvergenceError("iTEBD: Schmidt weights underflowed");
  const Eigen::Index keep = kept_count(sv.svd.S, st.chi, total, cutoff);
  if (keep == 0) throw ConvergenceError("iTEBD: Schmidt weights underflowed");
  const double kept = sv.svd.S.head(keep).norm();
  st.schmidt[l] = sv.svd.S.head(keep) / kept;
  if (st.charged()) st.charges[l] = head(sv.charges, keep);
  for (int s = 0; s < d; ++s) br[static_cast<std::size_t>(s)] = sv.svd.Vt.block(0, s * cc, keep, cc);
  for (int s1 = 0; s1 < d; ++s1) {
    MatrixXd acc = MatrixXd::Zero(ca, keep);
    for (int s2 = 0; s2 < d; ++s2)
      acc.noalias() += evolved.block(s1 * ca, s2 * cc, ca, cc) * br[static_cast<std::size_t>(s2)].transpose();
    bl[static_cast<std::size_t>(s1)] = acc / kept;
  }
  project_charges(st);
}

// X -> sum_s T^s X T^s^T
MatrixXd right_map(const Tensor& t, const MatrixXd& x) {
  MatrixXd y = MatrixXd::Zero(t[0].rows(), t[0].rows());
  for (const auto& ts : t) y.noalias() += ts * x * ts.transpose();
  return y;
}

// Y -> sum_s T^s^T Y T^s
MatrixXd left_map(const Tensor& t, const MatrixXd& y) {
  MatrixXd x = MatrixXd::Zero(t[0].cols(), t[0].cols());
  for (const auto& ts : t) x.noalias() += ts.transpose() * y * ts;
  return x;
}

// Dominant eigenvector of the cell transfer map, acting from the right on the
// outer bond (right = true) or from the left, by power iteration from `x`.
MatrixXd fixed_point(const Tensor& a, const Tensor& b, MatrixXd x, bool right, int max_iter, double tol) {
  x /= x.norm();
  for (int it = 0; it < max_iter; ++it) {
    MatrixXd y = right ? right_map(a, right_map(b, x)) : left_map(b, left_map(a, x));
    y = 0.5 * (y + y.transpose());
    if (y.trace() < 0.0) y = -y;
    y /= y.norm();
    const double change = (y - x).norm();
    x = std::move(y);
    if (change < tol) break;
  }
  return x;
}

// m = factor factor^T restricted to eigenvalues above cutoff * max, with the
// matching left inverse. m couples only equal charges `q`; each factor column
// carries the charge written to `factor_q`.
void psd_factor(const MatrixXd& m, const Charges& q, double cutoff, MatrixXd& factor, MatrixXd& inverse,
                Charges& factor_q) {
  struct Part {
    int charge;
    const Indices* idx;
    Eigen::SelfAdjointEigenSolver<MatrixXd> es;
  };
  const auto sectors = sectors_of(q);
  std::vector<Part> parts;
  double wmax = 0.0;
  for (const auto& [charge, idx] : sectors) {
    parts.push_back({charge, &idx, Eigen::SelfAdjointEigenSolver<MatrixXd>(MatrixXd(m(idx, idx)))});
    wmax = std::max(wmax, parts.back().es.eigenvalues().cwiseAbs().maxCoeff());
  }
  std::vector<std::pair<std::size_t, Eigen::Index>> kept;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const VectorXd& w = parts[p].es.eigenvalues();
    for (Eigen::Index i = w.size(); i-- > 0;)
      if (w(i) > cutoff * wmax) kept.emplace_back(p, i);
  }
  std::stable_sort(kept.begin(), kept.end(), [&](const auto& x, const auto& y) {
    return parts[x.first].es.eigenvalues()(x.second) > parts[y.first].es.eigenvalues()(y.second);
  });
  const auto k = static_cast<Eigen::Index>(kept.size());
  factor = MatrixXd::Zero(m.rows(), k);
  inverse = MatrixXd::Zero(k, m.rows());
  factor_q.clear();
  for (Eigen::Index j = 0; j < k; ++j) {
    const auto& [p, i] = kept[static_cast<std::size_t>(j)];
    const Part& part = parts[p];
    const double s = std::sqrt(part.es.eigenvalues()(i));
    for (std::size_t r = 0; r < part.idx->size(); ++r) {
      const double v = part.es.eigenvectors()(static_cast<Eigen::Index>(r), i);
      factor((*part.idx)[r], j) = v * s;
      inverse(j, (*part.idx)[r]) = v / s;
    }
    factor_q.push_back(part.charge);
  }
}

// One gauge fix from the transfer-operator fixed points of the two-site cell.
void canonicalize_once(MPSState& st, double cutoff, int max_iter, double tol) {
  const int d = st.phys_dim();
  const Tensor& a = st.tensors[0];
  const Tensor& b = st.tensors[1];
  const Eigen::Index n = a[0].rows();
  const Eigen::Index mid = a[0].cols();

  const Charges outer = bond_charges(st, 1);
  const Charges middle = bond_charges(st, 0);

  const MatrixXd R = fixed_point(a, b, MatrixXd::Identity(n, n), true, max_iter, tol);
  const MatrixXd L = fixed_point(a, b, MatrixXd(st.schmidt[1].cwiseAbs2().asDiagonal()), false, max_iter, tol);
  MatrixXd X, Xinv, F, Finv;
  Charges xq, fq;
  psd_factor(R, outer, 1e-14, X, Xinv, xq);  // R = X X^T
  psd_factor(L, outer, 1e-30, F, Finv, fq);  // L = F F^T

  const MatrixXd overlap = F.transpose() * X;
  const auto sv = charged_svd(fq, xq, [&](int, const Indices& rows, const Indices& cols) {
    return detail::svd(overlap(rows, cols));
  });
  const double total = sv.svd.S.norm();
  Eigen::Index k = 0;
  while (k < sv.svd.S.size() && sv.svd.S(k) / total > cutoff) ++k;
  if (k == 0) throw ConvergenceError("canonical form: vanishing Schmidt spectrum");
  const VectorXd lam = sv.svd.S.head(k) / sv.svd.S.head(k).norm();
  const Charges lam_q = head(sv.charges, k);
  const MatrixXd to_left = sv.svd.Vt.topRows(k) * Xinv;
  const MatrixXd to_right = X * sv.svd.Vt.topRows(k).transpose();

  Tensor na(static_cast<std::size_t>(d)), nb(static_cast<std::size_t>(d));
  for (std::size_t s = 0; s < na.size(); ++s) {
    na[s] = to_left * a[s];
    nb[s] = b[s] * to_right;
  }
  const double scale = std::sqrt(right_map(na, right_map(nb, MatrixXd::Identity(k, k))).trace() / double(k));
  for (auto& m : na) m /= scale;

  // Split the cell again with the new weights on its outer bonds.
  MatrixXd left_stack(d * k, mid);
  MatrixXd right_stack(mid, d * k);
  for (int s = 0; s < d; ++s) {
    left_stack.middleRows(s * k, k) = lam.asDiagonal() * na[static_cast<std::size_t>(s)];
    right_stack.middleCols(s * k, k) = nb[static_cast<std::size_t>(s)];
  }
  const auto by_middle = sectors_of(middle);
  const auto split = charged_svd(
      stacked_charges(lam_q, st, 0, +1), stacked_charges(lam_q, st, 1, -1),
      [&](int charge, const Indices& rows, const Indices& cols) {
        const auto inner = by_middle.find(charge);
        if (inner == by_middle.end()) return detail::Svd{};
        return detail::product_svd(left_stack(rows, inner->second), right_stack(inner->second, cols));
      });
  const double split_total = split.svd.S.norm();
  const Eigen::Index k2 = kept_count(split.svd.S, st.chi > 0 ? st.chi : split.svd.S.size(), split_total, cutoff);
  if (k2 == 0) throw ConvergenceError("canonical form: vanishing Schmidt spectrum");
  const double kept = split.svd.S.head(k2).norm();

  Tensor fb(static_cast<std::size_t>(d)), fa(static_cast<std::size_t>(d));
  MatrixXd glue = MatrixXd::Zero(mid, k2);
  for (int s = 0; s < d; ++s) {
    fb[static_cast<std::size_t>(s)] = split.svd.Vt.block(0, s * k, k2, k);
    glue.noalias() += nb[static_cast<std::size_t>(s)] * fb[static_cast<std::size_t>(s)].transpose();
  }
  for (std::size_t s = 0; s < fa.size(); ++s) fa[s] = na[s] * glue / kept;
  st.tensors[0] = std::move(fa);
  st.tensors[1] = std::move(fb);
  st.schmidt[0] = split.svd.S.head(k2) / kept;
  st.schmidt[1] = lam;
  if (st.charged()) st.charges = {head(split.charges, k2), lam_q};
  project_charges(st);
  st.canonical_residual = canonical_residual(st);
}

// Self-consistent site state under the hopping field 2 * hopping * psi (a + a+),
// psi = <a>. Inside insulating lobes it relaxes to the Fock state.
VectorXd decoupled_site_state(const LocalTerms& terms, int n_max) {
  const MatrixXd a = annihilation(n_max);
  const MatrixXd field = a + a.transpose();
  const MatrixXd site = terms.site.matrix(n_max);
  double psi = 1.0;
  VectorXd v;
  for (int it = 0; it < 2000; ++it) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(site + 2.0 * terms.bond.hopping * psi * field);
    v = es.eigenvectors().col(0);
    const double next = std::abs(v.dot(a * v));
    const bool settled = std::abs(next - psi) < 1e-13;
    psi = next;
    if (settled) break;
  }
  Eigen::Index top = 0;
  v.cwiseAbs().maxCoeff(&top);
  return v(top) < 0.0 ? VectorXd(-v) : v;
}

void check_terms(const LocalTerms& terms) {
  if (terms.has_phases()) throw ConfigError("MPS solvers need zero bond phases (boost d = 0)");
}

}  // namespace

MPSState product_state(int n_max, int occupation, double perturbation, std::uint64_t seed) {
  if (n_max < 1) throw ConfigError("n_max must be at least 1");
  if (occupation < 0 || occupation > n_max) throw ConfigError("initial occupation outside the cutoff");
  return product_state(VectorXd::Unit(n_max + 1, occupation), perturbation, seed);
}

MPSState product_state(const VectorXd& site_state, double perturbation, std::uint64_t seed) {
  const auto d = site_state.size();
  if (d < 2) throw ConfigError("n_max must be at least 1");
  if (!(site_state.norm() > 0.0)) throw ConfigError("initial site state vanishes");
  MPSState st;
  st.n_max = static_cast<int>(d - 1);
  st.seed = seed;
  detail::UniformStream rng(seed);
  for (std::size_t site = 0; site < 2; ++site) {
    VectorXd noise(d);
    for (Eigen::Index s = 0; s < d; ++s) noise(s) = rng.next();
    if (noise.norm() > 0.0) noise *= perturbation / noise.norm();
    const VectorXd c = (site_state.normalized() + noise).normalized();
    st.tensors[site].assign(static_cast<std::size_t>(d), MatrixXd::Zero(1, 1));
    for (Eigen::Index s = 0; s < d; ++s) st.tensors[site][static_cast<std::size_t>(s)](0, 0) = c(s);
    st.schmidt[site] = VectorXd::Ones(1);
  }
  // A plain Fock start has a definite sublattice charge: n on bond A|B, 0 on B|A.
  Eigen::Index occupation = 0;
  const bool fock = perturbation == 0.0 && (site_state.array() != 0.0).count() == 1;
  site_state.cwiseAbs().maxCoeff(&occupation);
  if (fock) st.charges = {Charges{static_cast<int>(occupation)}, Charges{0}};
  st.canonical_residual = canonical_residual(st);
  return st;
}

void evolve(MPSState& st, const LocalTerms& terms, const ItebdOptions& opt) {
  check_terms(terms);
  if (opt.chi < 1) throw ConfigError("chi must be positive");
  st.chi = opt.chi;
  if (terms.bond.hopping != 0.0 || terms.site.drive != 0.0) st.charges = {};
  const MatrixXd h = bond_hamiltonian(terms, st.n_max);
  // Imaginary-time gates are far from unitary when the local spectrum is wide,
  // so the gauge is repaired after every bond update (warm-started, few iterations).
  auto step = [&](int which, const MatrixXd& gate) {
    update_bond(st, which, gate, opt.schmidt_cutoff);
    canonicalize_once(st, opt.schmidt_cutoff, 40, 1e-11);
  };
  auto energy = [&] {
    return 0.5 * (trace_with(reduced_two_site(st, 0), h) + trace_with(reduced_two_site(st, 1), h));
  };
  canonicalize(st, opt.schmidt_cutoff);
  for (double dt : opt.schedule.steps) {
    if (!(dt > 0.0)) throw ConfigError("imaginary time steps must be positive");
    const MatrixXd full = imaginary_time_gate(h, dt);
    const MatrixXd half = imaginary_time_gate(h, 0.5 * dt);
    const long chunk = std::max(opt.schedule.min_check_steps, std::lround(opt.schedule.check_time / dt));
    StageRecord rec;
    rec.dt = dt;
    double previous = energy();
    while (rec.steps < opt.schedule.max_steps_per_stage) {
      // chunk second-order steps: A(dt/2) [B(dt) A(dt)]... B(dt) A(dt/2)
      step(0, half);
      for (long k = 0; k < chunk; ++k) {
        step(1, full);
        step(0, k + 1 < chunk ? full : half);
      }
      rec.steps += chunk;
      const double current = energy();
      const double change = std::abs(current - previous);
      previous = current;
      if (change < opt.schedule.tolerance) {
        rec.converged = true;
        break;
      }
    }
    canonicalize(st, opt.schmidt_cutoff);
    rec.free_energy = energy();
    st.log.push_back(rec);
  }
  st.converged = !st.log.empty() && st.log.back().converged;
}

MPSState itebd_ground(const LocalTerms& terms, const ItebdOptions& opt) {
  check_terms(terms);
  if (opt.chi < 2) throw ConfigError("iTEBD needs chi >= 2");
  if (opt.n_max < 2) throw ConfigError("iTEBD needs n_max >= 2");
  // Pairing or drive terms leave the initial Fock sector on their own, and a
  // Fock start keeps pairing states at n_A - n_B = 0 exactly. Pure hopping
  // conserves the particle number, so it starts from the decoupled-site state
  // plus the random admixture instead.
  const bool pure_hopping = terms.bond.hopping != 0.0 && terms.bond.pairing == 0.0 && terms.site.drive == 0.0;
  MPSState st = pure_hopping
                    ? product_state(decoupled_site_state(terms, opt.n_max), opt.perturbation, opt.seed)
                    : product_state(opt.n_max, lowest_diagonal_occupation(terms.site, opt.n_max), 0.0, opt.seed);
  evolve(st, terms, opt);
  return st;
}

void canonicalize(MPSState& st, double cutoff) {
  for (int pass = 0; pass < 8; ++pass) {
    canonicalize_once(st, cutoff, 20000, 1e-14);
    if (st.canonical_residual < 1e-12) break;
  }
}

double canonical_residual(const MPSState& st) {
  double worst = 0.0;
  for (std::size_t site = 0; site < 2; ++site) {
    const auto& b = st.tensors[site];
    const VectorXd left_w = weights_left_of(st, site).cwiseAbs2();
    const VectorXd right_w = st.schmidt[site].cwiseAbs2();
    MatrixXd right = MatrixXd::Zero(b[0].rows(), b[0].rows());
    MatrixXd left = MatrixXd::Zero(b[0].cols(), b[0].cols());
    for (const auto& bs : b) {
      right.noalias() += bs * bs.transpose();
      left.noalias() += bs.transpose() * left_w.asDiagonal() * bs;
    }
    right -= MatrixXd::Identity(right.rows(), right.cols());
    left -= MatrixXd(right_w.asDiagonal());
    worst = std::max({worst, right.cwiseAbs().maxCoeff(), left.cwiseAbs().maxCoeff()});
  }
  return worst;
}

SiteObservables measure(const MPSState& st, const LocalTerms& terms) {
  check_terms(terms);
  if (!(st.canonical_residual < 1e-8))
    throw Error("measure: state is not in canonical form (residual " + std::to_string(st.canonical_residual) + ")");
  const int nm = st.n_max;
  const MatrixXd a = annihilation(nm);
  const MatrixXd ad = a.transpose();
  const MatrixXd n = number_operator(nm);
  const MatrixXd id = identity_operator(nm);
  const MatrixXd h = bond_hamiltonian(terms, nm);

  SiteObservables obs;
  std::array<double, 2> dens{}, amp{};
  for (int which = 0; which < 2; ++which) {
    const MatrixXd rho = reduced_two_site(st, which);
    const double nl = trace_with(rho, kron(n, id));
    const double nr = trace_with(rho, kron(id, n));
    const double al = trace_with(rho, kron(a, id));
    const double ar = trace_with(rho, kron(id, a));
    dens[static_cast<std::size_t>(which)] = nl;
    amp[static_cast<std::size_t>(which)] = al;
    obs.density_sq += 0.5 * trace_with(rho, kron(n * n, id));
    const double pair = trace_with(rho, kron(ad, ad));
    obs.pairing_nn += 0.5 * pair;
    obs.pairing_connected += 0.5 * (pair - al * ar);
    obs.hopping_nn += 0.5 * trace_with(rho, kron(ad, a));
    obs.denscorr_nn += 0.5 * (trace_with(rho, kron(n, n)) - nl * nr);
    obs.free_energy_per_site += 0.5 * trace_with(rho, h);
  }
  obs.density = 0.5 * (dens[0] + dens[1]);
  obs.amp = 0.5 * (amp[0] + amp[1]);
  obs.number_fluct = obs.density_sq - 0.5 * (dens[0] * dens[0] + dens[1] * dens[1]);
  return obs;
}

std::vector<double> long_range_correlator(const MPSState& st, const MatrixXd& op_left, const MatrixXd& op_right,
                                          int max_distance) {
  const int d = st.phys_dim();
  if (op_left.rows() != d || op_right.rows() != d || op_left.cols() != d || op_right.cols() != d)
    throw ConfigError("correlator operators do not match the Fock cutoff");
  if (!(st.canonical_residual < 1e-8)) throw Error("long_range_correlator: state not canonical");

  auto apply = [&](const MatrixXd& v, std::size_t site, const MatrixXd* op) {
    const Tensor& t = st.tensors[site];
    MatrixXd out = MatrixXd::Zero(t[0].cols(), t[0].cols());
    for (int sp = 0; sp < d; ++sp) {
      const MatrixXd vt = v * t[static_cast<std::size_t>(sp)];
      for (int s = 0; s < d; ++s) {
        const double w = op ? (*op)(s, sp) : (s == sp ? 1.0 : 0.0);
        if (w != 0.0) out.noalias() += w * t[static_cast<std::size_t>(s)].transpose() * vt;
      }
    }
    return out;
  };
  auto start = [&](std::size_t site) { return MatrixXd(weights_left_of(st, site).cwiseAbs2().asDiagonal()); };

  std::array<double, 2> mean_left{}, mean_right{};
  for (std::size_t site = 0; site < 2; ++site) {
    mean_left[site] = apply(start(site), site, &op_left).trace();
    mean_right[site] = apply(start(site), site, &op_right).trace();
  }
  std::vector<double> out(static_cast<std::size_t>(std::max(0, max_distance)), 0.0);
  for (std::size_t origin = 0; origin < 2; ++origin) {
    MatrixXd v = apply(start(origin), origin, &op_left);
    for (int r = 1; r <= max_distance; ++r) {
      const std::size_t site = (origin + static_cast<std::size_t>(r)) % 2;
      const double full = apply(v, site, &op_right).trace();
      out[static_cast<std::size_t>(r - 1)] += 0.5 * (full - mean_left[origin] * mean_right[site]);
      v = apply(v, site, nullptr);
    }
  }
  return out;
}

DrivenResult driven_ground(const LocalTerms& terms, const ItebdOptions& options) {
  DrivenResult out;
  out.state = itebd_ground(terms, options);
  out.observables = measure(out.state, terms);
  return out;
}

}  // namespace bhpair
