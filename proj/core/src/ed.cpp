#include "bhpair/ed.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "bhpair/error.hpp"
#include "linalg.hpp"

namespace bhpair {

using cplx = std::complex<double>;

FockSpace::FockSpace(int sites, int n_max, Boundary boundary, std::size_t max_dim)
    : sites_(sites), n_max_(n_max), boundary_(boundary), dim_(1) {
  if (sites < 1) throw ConfigError("Fock space needs at least one site");
  if (n_max < 1) throw ConfigError("Fock space needs n_max >= 1");
  for (int i = 0; i < sites; ++i) {
    dim_ *= static_cast<std::size_t>(n_max + 1);
    if (dim_ > max_dim) throw ConfigError("Fock space dimension exceeds the memory budget");
  }
}

std::vector<std::pair<int, int>> FockSpace::bonds() const {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i + 1 < sites_; ++i) out.emplace_back(i, i + 1);
  if (boundary_ == Boundary::ring && sites_ >= 2) out.emplace_back(sites_ - 1, 0);
  return out;
}

namespace {

class Digits {
 public:
  explicit Digits(const FockSpace& space) : base_(space.local_dim()), strides_(space.sites()) {
    std::size_t s = 1;
    for (int i = space.sites() - 1; i >= 0; --i) {
      strides_[static_cast<std::size_t>(i)] = s;
      s *= static_cast<std::size_t>(base_);
    }
  }
  int digit(std::size_t index, int site) const {
    return static_cast<int>((index / strides_[static_cast<std::size_t>(site)]) % base_);
  }
  std::size_t stride(int site) const { return strides_[static_cast<std::size_t>(site)]; }

 private:
  int base_;
  std::vector<std::size_t> strides_;
};

}  // namespace

SparseMatrix build_hamiltonian(const LocalTerms& terms, const FockSpace& space) {
  const Digits dg(space);
  const int nm = space.n_max();
  const auto bonds = space.bonds();
  std::vector<Eigen::Triplet<cplx>> trip;
  trip.reserve(space.dim() * (1 + 2 * bonds.size()));
  std::vector<int> occ(static_cast<std::size_t>(space.sites()));

  for (std::size_t s = 0; s < space.dim(); ++s) {
    double diag = 0.0;
    for (int i = 0; i < space.sites(); ++i) {
      occ[static_cast<std::size_t>(i)] = dg.digit(s, i);
      diag += terms.site.diagonal(occ[static_cast<std::size_t>(i)]);
    }
    if (diag != 0.0) trip.emplace_back(s, s, diag);
    const double drive = terms.site.drive;
    if (drive != 0.0) {
      for (int i = 0; i < space.sites(); ++i) {
        const int n = occ[static_cast<std::size_t>(i)];
        if (n > 0) trip.emplace_back(s - dg.stride(i), s, drive * std::sqrt(double(n)));
        if (n < nm) trip.emplace_back(s + dg.stride(i), s, drive * std::sqrt(n + 1.0));
      }
    }
    for (std::size_t b = 0; b < bonds.size(); ++b) {
      const auto [i, j] = bonds[b];
      const int ni = occ[static_cast<std::size_t>(i)];
      const int nj = occ[static_cast<std::size_t>(j)];
      const cplx e = std::polar(1.0, terms.phase(b));
      const std::size_t si = dg.stride(i), sj = dg.stride(j);
      if (const double p = terms.bond.pairing; p != 0.0) {
        if (ni < nm && nj < nm)
          trip.emplace_back(s + si + sj, s, p * e * std::sqrt((ni + 1.0) * (nj + 1.0)));
        if (ni > 0 && nj > 0)
          trip.emplace_back(s - si - sj, s, p * std::conj(e) * std::sqrt(double(ni) * nj));
      }
      if (const double h = terms.bond.hopping; h != 0.0) {
        if (ni < nm && nj > 0)
          trip.emplace_back(s + si - sj, s, h * e * std::sqrt((ni + 1.0) * nj));
        if (ni > 0 && nj < nm)
          trip.emplace_back(s - si + sj, s, h * std::conj(e) * std::sqrt(ni * (nj + 1.0)));
      }
    }
  }
  const auto n = static_cast<Eigen::Index>(space.dim());
  SparseMatrix H(n, n);
  H.setFromTriplets(trip.begin(), trip.end());
  return H;
}

EDGroundState ground_state(const SparseMatrix& H, const EDOptions& options) {
  if (H.rows() != H.cols()) throw Error("ground_state: matrix is not square");
  const Eigen::Index n = H.rows();
  EDGroundState gs;
  if (static_cast<std::size_t>(n) <= options.dense_limit) {
    const Eigen::MatrixXcd dense = Eigen::MatrixXcd(H);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(dense);
    if (es.info() != Eigen::Success) throw ConvergenceError("dense eigensolver failed");
    gs.energy = es.eigenvalues()(0);
    gs.vector = es.eigenvectors().col(0);
  } else {
    detail::UniformStream rng(options.seed);
    Eigen::VectorXcd start(n);
    for (Eigen::Index i = 0; i < n; ++i) start(i) = cplx(rng.next(), 0.0);
    auto apply = [&H](const Eigen::VectorXcd& in, Eigen::VectorXcd& out) { out.noalias() = H * in; };
    auto res = detail::lanczos_lowest<cplx>(apply, start, options.tolerance);
    if (!res.converged) throw ConvergenceError("Lanczos did not reach the requested residual");
    gs.energy = res.value;
    gs.vector = std::move(res.vector);
  }
  gs.vector.normalize();
  const double cut = 1e-10 * gs.vector.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(gs.vector(i)) > cut) {
      gs.vector *= std::conj(gs.vector(i)) / std::abs(gs.vector(i));
      break;
    }
  }
  gs.residual = (H * gs.vector - gs.energy * gs.vector).norm();
  return gs;
}

SparseMatrix site_operator(const FockSpace& space, int site, const Eigen::MatrixXcd& local) {
  if (site < 0 || site >= space.sites()) throw ConfigError("site index out of range");
  if (local.rows() != space.local_dim() || local.cols() != space.local_dim())
    throw ConfigError("local operator does not match the Fock cutoff");
  const Digits dg(space);
  std::vector<Eigen::Triplet<cplx>> trip;
  for (std::size_t s = 0; s < space.dim(); ++s) {
    const int n = dg.digit(s, site);
    for (int m = 0; m < space.local_dim(); ++m) {
      const cplx v = local(m, n);
      if (v != 0.0) trip.emplace_back(s + (m - n) * static_cast<long long>(dg.stride(site)), s, v);
    }
  }
  const auto dim = static_cast<Eigen::Index>(space.dim());
  SparseMatrix op(dim, dim);
  op.setFromTriplets(trip.begin(), trip.end());
  return op;
}

SparseMatrix two_site_operator(const FockSpace& space, int i, const Eigen::MatrixXcd& A, int j,
                               const Eigen::MatrixXcd& B) {
  if (i == j) throw ConfigError("two_site_operator needs distinct sites");
  return SparseMatrix(site_operator(space, i, A) * site_operator(space, j, B));
}

std::complex<double> expectation(const Eigen::VectorXcd& state, const SparseMatrix& op) {
  if (op.cols() != state.size()) throw ConfigError("operator and state dimensions differ");
  return state.dot(op * state);
}

double LatticeObservables::mean_density() const {
  double s = 0.0;
  for (double v : density) s += v;
  return density.empty() ? 0.0 : s / double(density.size());
}

double LatticeObservables::mean_fluct() const {
  double s = 0.0;
  for (std::size_t i = 0; i < density.size(); ++i) s += density_sq[i] - density[i] * density[i];
  return density.empty() ? 0.0 : s / double(density.size());
}

double LatticeObservables::max_abs_amp() const {
  double m = 0.0;
  for (auto v : amp) m = std::max(m, std::abs(v));
  return m;
}

double LatticeObservables::max_abs_hopping() const {
  double m = 0.0;
  for (auto v : hopping_nn) m = std::max(m, std::abs(v));
  return m;
}

std::complex<double> LatticeObservables::mean_pairing() const {
  cplx s = 0.0;
  for (auto v : pairing_nn) s += v;
  return pairing_nn.empty() ? cplx(0.0) : s / double(pairing_nn.size());
}

LatticeObservables measure_lattice(const Eigen::VectorXcd& state, const FockSpace& space) {
  const int nm = space.n_max();
  const Eigen::MatrixXcd a = annihilation(nm).cast<cplx>();
  const Eigen::MatrixXcd ad = creation(nm).cast<cplx>();
  const Eigen::MatrixXcd num = number_operator(nm).cast<cplx>();
  LatticeObservables obs;
  for (int i = 0; i < space.sites(); ++i) {
    obs.density.push_back(expectation(state, site_operator(space, i, num)).real());
    obs.density_sq.push_back(expectation(state, site_operator(space, i, num * num)).real());
    obs.amp.push_back(expectation(state, site_operator(space, i, a)));
  }
  for (const auto& [i, j] : space.bonds()) {
    obs.pairing_nn.push_back(expectation(state, two_site_operator(space, i, ad, j, ad)));
    obs.pairing_aa.push_back(expectation(state, two_site_operator(space, i, a, j, a)));
    obs.hopping_nn.push_back(expectation(state, two_site_operator(space, i, ad, j, a)));
    const double nn = expectation(state, two_site_operator(space, i, num, j, num)).real();
    obs.denscorr_nn.push_back(nn - obs.density[static_cast<std::size_t>(i)] *
                                       obs.density[static_cast<std::size_t>(j)]);
  }
  return obs;
}

LocalTerms two_mode_terms(double omega, double g, double q) {
  LocalTerms terms;
  terms.site.number = omega;
  // g cos q (b b + h.c.) == (g'/2)(b+ b+ + h.c.) with g' = 2 g cos q.
  terms.bond.pairing = g * std::cos(q);
  terms.phase_per_bond = {0.0};
  return terms;
}

double two_mode_negativity_fock(const Eigen::VectorXcd& state, int n_max) {
  const Eigen::Index d = n_max + 1;
  if (state.size() != d * d) throw ConfigError("state is not a two-mode state for this cutoff");
  // Row-major reshape: coefficient (m, n) of |m>|n> sits at m * d + n.
  Eigen::MatrixXcd coeff(d, d);
  for (Eigen::Index m = 0; m < d; ++m)
    for (Eigen::Index n = 0; n < d; ++n) coeff(m, n) = state(m * d + n);
  coeff /= state.norm();
  Eigen::JacobiSVD<Eigen::MatrixXcd> sv(coeff);
  const double trace_norm_sqrt = sv.singularValues().sum();
  return std::max(0.0, 2.0 * std::log2(trace_norm_sqrt));
}

TwoModeCovariance covariance_from_state(const Eigen::VectorXcd& state, const FockSpace& space) {
  if (space.sites() != 2) throw ConfigError("covariance_from_state needs a two-mode space");
  const int nm = space.n_max();
  const Eigen::MatrixXcd a = annihilation(nm).cast<cplx>();
  const Eigen::MatrixXcd ad = creation(nm).cast<cplx>();
  const double s2 = std::sqrt(2.0);
  const Eigen::MatrixXcd x = (a + ad) / s2;
  const Eigen::MatrixXcd p = cplx(0.0, 1.0) * (ad - a) / s2;
  std::array<SparseMatrix, 4> Q = {site_operator(space, 0, x), site_operator(space, 0, p),
                                   site_operator(space, 1, x), site_operator(space, 1, p)};
  std::array<Eigen::VectorXcd, 4> Qpsi;
  std::array<cplx, 4> mean;
  for (std::size_t k = 0; k < 4; ++k) {
    Qpsi[k] = Q[k] * state;
    mean[k] = state.dot(Qpsi[k]);
  }
  TwoModeCovariance cm;
  for (std::size_t n = 0; n < 4; ++n) {
    for (std::size_t m = 0; m < 4; ++m) {
      // <Q_n Q_m> = (Q_n psi, Q_m psi) for Hermitian Q_n.
      const cplx nm_ = Qpsi[n].dot(Qpsi[m]);
      const cplx mn_ = Qpsi[m].dot(Qpsi[n]);
      cm.C(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m)) =
          (0.5 * (nm_ + mn_) - mean[n] * mean[m]).real();
    }
  }
  return cm;
}

TwoModeCheck two_mode_check(double omega, double g, double q, int n_max) {
  TwoModeCheck out;
  const LocalTerms terms = two_mode_terms(omega, g, q);
  const auto solve = [&](int cutoff) {
    const FockSpace space(2, cutoff, Boundary::open);
    return std::make_pair(ground_state(build_hamiltonian(terms, space)), space);
  };
  const auto [gs, space] = solve(n_max);
  out.energy = gs.energy;
  out.covariance = covariance_from_state(gs.vector, space);
  out.negativity = two_mode_negativity_fock(gs.vector, n_max);
  out.mode_occupation =
      expectation(gs.vector, site_operator(space, 0, number_operator(n_max).cast<cplx>())).real();
  const auto [gs_refined, space_refined] = solve(n_max + 10);
  out.negativity_refined = two_mode_negativity_fock(gs_refined.vector, n_max + 10);
  out.converged = std::abs(out.negativity - out.negativity_refined) <= 1e-3;

  const double eps = dispersion(omega, g, q);
  const double r = squeezing_parameter(omega, g, q);
  out.expected_energy = eps - omega;
  out.expected_covariance = covariance_matrix(r, squeezing_phase(g, q));
  out.expected_negativity = logarithmic_negativity(omega, g, q);
  out.expected_occupation = 0.5 * (omega / eps - 1.0);
  return out;
}

}  // namespace bhpair
