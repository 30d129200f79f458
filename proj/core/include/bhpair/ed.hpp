#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "bhpair/gaussian.hpp"
#include "bhpair/model.hpp"

namespace bhpair {

enum class Boundary { ring, open };

/// Truncated Fock space of `sites` modes, each with occupations 0..n_max.
/// Basis index: site 0 is the most significant digit in base n_max + 1.
class FockSpace {
 public:
  static constexpr std::size_t kDefaultMaxDim = 4'000'000;

  FockSpace(int sites, int n_max, Boundary boundary = Boundary::ring,
            std::size_t max_dim = kDefaultMaxDim);

  int sites() const { return sites_; }
  int n_max() const { return n_max_; }
  int local_dim() const { return n_max_ + 1; }
  Boundary boundary() const { return boundary_; }
  std::size_t dim() const { return dim_; }

  /// Bonds (i, j) in Hamiltonian order; a ring adds (N-1, 0) for N >= 2.
  std::vector<std::pair<int, int>> bonds() const;

 private:
  int sites_;
  int n_max_;
  Boundary boundary_;
  std::size_t dim_;
};

using SparseMatrix = Eigen::SparseMatrix<std::complex<double>>;

SparseMatrix build_hamiltonian(const LocalTerms& terms, const FockSpace& space);

struct EDGroundState {
  double energy = 0.0;
  Eigen::VectorXcd vector;
  double residual = 0.0;
};

struct EDOptions {
  std::size_t dense_limit = 500;
  double tolerance = 1e-10;
  std::uint64_t seed = 7;
};

/// Lowest eigenpair; the first amplitude above 1e-10 of the maximum is made real positive.
EDGroundState ground_state(const SparseMatrix& H, const EDOptions& options = {});

SparseMatrix site_operator(const FockSpace& space, int site, const Eigen::MatrixXcd& local);
SparseMatrix two_site_operator(const FockSpace& space, int i, const Eigen::MatrixXcd& A, int j,
                               const Eigen::MatrixXcd& B);

std::complex<double> expectation(const Eigen::VectorXcd& state, const SparseMatrix& op);

/// Site- and bond-averaged observables of a lattice state.
struct LatticeObservables {
  std::vector<double> density;  // per site
  std::vector<double> density_sq;
  std::vector<std::complex<double>> amp;            // <a_i>
  std::vector<std::complex<double>> pairing_nn;     // <a+_i a+_j> per bond
  std::vector<std::complex<double>> pairing_aa;     // <a_i a_j> per bond
  std::vector<std::complex<double>> hopping_nn;     // <a+_i a_j> per bond
  std::vector<double> denscorr_nn;                  // <n_i n_j> - <n_i><n_j> per bond

  double mean_density() const;
  double mean_fluct() const;
  double max_abs_amp() const;
  double max_abs_hopping() const;
  std::complex<double> mean_pairing() const;
};

LatticeObservables measure_lattice(const Eigen::VectorXcd& state, const FockSpace& space);

/// Eq.-(9)-type two-mode problem omega (n_1 + n_2) + g cos q (b_1 b_2 + h.c.) as lattice terms.
LocalTerms two_mode_terms(double omega, double g, double q);

/// log2 of the trace norm of the partial transpose of a pure two-mode state.
double two_mode_negativity_fock(const Eigen::VectorXcd& state, int n_max);

/// Symmetrized quadrature moments of a two-mode state, order (x_1, p_1, x_2, p_2).
TwoModeCovariance covariance_from_state(const Eigen::VectorXcd& state, const FockSpace& space);

struct TwoModeCheck {
  double energy = 0.0;
  double expected_energy = 0.0;  // eps_q - omega
  TwoModeCovariance covariance;
  TwoModeCovariance expected_covariance;
  double negativity = 0.0;
  double negativity_refined = 0.0;  // at n_max + 10
  double expected_negativity = 0.0;
  double mode_occupation = 0.0;
  double expected_occupation = 0.0;  // (omega/eps - 1)/2
  bool converged = false;            // |negativity - negativity_refined| <= 1e-3
};

TwoModeCheck two_mode_check(double omega, double g, double q, int n_max = 40);

}  // namespace bhpair
