#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "bhpair/model.hpp"

namespace bhpair {

struct FiniteOptions {
  int chi = 70;
  int n_max = 10;
  int max_sweeps = 40;
  int min_sweeps = 2;
  /// Converged once a full sweep lowers the energy by less than this times L.
  double tolerance_per_site = 1e-9;
  std::uint64_t seed = 1;
  double perturbation = 1e-6;
  int krylov_dim = 20;
  double schmidt_cutoff = 1e-12;
};

/// Open-chain MPS. site[i][s] is (chi_left x chi_right). After finite_ground the
/// orthogonality center sits on site 0 and every other site is right-normalized.
struct FiniteMPS {
  int length = 0;
  int n_max = 0;
  int chi = 0;
  std::vector<std::vector<Eigen::MatrixXd>> site;
  std::vector<Eigen::VectorXd> bond_weights;  // L-1 Schmidt spectra
  double energy = 0.0;
  std::vector<double> sweep_energies;
  bool converged = false;

  std::vector<double> density;
  std::vector<double> density_sq;
  std::vector<double> amp;
  /// <a+_i a+_j> - <a+_i><a+_j>, symmetric, zero diagonal.
  Eigen::MatrixXd pair_correlator;

  int phys_dim() const { return n_max + 1; }
};

/// Two-site DMRG on an open chain of L sites. Bond phases must vanish.
FiniteMPS finite_ground(const LocalTerms& terms, int length, const FiniteOptions& options);

/// <psi|H|psi> / <psi|psi> for the open chain.
double energy_expectation(const FiniteMPS& mps, const LocalTerms& terms);

/// Fills density, density_sq, amp and pair_correlator.
void measure_finite(FiniteMPS& mps);

struct CorrelationProfile {
  std::vector<double> xi_per_site;
  double max_xi = 0.0;
  int argmax = 0;
};

/// Weighted mean distance per site from a connected correlator matrix; the
/// maximum is taken over sites in [first, last].
CorrelationProfile correlation_length(const Eigen::MatrixXd& correlator, int first, int last);

/// Same, with the maximum restricted to the central sites [L/4, 3L/4].
CorrelationProfile correlation_length(const FiniteMPS& mps);

}  // namespace bhpair
