#pragma once

#include <complex>

namespace bhpair {

/// Second-order expansion in g around the uniform n-boson insulator.
struct PerturbationInput {
  int n = 0;
  double g = 0.0;
  double U = 1.0;
  double mu = 0.0;
  double phi = 0.0;
};

struct PerturbationResult {
  double f_n = 0.0;
  double f_np1 = 0.0;
  double density = 0.0;
  double density_sq = 0.0;
  double number_fluct = 0.0;
  std::complex<double> pairing_nn;          // <a_i a_{i+1}>
  std::complex<double> pairing_dagger_nn;   // <a+_i a+_{i+1}>
  double hopping_nn = 0.0;                  // vanishes to this order
  double e0_per_site = 0.0;
  double e2_per_site = 0.0;
  double e_total_per_site = 0.0;
  /// Set when g > 0.1 U, where the expansion is no longer trusted.
  bool outside_validity = false;
};

/// f_n = n / (2U(n-1) - mu). f_0 = 0. Throws SingularityError at the resonance.
double f(int n, double U, double mu);

PerturbationResult observables_second_order(const PerturbationInput& in);

struct EnergyCorrections {
  double e0 = 0.0;
  double e1 = 0.0;  // identically zero: pairs cannot return to |u_n> in one step
  double e2 = 0.0;
  double total = 0.0;  // e0 + g^2 e2
};

/// Energies of an N-site ring.
EnergyCorrections energy_corrections(const PerturbationInput& in, int sites);

}  // namespace bhpair
