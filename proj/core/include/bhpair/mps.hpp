#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bhpair/model.hpp"

namespace bhpair {

/// Imaginary-time ladder. Each stage runs until the free energy per site changes
/// by less than `tolerance` between two convergence checks.
struct ImaginaryTimeSchedule {
  std::vector<double> steps{0.1, 0.05, 0.02, 0.01, 0.005, 0.002, 0.001};
  double tolerance = 1e-9;
  /// Imaginary time between convergence checks, never fewer than min_check_steps steps.
  double check_time = 0.1;
  long min_check_steps = 10;
  long max_steps_per_stage = 20000;
};

struct ItebdOptions {
  int chi = 20;
  int n_max = 10;
  ImaginaryTimeSchedule schedule;
  std::uint64_t seed = 1;
  /// 2-norm of the random admixture added to the initial state of pure-hopping
  /// terms; pairing and driven terms start from a plain Fock state.
  double perturbation = 1e-6;
  double schmidt_cutoff = 1e-12;
};

struct StageRecord {
  double dt = 0.0;
  long steps = 0;
  double free_energy = 0.0;  // exact, measured on the canonicalized state
  bool converged = false;
};

/// Period-two infinite MPS. With Vidal tensors Gamma the chain reads
///   ... schmidt[1] Gamma_A schmidt[0] Gamma_B schmidt[1] Gamma_A ...
/// and tensors[site][s] = Gamma_site^s diag(schmidt to the right of site), a
/// (chi_left x chi_right) right-normalized matrix for physical state s.
struct MPSState {
  std::array<std::vector<Eigen::MatrixXd>, 2> tensors;
  std::array<Eigen::VectorXd, 2> schmidt;
  int n_max = 0;
  int chi = 0;
  double canonical_residual = 0.0;
  std::uint64_t seed = 0;
  std::vector<StageRecord> log;
  bool converged = false;
  /// Sublattice charge sum_i (-1)^i n_i carried by each index of bond b, with
  /// site A counting +n and site B counting -n. Empty when the state does not
  /// conserve it. Pure pairing terms conserve it, and tracking it keeps
  /// roundoff from seeding single-particle order.
  std::array<std::vector<int>, 2> charges;

  int phys_dim() const { return n_max + 1; }
  bool charged() const { return !charges[0].empty(); }
};

struct SiteObservables {
  double density = 0.0;
  double density_sq = 0.0;
  double number_fluct = 0.0;
  double pairing_nn = 0.0;         // <a+_i a+_{i+1}>
  double pairing_connected = 0.0;  // <a+_i a+_{i+1}> - <a+_i><a+_{i+1}>
  double hopping_nn = 0.0;         // <a+_i a_{i+1}>
  double denscorr_nn = 0.0;        // <n_i n_{i+1}> - <n_i><n_{i+1}>
  double amp = 0.0;                // <a_i>
  double free_energy_per_site = 0.0;
};

/// Both unit-cell sites in the Fock state |n> plus a seeded random admixture.
/// Without admixture the state tracks its sublattice charge.
MPSState product_state(int n_max, int occupation, double perturbation, std::uint64_t seed);

/// Both unit-cell sites in `site_state` (normalized here) plus a seeded random admixture.
MPSState product_state(const Eigen::VectorXd& site_state, double perturbation, std::uint64_t seed);

/// Ground state of a real, translation-invariant Hamiltonian by imaginary-time
/// evolution with second-order A-B / B-A splitting and truncation to chi.
/// Bond phases must vanish (gauge them away on the infinite chain).
MPSState itebd_ground(const LocalTerms& terms, const ItebdOptions& options);

/// Continues an existing state through a schedule. Hopping or drive terms
/// break the sublattice charge, so its tracking is dropped for them.
void evolve(MPSState& state, const LocalTerms& terms, const ItebdOptions& options);

/// Restores the canonical form from the dominant transfer-matrix fixed points.
void canonicalize(MPSState& state, double cutoff = 1e-12);

/// Largest deviation from the right-normalization and left fixed-point conditions.
double canonical_residual(const MPSState& state);

/// Averages over the two sublattice sites. Throws when the state is far from canonical.
SiteObservables measure(const MPSState& state, const LocalTerms& terms);

/// <O_i O_{i+r}> - <O_i><O_{i+r}> for r = 1..max_distance, averaged over both sublattices.
std::vector<double> long_range_correlator(const MPSState& state, const Eigen::MatrixXd& op_left,
                                          const Eigen::MatrixXd& op_right, int max_distance);

struct DrivenResult {
  MPSState state;
  SiteObservables observables;
};

/// Ground state and observables of the displaced model with drive Omega (a + a+).
DrivenResult driven_ground(const LocalTerms& terms, const ItebdOptions& options);

/// Structured-text checkpoint with tensors, weights, parameters, seed and the log.
void save_checkpoint(const std::string& path, const MPSState& state, const ModelParams& params);
MPSState load_checkpoint(const std::string& path, ModelParams* params = nullptr);

}  // namespace bhpair
