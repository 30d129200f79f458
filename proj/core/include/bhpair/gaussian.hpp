#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace bhpair {

/// Lattice momentum q = 2 pi k / N with k in the symmetric zone
/// {-ceil(N/2)+1, ..., floor(N/2)}.
struct Quasimomentum {
  int k = 0;
  double q = 0.0;
};

std::vector<Quasimomentum> brillouin_zone(int sites);

/// Folds an angle into (-pi, pi].
double fold_momentum(double q);

enum class Stability { stable, critical, unstable };

/// stable for |g| < omega, critical at |g| == omega, unstable otherwise.
Stability check_stability(double omega, double g);

/// sqrt(omega^2 - g^2 cos^2 q). Throws StabilityError when |g| > omega.
double dispersion(double omega, double g, double q);

/// r_q = atanh(|g cos q| / omega); +infinity at |g cos q| == omega.
double squeezing_parameter(double omega, double g, double q);

/// Squeezing phase in {0, pi}: 0 when g cos q >= 0.
double squeezing_phase(double g, double q);

/// Covariance matrix of the ground state of a (q, -q) mode pair, quadrature
/// order (x_q, p_q, x_-q, p_-q).
struct TwoModeCovariance {
  Eigen::Matrix4d C = Eigen::Matrix4d::Identity() * 0.5;

  Eigen::Matrix2d alpha() const { return C.topLeftCorner<2, 2>(); }
  Eigen::Matrix2d beta() const { return C.bottomRightCorner<2, 2>(); }
  Eigen::Matrix2d gamma() const { return C.topRightCorner<2, 2>(); }

  /// det(alpha) + det(beta) - 2 det(gamma): the seralian of the partial transpose.
  double delta1() const;
  /// det C.
  double delta2() const;
};

/// Builds the block matrix alpha = beta = (cosh r / 2) 1, gamma = (sinh r / 2) diag(-s, s)
/// with s = cos(phase). Throws for infinite r.
TwoModeCovariance covariance_matrix(double r, double phase);

struct SymplecticPair {
  double nu_plus = 0.5;
  double nu_minus = 0.5;
};

/// Symplectic eigenvalues of the partially transposed covariance matrix, from the
/// invariants delta1, delta2 computed on the matrix. Throws on a non-positive C.
SymplecticPair symplectic_eigenvalues(const TwoModeCovariance& cm);

/// Independent route: moduli of the eigenvalues of i Omega V for an arbitrary 4x4 V.
SymplecticPair symplectic_spectrum(const Eigen::Matrix4d& V);

/// Lambda V Lambda with Lambda = diag(1, 1, 1, -1).
Eigen::Matrix4d partial_transpose(const Eigen::Matrix4d& V);

/// (1/2) sqrt((1 +- tanh r) / (1 -+ tanh r)).
SymplecticPair symplectic_eigenvalues_closed_form(double r);

/// -(1/2) sum_i log2 min(1, 2|nu_i|) over the four partially transposed values +-nu.
double logarithmic_negativity(const SymplecticPair& nu);
double logarithmic_negativity(const TwoModeCovariance& cm);

/// Closed form (1/2) log2[(1 + x)/(1 - x)], x = |g cos q| / omega; +infinity at x == 1.
double logarithmic_negativity(double omega, double g, double q);

/// Partner of q_minus under the boost: -q_minus - 2 pi d / N folded into (-pi, pi].
double boost_partner(int sites, int d, double q_minus);

struct LandscapeRow {
  int k = 0;
  double q = 0.0;          // momentum in the original (unboosted) frame
  double partner_q = 0.0;  // momentum it is paired with
  double epsilon = 0.0;
  double r = 0.0;
  double negativity = 0.0;
  bool excluded = false;   // self-paired points of the gauge-transformed zone
};

/// Pair entanglement over the whole zone. `resolution` (0 = sites) sets the
/// number of sampled momenta for continuum-like plots.
std::vector<LandscapeRow> negativity_landscape(double omega, double g, int sites, int d,
                                               int resolution = 0);

/// Ring observables of the linear model (U = 0, boost d = 0) summed over the zone.
struct LinearRingObservables {
  double energy_per_site = 0.0;  // (1/2N) sum_k (eps_k - omega)
  double density = 0.0;          // (1/N) sum_k (omega/eps_k - 1)/2
  double pairing_nn = 0.0;       // <a_i a_{i+1}>
  double max_negativity = 0.0;   // over non-excluded pairs
};

LinearRingObservables linear_ring_observables(double omega, double g, int sites);

}  // namespace bhpair
