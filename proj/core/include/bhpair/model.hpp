#pragma once

#include <complex>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace bhpair {

enum class TermKind { pairing, hopping };

std::string to_string(TermKind kind);
TermKind term_kind_from_string(const std::string& text);

/// Couplings of the pairing model and of the Bose-Hubbard comparison model.
///
/// The on-site interaction is U a+a+aa = U n(n-1), with no 1/2 factor.
/// `sites` empty means the infinite lattice used by iTEBD.
struct ModelParams {
  double g = 0.0;
  double U = 0.0;
  double omega = 0.0;
  double mu = 0.0;
  double Omega = 0.0;
  double t = 0.0;
  int d = 0;
  std::optional<int> sites;
  /// Inferred from which of g, t is nonzero when left empty.
  std::optional<TermKind> term_kind;
  bool grand_canonical = false;
  /// Allows g and t to be nonzero together; the bond terms simply add.
  bool combined = false;

  bool infinite() const { return !sites.has_value(); }
  TermKind kind() const;

  /// Throws ConfigError when an invariant is violated.
  void validate() const;

  /// phi_i = pi d (2i+1) / N for i = 0..N-1; a single zero for the infinite lattice.
  std::vector<double> bond_phases() const;
};

/// Flat key-value form; keys are g, U, omega, mu, Omega, t, d, N, term_kind,
/// grand_canonical (and combined).
std::map<std::string, std::string> to_key_values(const ModelParams& p);
ModelParams model_from_key_values(const std::map<std::string, std::string>& kv);

/// Ladder operator a on the truncated space {0..n_max}.
Eigen::MatrixXd annihilation(int n_max);
Eigen::MatrixXd creation(int n_max);
Eigen::MatrixXd number_operator(int n_max);
Eigen::MatrixXd identity_operator(int n_max);

/// number * n + interaction * n(n-1) + drive * (a + a+).
struct SiteTerm {
  double number = 0.0;
  double interaction = 0.0;
  double drive = 0.0;

  double diagonal(int n) const { return number * n + interaction * n * (n - 1.0); }
  Eigen::MatrixXd matrix(int n_max) const;
};

/// pairing * (e^{i phi} a+ a+ + h.c.) + hopping * (e^{i phi} a+ a + h.c.).
///
/// Two-site matrices use the row index s1 * (n_max+1) + s2 with s1 the left site.
struct BondTerm {
  double pairing = 0.0;
  double hopping = 0.0;

  Eigen::MatrixXcd matrix(int n_max, double phase) const;
  Eigen::MatrixXd real_matrix(int n_max) const;

  struct Product {
    double coefficient;
    Eigen::MatrixXd left;
    Eigen::MatrixXd right;
  };
  /// Zero-phase bond as a sum of coefficient * left (x) right.
  std::vector<Product> products(int n_max) const;
};

struct LocalTerms {
  SiteTerm site;
  BondTerm bond;
  std::vector<double> phase_per_bond;

  bool has_phases() const;
  double phase(std::size_t bond_index) const;
};

/// Grand-canonical terms drop omega and use U n(n-1) - mu n on site.
LocalTerms build_local_terms(const ModelParams& p, bool grand_canonical);
LocalTerms build_local_terms(const ModelParams& p);

/// Integer filling minimizing U n(n-1) - mu n; ties at mu = 2Un go to the smaller n.
int insulator_occupation(double mu, double U);

/// Lowest diagonal entry of a site term among occupations 0..n_max (smaller n on ties).
int lowest_diagonal_occupation(const SiteTerm& site, int n_max);

/// Product-state energy per site at omega = 0: (g/2)(a^2 + conj(a)^2) + U |a|^4.
double mean_field_energy(double alpha_re, double alpha_im, double g, double U);

struct MeanFieldMinimum {
  std::complex<double> alpha;
  double alpha_sq = 0.0;
  double energy = 0.0;
};

/// Closed-form minimizer of mean_field_energy; requires U > 0.
MeanFieldMinimum mean_field_minimizer(double g, double U);

}  // namespace bhpair
