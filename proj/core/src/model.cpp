#include "bhpair/model.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "bhpair/error.hpp"

namespace bhpair {

namespace {

double parse_double(const std::string& key, const std::string& text) {
  try {
    std::size_t pos = 0;
    double v = std::stod(text, &pos);
    if (pos != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("model key '" + key + "': not a number: '" + text + "'");
  }
}

int parse_int(const std::string& key, const std::string& text) {
  try {
    std::size_t pos = 0;
    int v = std::stoi(text, &pos);
    if (pos != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("model key '" + key + "': not an integer: '" + text + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError("model key '" + key + "': not a boolean: '" + text + "'");
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

std::string to_string(TermKind kind) {
  return kind == TermKind::pairing ? "pairing" : "hopping";
}

TermKind term_kind_from_string(const std::string& text) {
  if (text == "pairing") return TermKind::pairing;
  if (text == "hopping") return TermKind::hopping;
  throw ConfigError("term_kind must be 'pairing' or 'hopping', got '" + text + "'");
}

TermKind ModelParams::kind() const {
  if (term_kind) return *term_kind;
  return (t != 0.0 && g == 0.0) ? TermKind::hopping : TermKind::pairing;
}

void ModelParams::validate() const {
  if (!(U >= 0.0)) throw ConfigError("U must be non-negative");
  if (sites) {
    if (*sites < 1) throw ConfigError("N must be positive");
    if (d < 0 || d >= *sites) throw ConfigError("boost d must satisfy 0 <= d < N");
  } else if (d != 0) {
    throw ConfigError("boost d must be 0 on the infinite lattice");
  }
  if (!combined) {
    if (g != 0.0 && t != 0.0)
      throw ConfigError("g and t are both nonzero; set combined = true to add the terms");
    if (term_kind == TermKind::pairing && t != 0.0)
      throw ConfigError("term_kind = pairing but t != 0");
    if (term_kind == TermKind::hopping && g != 0.0)
      throw ConfigError("term_kind = hopping but g != 0");
  }
  if (!grand_canonical && mu != 0.0)
    throw ConfigError("mu is only used by the grand-canonical functional");
}

std::vector<double> ModelParams::bond_phases() const {
  if (!sites) return {0.0};
  const int n = *sites;
  std::vector<double> phases(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    phases[static_cast<std::size_t>(i)] = std::numbers::pi * d * (2.0 * i + 1.0) / n;
  return phases;
}

std::map<std::string, std::string> to_key_values(const ModelParams& p) {
  std::map<std::string, std::string> kv;
  kv["g"] = format_double(p.g);
  kv["U"] = format_double(p.U);
  kv["omega"] = format_double(p.omega);
  kv["mu"] = format_double(p.mu);
  kv["Omega"] = format_double(p.Omega);
  kv["t"] = format_double(p.t);
  kv["d"] = std::to_string(p.d);
  kv["N"] = p.sites ? std::to_string(*p.sites) : "inf";
  kv["term_kind"] = to_string(p.kind());
  kv["grand_canonical"] = p.grand_canonical ? "true" : "false";
  if (p.combined) kv["combined"] = "true";
  return kv;
}

ModelParams model_from_key_values(const std::map<std::string, std::string>& kv) {
  ModelParams p;
  for (const auto& [key, value] : kv) {
    if (key == "g") p.g = parse_double(key, value);
    else if (key == "U") p.U = parse_double(key, value);
    else if (key == "omega") p.omega = parse_double(key, value);
    else if (key == "mu") p.mu = parse_double(key, value);
    else if (key == "Omega") p.Omega = parse_double(key, value);
    else if (key == "t") p.t = parse_double(key, value);
    else if (key == "d") p.d = parse_int(key, value);
    else if (key == "N") {
      if (value == "inf" || value == "infinite") p.sites.reset();
      else p.sites = parse_int(key, value);
    } else if (key == "term_kind") p.term_kind = term_kind_from_string(value);
    else if (key == "grand_canonical") p.grand_canonical = parse_bool(key, value);
    else if (key == "combined") p.combined = parse_bool(key, value);
    else throw ConfigError("unknown model key '" + key + "'");
  }
  return p;
}

Eigen::MatrixXd annihilation(int n_max) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n_max + 1, n_max + 1);
  for (int n = 1; n <= n_max; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

Eigen::MatrixXd creation(int n_max) { return annihilation(n_max).transpose(); }

Eigen::MatrixXd number_operator(int n_max) {
  Eigen::VectorXd diag(n_max + 1);
  for (int n = 0; n <= n_max; ++n) diag(n) = n;
  return diag.asDiagonal();
}

Eigen::MatrixXd identity_operator(int n_max) {
  return Eigen::MatrixXd::Identity(n_max + 1, n_max + 1);
}

Eigen::MatrixXd SiteTerm::matrix(int n_max) const {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n_max + 1, n_max + 1);
  for (int n = 0; n <= n_max; ++n) h(n, n) = diagonal(n);
  if (drive != 0.0) {
    const Eigen::MatrixXd a = annihilation(n_max);
    h += drive * (a + a.transpose());
  }
  return h;
}

namespace {

Eigen::MatrixXd kron(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  Eigen::MatrixXd out(A.rows() * B.rows(), A.cols() * B.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j)
      out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return out;
}

}  // namespace

Eigen::MatrixXcd BondTerm::matrix(int n_max, double phase) const {
  const Eigen::MatrixXd a = annihilation(n_max);
  const Eigen::MatrixXd ad = a.transpose();
  const std::complex<double> e(std::cos(phase), std::sin(phase));
  const int d = n_max + 1;
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(d * d, d * d);
  if (pairing != 0.0) {
    const Eigen::MatrixXd up = kron(ad, ad);
    h += pairing * (e * up.cast<std::complex<double>>() +
                    std::conj(e) * up.transpose().cast<std::complex<double>>());
  }
  if (hopping != 0.0) {
    const Eigen::MatrixXd hop = kron(ad, a);
    h += hopping * (e * hop.cast<std::complex<double>>() +
                    std::conj(e) * hop.transpose().cast<std::complex<double>>());
  }
  return h;
}

Eigen::MatrixXd BondTerm::real_matrix(int n_max) const { return matrix(n_max, 0.0).real(); }

std::vector<BondTerm::Product> BondTerm::products(int n_max) const {
  const Eigen::MatrixXd a = annihilation(n_max);
  const Eigen::MatrixXd ad = a.transpose();
  std::vector<Product> out;
  if (pairing != 0.0) {
    out.push_back({pairing, ad, ad});
    out.push_back({pairing, a, a});
  }
  if (hopping != 0.0) {
    out.push_back({hopping, ad, a});
    out.push_back({hopping, a, ad});
  }
  return out;
}

bool LocalTerms::has_phases() const {
  for (double phi : phase_per_bond)
    if (phi != 0.0) return true;
  return false;
}

double LocalTerms::phase(std::size_t bond_index) const {
  if (phase_per_bond.empty()) return 0.0;
  return phase_per_bond[bond_index % phase_per_bond.size()];
}

LocalTerms build_local_terms(const ModelParams& p, bool grand_canonical) {
  ModelParams q = p;
  q.grand_canonical = grand_canonical;
  q.validate();
  LocalTerms terms;
  terms.site.interaction = q.U;
  terms.site.number = grand_canonical ? -q.mu : q.omega;
  terms.site.drive = q.Omega;
  terms.bond.pairing = 0.5 * q.g;
  terms.bond.hopping = -0.5 * q.t;
  terms.phase_per_bond = q.bond_phases();
  return terms;
}

LocalTerms build_local_terms(const ModelParams& p) {
  return build_local_terms(p, p.grand_canonical);
}

int insulator_occupation(double mu, double U) {
  if (!(U > 0.0)) throw ConfigError("insulator_occupation requires U > 0");
  // E(n+1) - E(n) = 2Un - mu; step up only while strictly downhill.
  int n = 0;
  while (2.0 * U * n - mu < 0.0) ++n;
  return n;
}

int lowest_diagonal_occupation(const SiteTerm& site, int n_max) {
  int best = 0;
  for (int n = 1; n <= n_max; ++n)
    if (site.diagonal(n) < site.diagonal(best)) best = n;
  return best;
}

double mean_field_energy(double alpha_re, double alpha_im, double g, double U) {
  const std::complex<double> alpha(alpha_re, alpha_im);
  const double abs2 = std::norm(alpha);
  return 0.5 * g * 2.0 * (alpha * alpha).real() + U * abs2 * abs2;
}

MeanFieldMinimum mean_field_minimizer(double g, double U) {
  if (!(U > 0.0)) throw ConfigError("mean-field minimizer requires U > 0");
  MeanFieldMinimum m;
  m.alpha_sq = std::abs(g) / (2.0 * U);
  const double x = std::sqrt(m.alpha_sq);
  // g > 0 favours a purely imaginary alpha (alpha^2 < 0), g < 0 a real one.
  m.alpha = g >= 0.0 ? std::complex<double>(0.0, x) : std::complex<double>(x, 0.0);
  m.energy = mean_field_energy(m.alpha.real(), m.alpha.imag(), g, U);
  return m;
}

}  // namespace bhpair
