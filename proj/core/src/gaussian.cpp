#include "bhpair/gaussian.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "bhpair/error.hpp"

namespace bhpair {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

// |g cos q| / omega, after checking the stability bound.
double coupling_ratio(double omega, double g, double q) {
  if (check_stability(omega, g) == Stability::unstable)
    throw StabilityError("|g| > omega: the linear model has no vacuum");
  if (omega == 0.0) return 1.0;
  return std::min(1.0, std::abs(g * std::cos(q)) / omega);
}

}  // namespace

std::vector<Quasimomentum> brillouin_zone(int sites) {
  if (sites < 2) throw ConfigError("brillouin_zone needs N >= 2");
  const int k_min = -((sites + 1) / 2) + 1;
  const int k_max = sites / 2;
  std::vector<Quasimomentum> zone;
  zone.reserve(static_cast<std::size_t>(sites));
  for (int k = k_min; k <= k_max; ++k) zone.push_back({k, 2.0 * kPi * k / sites});
  return zone;
}

double fold_momentum(double q) {
  double r = std::remainder(q, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

Stability check_stability(double omega, double g) {
  const double a = std::abs(g);
  if (a < omega) return Stability::stable;
  if (a == omega) return Stability::critical;
  return Stability::unstable;
}

double dispersion(double omega, double g, double q) {
  if (check_stability(omega, g) == Stability::unstable)
    throw StabilityError("|g| > omega: the linear model has no vacuum");
  const double c = g * std::cos(q);
  return std::sqrt(std::max(0.0, omega * omega - c * c));
}

double squeezing_parameter(double omega, double g, double q) {
  const double x = coupling_ratio(omega, g, q);
  if (x >= 1.0) return kInf;
  return std::atanh(x);
}

double squeezing_phase(double g, double q) { return g * std::cos(q) >= 0.0 ? 0.0 : kPi; }

double TwoModeCovariance::delta1() const {
  return alpha().determinant() + beta().determinant() - 2.0 * gamma().determinant();
}

double TwoModeCovariance::delta2() const { return C.determinant(); }

TwoModeCovariance covariance_matrix(double r, double phase) {
  if (!std::isfinite(r)) throw StabilityError("infinite squeezing at a critical momentum");
  const double c = 0.5 * std::cosh(r);
  const double s = 0.5 * std::sinh(r) * std::cos(phase);
  TwoModeCovariance cm;
  cm.C.setZero();
  cm.C(0, 0) = cm.C(1, 1) = cm.C(2, 2) = cm.C(3, 3) = c;
  // x_q x_-q anti-correlated, p_q p_-q correlated for a positive coupling.
  cm.C(0, 2) = cm.C(2, 0) = -s;
  cm.C(1, 3) = cm.C(3, 1) = s;
  return cm;
}

SymplecticPair symplectic_eigenvalues(const TwoModeCovariance& cm) {
  Eigen::LLT<Eigen::Matrix4d> llt(cm.C);
  if (llt.info() != Eigen::Success) throw Error("covariance matrix is not positive definite");
  const double d1 = cm.delta1();
  const double d2 = cm.delta2();
  const double disc = std::sqrt(std::max(0.0, d1 * d1 - 4.0 * d2));
  SymplecticPair nu;
  nu.nu_plus = std::sqrt(0.5 * (d1 + disc));
  // nu+^2 nu-^2 = delta2; avoids the cancellation in (d1 - disc).
  nu.nu_minus = std::sqrt(d2) / nu.nu_plus;
  return nu;
}

Eigen::Matrix4d partial_transpose(const Eigen::Matrix4d& V) {
  const Eigen::Vector4d lambda(1.0, 1.0, 1.0, -1.0);
  return lambda.asDiagonal() * V * lambda.asDiagonal();
}

SymplecticPair symplectic_spectrum(const Eigen::Matrix4d& V) {
  Eigen::Matrix4d omega = Eigen::Matrix4d::Zero();
  omega(0, 1) = omega(2, 3) = 1.0;
  omega(1, 0) = omega(3, 2) = -1.0;
  Eigen::EigenSolver<Eigen::Matrix4d> es(omega * V, false);
  std::array<double, 4> mods{};
  for (int i = 0; i < 4; ++i) mods[static_cast<std::size_t>(i)] = std::abs(es.eigenvalues()(i));
  std::sort(mods.begin(), mods.end());
  return {0.5 * (mods[2] + mods[3]), 0.5 * (mods[0] + mods[1])};
}

SymplecticPair symplectic_eigenvalues_closed_form(double r) {
  const double x = std::tanh(r);
  return {0.5 * std::sqrt((1.0 + x) / (1.0 - x)), 0.5 * std::sqrt((1.0 - x) / (1.0 + x))};
}

double logarithmic_negativity(const SymplecticPair& nu) {
  double sum = 0.0;
  for (double v : {nu.nu_plus, nu.nu_minus}) sum += 2.0 * std::log2(std::min(1.0, 2.0 * std::abs(v)));
  return -0.5 * sum;
}

double logarithmic_negativity(const TwoModeCovariance& cm) {
  return logarithmic_negativity(symplectic_eigenvalues(cm));
}

double logarithmic_negativity(double omega, double g, double q) {
  const double x = coupling_ratio(omega, g, q);
  if (x >= 1.0) return kInf;
  return 0.5 * std::log2((1.0 + x) / (1.0 - x));
}

double boost_partner(int sites, int d, double q_minus) {
  if (sites < 1 || d < 0 || d >= sites) throw ConfigError("boost d must satisfy 0 <= d < N");
  return fold_momentum(-q_minus - 2.0 * kPi * d / sites);
}

std::vector<LandscapeRow> negativity_landscape(double omega, double g, int sites, int d,
                                               int resolution) {
  if (sites < 2) throw ConfigError("landscape needs N >= 2");
  if (d < 0 || d >= sites) throw ConfigError("boost d must satisfy 0 <= d < N");
  if (check_stability(omega, g) == Stability::unstable)
    throw StabilityError("|g| > omega: the linear model has no vacuum");
  const int m = resolution > 0 ? resolution : sites;
  const double shift = kPi * d / sites;
  std::vector<LandscapeRow> rows;
  for (const auto& mom : brillouin_zone(m)) {
    LandscapeRow row;
    row.k = mom.k;
    row.q = fold_momentum(mom.q - shift);
    row.partner_q = boost_partner(sites, d, row.q);
    row.epsilon = dispersion(omega, g, mom.q);
    row.r = squeezing_parameter(omega, g, mom.q);
    row.negativity = logarithmic_negativity(omega, g, mom.q);
    row.excluded = mom.k == 0 || 2 * mom.k == m;
    rows.push_back(row);
  }
  return rows;
}

LinearRingObservables linear_ring_observables(double omega, double g, int sites) {
  LinearRingObservables obs;
  const double sign = g >= 0.0 ? 1.0 : -1.0;
  for (const auto& mom : brillouin_zone(sites)) {
    const double eps = dispersion(omega, g, mom.q);
    const double r = squeezing_parameter(omega, g, mom.q);
    obs.energy_per_site += 0.5 * (eps - omega);
    obs.density += 0.5 * (omega / eps - 1.0);
    obs.pairing_nn -= 0.5 * sign * std::abs(std::cos(mom.q)) * std::sinh(r);
    const bool self_paired = mom.k == 0 || 2 * mom.k == sites;
    if (!self_paired)
      obs.max_negativity = std::max(obs.max_negativity, logarithmic_negativity(omega, g, mom.q));
  }
  obs.energy_per_site /= sites;
  obs.density /= sites;
  obs.pairing_nn /= sites;
  return obs;
}

}  // namespace bhpair
