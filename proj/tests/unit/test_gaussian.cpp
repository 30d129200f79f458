#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "bhpair/error.hpp"
#include "bhpair/gaussian.hpp"

using namespace bhpair;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST(Gaussian, BrillouinZoneEvenAndOdd) {
  const auto even = brillouin_zone(4);
  ASSERT_EQ(even.size(), 4u);
  const int even_k[] = {-1, 0, 1, 2};
  const double even_q[] = {-kPi / 2, 0.0, kPi / 2, kPi};
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(even[i].k, even_k[i]);
    EXPECT_NEAR(even[i].q, even_q[i], 1e-15);
  }
  const auto odd = brillouin_zone(3);
  ASSERT_EQ(odd.size(), 3u);
  EXPECT_EQ(odd[0].k, -1);
  EXPECT_NEAR(odd[0].q, -2 * kPi / 3, 1e-15);
  EXPECT_NEAR(odd[2].q, 2 * kPi / 3, 1e-15);
  const auto two = brillouin_zone(2);
  ASSERT_EQ(two.size(), 2u);
  EXPECT_NEAR(two[0].q, 0.0, 1e-15);
  EXPECT_NEAR(two[1].q, kPi, 1e-15);
}

TEST(Gaussian, FoldMomentum) {
  EXPECT_NEAR(fold_momentum(3 * kPi), kPi, 1e-14);
  EXPECT_NEAR(fold_momentum(-kPi), kPi, 1e-14);
  EXPECT_NEAR(fold_momentum(-1.5 * kPi), 0.5 * kPi, 1e-14);
  EXPECT_NEAR(fold_momentum(0.25), 0.25, 1e-15);
}

TEST(Gaussian, Dispersion) {
  EXPECT_NEAR(dispersion(1.0, 1.0, 0.0), 0.0, 1e-15);
  EXPECT_NEAR(dispersion(1.0, 0.73, kPi / 2), 1.0, 1e-15);
  EXPECT_NEAR(dispersion(1.0, 0.6, kPi), 0.8, 1e-15);
  EXPECT_THROW(dispersion(1.0, 1.1, 0.3), StabilityError);
}

TEST(Gaussian, Stability) {
  EXPECT_EQ(check_stability(1.0, 0.5), Stability::stable);
  EXPECT_EQ(check_stability(1.0, 1.0), Stability::critical);
  EXPECT_EQ(check_stability(1.0, 1.1), Stability::unstable);
  EXPECT_EQ(check_stability(1.0, -1.1), Stability::unstable);
}

TEST(Gaussian, SqueezingParameter) {
  EXPECT_EQ(squeezing_parameter(1.0, 0.0, 0.4), 0.0);
  EXPECT_NEAR(squeezing_parameter(1.0, 0.6, kPi), std::log(2.0), 1e-14);
  EXPECT_NEAR(squeezing_parameter(1.0, 0.6, kPi / 2), 0.0, 1e-15);
  EXPECT_TRUE(std::isinf(squeezing_parameter(1.0, 1.0, 0.0)));
  EXPECT_EQ(squeezing_phase(0.5, 0.0), 0.0);
  EXPECT_EQ(squeezing_phase(0.5, kPi), kPi);
}

TEST(Gaussian, CovarianceMatrixEntries) {
  const auto vac = covariance_matrix(0.0, 0.0);
  EXPECT_LT((vac.C - 0.5 * Eigen::Matrix4d::Identity()).norm(), 1e-15);
  const auto cm = covariance_matrix(std::log(2.0), 0.0);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(cm.C(i, i), 0.625, 1e-14);
  EXPECT_NEAR(std::abs(cm.gamma()(0, 0)), 0.375, 1e-14);
  EXPECT_NEAR(std::abs(cm.gamma()(1, 1)), 0.375, 1e-14);
  EXPECT_LT((cm.C - cm.C.transpose()).norm(), 1e-15);
  EXPECT_THROW(covariance_matrix(std::numeric_limits<double>::infinity(), 0.0), Error);
}

TEST(Gaussian, SymplecticEigenvaluesThreeRoutes) {
  const auto vac = symplectic_eigenvalues(covariance_matrix(0.0, 0.0));
  EXPECT_NEAR(vac.nu_plus, 0.5, 1e-14);
  EXPECT_NEAR(vac.nu_minus, 0.5, 1e-14);

  const auto cm = covariance_matrix(std::log(2.0), 0.0);
  const auto nu = symplectic_eigenvalues(cm);
  EXPECT_NEAR(nu.nu_plus, 1.0, 1e-12);
  EXPECT_NEAR(nu.nu_minus, 0.25, 1e-12);
  const auto closed = symplectic_eigenvalues_closed_form(std::log(2.0));
  EXPECT_NEAR(closed.nu_plus, 1.0, 1e-12);
  EXPECT_NEAR(closed.nu_minus, 0.25, 1e-12);
  const auto spectral = symplectic_spectrum(partial_transpose(cm.C));
  EXPECT_NEAR(spectral.nu_plus, 1.0, 1e-12);
  EXPECT_NEAR(spectral.nu_minus, 0.25, 1e-12);
}

TEST(Gaussian, SymplecticRoutesAgreeOnRandomSqueezing) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> r_dist(0.0, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double r = r_dist(rng);
    const double phase = trial % 2 ? kPi : 0.0;
    const auto cm = covariance_matrix(r, phase);
    const auto a = symplectic_eigenvalues(cm);
    const auto b = symplectic_eigenvalues_closed_form(r);
    const auto c = symplectic_spectrum(partial_transpose(cm.C));
    EXPECT_NEAR(a.nu_plus, b.nu_plus, 1e-9 * b.nu_plus);
    EXPECT_NEAR(a.nu_minus, b.nu_minus, 1e-9);
    EXPECT_NEAR(c.nu_plus, b.nu_plus, 1e-9 * b.nu_plus);
    EXPECT_NEAR(c.nu_minus, b.nu_minus, 1e-9);
    // Pure two-mode squeezed states saturate nu_+ nu_- = 1/4.
    EXPECT_NEAR(a.nu_plus * a.nu_minus, 0.25, 1e-9);
    // Unentangled iff r = 0; uncertainty holds for the unflipped matrix.
    const auto unflipped = symplectic_spectrum(cm.C);
    EXPECT_NEAR(unflipped.nu_minus, 0.5, 1e-9);
  }
}

TEST(Gaussian, LogarithmicNegativity) {
  EXPECT_NEAR(logarithmic_negativity(1.0, 0.6, kPi), 1.0, 1e-14);
  EXPECT_NEAR(logarithmic_negativity(1.0, 0.9, kPi / 2), 0.0, 1e-14);
  EXPECT_NEAR(logarithmic_negativity(1.0, 0.99, 0.0), 0.5 * std::log2(199.0), 1e-12);
  const auto cm = covariance_matrix(std::log(2.0), 0.0);
  EXPECT_NEAR(logarithmic_negativity(cm), 1.0, 1e-12);
  EXPECT_NEAR(logarithmic_negativity(symplectic_eigenvalues(cm)), 1.0, 1e-12);
  EXPECT_TRUE(std::isinf(logarithmic_negativity(1.0, 1.0, 0.0)));
}

TEST(Gaussian, NegativityPositiveForAnySqueezing) {
  for (double g = 0.01; g < 1.0; g += 0.07)
    for (double q = -3.0; q <= 3.0; q += 0.37) {
      const double en = logarithmic_negativity(1.0, g, q);
      if (std::abs(std::cos(q)) > 1e-12) EXPECT_GT(en, 0.0);
      EXPECT_NEAR(en, logarithmic_negativity(covariance_matrix(squeezing_parameter(1.0, g, q),
                                                               squeezing_phase(g, q))),
                  1e-10);
    }
}

TEST(Gaussian, BoostPartner) {
  EXPECT_NEAR(boost_partner(10, 0, 0.7), -0.7, 1e-15);
  EXPECT_NEAR(boost_partner(10, 2, 0.0), -0.4 * kPi, 1e-14);
  EXPECT_NEAR(boost_partner(10, 2, -0.9 * kPi), 0.5 * kPi, 1e-14);
  // The map is an involution.
  for (double q = -3.0; q < 3.1; q += 0.3)
    EXPECT_NEAR(fold_momentum(boost_partner(10, 3, boost_partner(10, 3, q)) - q), 0.0, 1e-12);
}

TEST(Gaussian, LandscapeSymmetryAndExclusions) {
  const auto rows = negativity_landscape(1.0, 0.7, 16, 0);
  ASSERT_EQ(rows.size(), 16u);
  double best = -1.0;
  double best_q = 0.0;
  for (const auto& row : rows) {
    EXPECT_NEAR(row.partner_q, fold_momentum(-row.q), 1e-14);
    EXPECT_EQ(row.excluded, row.k == 0 || row.k == 8);
    if (!row.excluded && row.negativity > best) {
      best = row.negativity;
      best_q = row.q;
    }
    for (const auto& other : rows)
      if (other.k == -row.k) EXPECT_NEAR(other.negativity, row.negativity, 1e-14);
  }
  // Maxima sit next to q = 0 or q = pi.
  const double spacing = 2 * kPi / 16;
  EXPECT_TRUE(std::abs(best_q) <= spacing + 1e-12 || kPi - std::abs(best_q) <= spacing + 1e-12);
}

TEST(Gaussian, LandscapeZeroWithoutCoupling) {
  for (const auto& row : negativity_landscape(1.0, 0.0, 12, 3)) EXPECT_EQ(row.negativity, 0.0);
}

TEST(Gaussian, LandscapeRejectsUnstable) {
  EXPECT_THROW(negativity_landscape(1.0, 1.2, 8, 0), StabilityError);
  EXPECT_THROW(negativity_landscape(1.0, 0.2, 8, 8), ConfigError);
}

TEST(Gaussian, LinearRingObservables) {
  const auto obs = linear_ring_observables(1.0, 0.0, 6);
  EXPECT_EQ(obs.energy_per_site, 0.0);
  EXPECT_EQ(obs.density, 0.0);
  const auto sq = linear_ring_observables(1.0, 0.5, 8);
  EXPECT_LT(sq.energy_per_site, 0.0);
  EXPECT_GT(sq.density, 0.0);
  EXPECT_LT(sq.pairing_nn, 0.0);
  EXPECT_GT(sq.max_negativity, 0.0);
}
