#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>
#include <unsupported/Eigen/KroneckerProduct>

#include "bhpair/error.hpp"
#include "bhpair/model.hpp"

using namespace bhpair;

TEST(Model, PairingTermsFromCanonicalParameters) {
  ModelParams p;
  p.g = 1.0;
  p.omega = 1.0;
  const LocalTerms terms = build_local_terms(p);
  EXPECT_DOUBLE_EQ(terms.bond.pairing, 0.5);
  EXPECT_DOUBLE_EQ(terms.bond.hopping, 0.0);
  EXPECT_DOUBLE_EQ(terms.site.number, 1.0);
  EXPECT_DOUBLE_EQ(terms.site.interaction, 0.0);
  EXPECT_DOUBLE_EQ(terms.site.drive, 0.0);
  EXPECT_EQ(p.kind(), TermKind::pairing);
}

TEST(Model, HoppingTermsGrandCanonical) {
  ModelParams p;
  p.t = 1.0;
  p.U = 1.0;
  p.mu = 0.5;
  p.grand_canonical = true;
  const LocalTerms terms = build_local_terms(p);
  EXPECT_DOUBLE_EQ(terms.bond.hopping, -0.5);
  EXPECT_DOUBLE_EQ(terms.bond.pairing, 0.0);
  EXPECT_DOUBLE_EQ(terms.site.interaction, 1.0);
  EXPECT_DOUBLE_EQ(terms.site.number, -0.5);
  EXPECT_EQ(p.kind(), TermKind::hopping);
}

TEST(Model, DrivenSiteTerm) {
  ModelParams p;
  p.g = 0.3;
  p.U = 1.0;
  p.mu = 1.0;
  p.Omega = 0.2;
  p.grand_canonical = true;
  const LocalTerms terms = build_local_terms(p);
  EXPECT_DOUBLE_EQ(terms.site.number, -1.0);
  EXPECT_DOUBLE_EQ(terms.site.interaction, 1.0);
  EXPECT_DOUBLE_EQ(terms.site.drive, 0.2);

  const int n_max = 4;
  const Eigen::MatrixXd a = annihilation(n_max);
  const Eigen::MatrixXd n = number_operator(n_max);
  const Eigen::MatrixXd expected =
      n * (n - identity_operator(n_max)) - n + 0.2 * (a + a.transpose());
  EXPECT_LT((terms.site.matrix(n_max) - expected).norm(), 1e-14);
}

TEST(Model, LadderOperatorsCommuteCanonically) {
  const int n_max = 6;
  const Eigen::MatrixXd a = annihilation(n_max);
  const Eigen::MatrixXd ad = creation(n_max);
  EXPECT_LT((ad - a.transpose()).norm(), 1e-15);
  EXPECT_LT((ad * a - number_operator(n_max)).norm(), 1e-13);
  const Eigen::MatrixXd comm = a * ad - ad * a;
  // Exact below the truncation edge.
  for (int k = 0; k < n_max; ++k) EXPECT_NEAR(comm(k, k), 1.0, 1e-13);
}

TEST(Model, BondMatrixMatchesProducts) {
  BondTerm bond;
  bond.pairing = 0.35;
  bond.hopping = -0.2;
  const int n_max = 3;
  const int d = n_max + 1;
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(d * d, d * d);
  for (const auto& prod : bond.products(n_max))
    sum += prod.coefficient * Eigen::kroneckerProduct(prod.left, prod.right).eval();
  EXPECT_LT((sum - bond.real_matrix(n_max)).norm(), 1e-13);
  EXPECT_LT((bond.matrix(n_max, 0.0).real() - sum).norm(), 1e-13);
  EXPECT_LT(bond.matrix(n_max, 0.0).imag().norm(), 1e-15);
}

TEST(Model, PhasedBondIsHermitian) {
  BondTerm bond;
  bond.pairing = 0.5;
  bond.hopping = 0.25;
  const Eigen::MatrixXcd m = bond.matrix(3, 0.7);
  EXPECT_LT((m - m.adjoint()).norm(), 1e-14);
}

TEST(Model, InsulatorOccupation) {
  EXPECT_EQ(insulator_occupation(1.0, 1.0), 1);
  EXPECT_EQ(insulator_occupation(-0.5, 1.0), 0);
  EXPECT_EQ(insulator_occupation(3.0, 1.0), 2);
  EXPECT_EQ(insulator_occupation(0.5, 1.0), 1);
  // Boundary mu = 2Un resolves to the smaller occupation.
  EXPECT_EQ(insulator_occupation(2.0, 1.0), 1);
}

TEST(Model, InsulatorOccupationMinimizesSiteEnergy) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> mu_dist(-1.0, 9.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double mu = mu_dist(rng);
    const int n = insulator_occupation(mu, 1.0);
    const auto energy = [&](int k) { return k * (k - 1.0) - mu * k; };
    for (int k = 0; k < 12; ++k) EXPECT_LE(energy(n), energy(k) + 1e-12);
  }
}

TEST(Model, MeanFieldEnergy) {
  EXPECT_DOUBLE_EQ(mean_field_energy(0.0, 0.0, 0.7, 1.3), 0.0);
  const double x = 0.4, g = 0.3, U = 1.2;
  EXPECT_NEAR(mean_field_energy(0.0, x, g, U), -g * x * x + U * std::pow(x, 4), 1e-15);
}

TEST(Model, MeanFieldMinimizer) {
  const double g = 0.2, U = 1.0;
  const MeanFieldMinimum m = mean_field_minimizer(g, U);
  EXPECT_NEAR(m.alpha_sq, g / (2.0 * U), 1e-14);
  EXPECT_NEAR(std::norm(m.alpha), m.alpha_sq, 1e-14);
  EXPECT_NEAR(m.energy, mean_field_energy(m.alpha.real(), m.alpha.imag(), g, U), 1e-14);
  // No sampled product state does better.
  for (double re = -0.5; re <= 0.5; re += 0.05)
    for (double im = -0.5; im <= 0.5; im += 0.05)
      EXPECT_GE(mean_field_energy(re, im, g, U), m.energy - 1e-12);
  EXPECT_THROW(mean_field_minimizer(g, 0.0), Error);
}

TEST(Model, BondPhasesFollowBoost) {
  ModelParams p;
  p.sites = 5;
  p.d = 2;
  const auto phases = p.bond_phases();
  ASSERT_EQ(phases.size(), 5u);
  for (int i = 0; i < 5; ++i)
    EXPECT_NEAR(phases[static_cast<std::size_t>(i)], std::numbers::pi * 2 * (2 * i + 1) / 5.0, 1e-15);
  EXPECT_EQ(ModelParams{}.bond_phases(), std::vector<double>{0.0});
}

TEST(Model, ValidationRejectsInconsistentParameters) {
  ModelParams p;
  p.g = 0.1;
  p.t = 0.1;
  EXPECT_THROW(p.validate(), ConfigError);
  p.combined = true;
  EXPECT_NO_THROW(p.validate());

  ModelParams q;
  q.U = -1.0;
  EXPECT_THROW(q.validate(), ConfigError);

  ModelParams r;
  r.mu = 0.5;
  EXPECT_THROW(r.validate(), ConfigError);
  r.grand_canonical = true;
  EXPECT_NO_THROW(r.validate());

  ModelParams s;
  s.sites = 4;
  s.d = 4;
  EXPECT_THROW(s.validate(), ConfigError);
  ModelParams inf;
  inf.d = 1;
  EXPECT_THROW(inf.validate(), ConfigError);

  ModelParams k;
  k.t = 0.1;
  k.term_kind = TermKind::pairing;
  EXPECT_THROW(k.validate(), ConfigError);
}

TEST(Model, KeyValueRoundTrip) {
  ModelParams p;
  p.g = 0.125;
  p.U = 1.5;
  p.mu = -0.25;
  p.Omega = 0.1;
  p.sites = 8;
  p.d = 3;
  p.grand_canonical = true;
  const ModelParams back = model_from_key_values(to_key_values(p));
  EXPECT_EQ(back.g, p.g);
  EXPECT_EQ(back.U, p.U);
  EXPECT_EQ(back.mu, p.mu);
  EXPECT_EQ(back.Omega, p.Omega);
  EXPECT_EQ(back.sites, p.sites);
  EXPECT_EQ(back.d, p.d);
  EXPECT_EQ(back.grand_canonical, p.grand_canonical);
  EXPECT_EQ(back.kind(), TermKind::pairing);
  EXPECT_EQ(term_kind_from_string(to_string(TermKind::hopping)), TermKind::hopping);
  EXPECT_THROW(term_kind_from_string("tunnel"), ConfigError);
}

TEST(Model, LowestDiagonalOccupation) {
  SiteTerm site;
  site.interaction = 1.0;
  site.number = -3.0;
  EXPECT_EQ(lowest_diagonal_occupation(site, 10), 2);
  EXPECT_EQ(lowest_diagonal_occupation(site, 1), 1);
}
