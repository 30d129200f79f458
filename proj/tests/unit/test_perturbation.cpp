#include <cmath>

#include <gtest/gtest.h>

#include "bhpair/error.hpp"
#include "bhpair/perturbation.hpp"

using namespace bhpair;

TEST(Perturbation, AmplitudeFunction) {
  EXPECT_EQ(f(0, 1.0, 0.3), 0.0);
  EXPECT_NEAR(f(1, 1.0, 0.5), -2.0, 1e-15);
  EXPECT_NEAR(f(2, 1.0, 0.5), 4.0 / 3.0, 1e-15);
}

TEST(Perturbation, ResonanceReportsChemicalPotential) {
  try {
    f(2, 1.0, 2.0);
    FAIL() << "expected a singularity";
  } catch (const SingularityError& e) {
    EXPECT_DOUBLE_EQ(e.resonant_mu(), 2.0);
  }
  PerturbationInput in{1, 0.05, 1.0, 0.0, 0.0};
  EXPECT_THROW(observables_second_order(in), SingularityError);
}

TEST(Perturbation, UnperturbedInsulator) {
  const auto res = observables_second_order({1, 0.0, 1.0, 0.5, 0.0});
  EXPECT_EQ(res.density, 1.0);
  EXPECT_EQ(res.density_sq, 1.0);
  EXPECT_EQ(res.number_fluct, 0.0);
  EXPECT_EQ(std::abs(res.pairing_nn), 0.0);
  EXPECT_EQ(res.hopping_nn, 0.0);
}

TEST(Perturbation, SecondOrderObservables) {
  const auto res = observables_second_order({1, 0.1, 1.0, 0.5, 0.0});
  EXPECT_NEAR(res.density, 1.0 - 0.0027777777777778, 1e-12);
  EXPECT_NEAR(res.density_sq, 1.0016666666666667, 1e-12);
  EXPECT_NEAR(res.number_fluct, res.density_sq - res.density * res.density, 1e-15);
  EXPECT_NEAR(res.pairing_dagger_nn.real(), -0.1166666666666667, 1e-12);
  EXPECT_NEAR(res.pairing_nn.real(), -0.1166666666666667, 1e-12);
  EXPECT_NEAR(res.pairing_nn.imag(), 0.0, 1e-15);
  EXPECT_EQ(res.hopping_nn, 0.0);
  EXPECT_FALSE(res.outside_validity);
  EXPECT_TRUE(observables_second_order({1, 0.2, 1.0, 0.5, 0.0}).outside_validity);
}

TEST(Perturbation, PhaseRotatesPairingOnly) {
  const auto plain = observables_second_order({1, 0.05, 1.0, 0.5, 0.0});
  const auto rotated = observables_second_order({1, 0.05, 1.0, 0.5, 0.8});
  EXPECT_NEAR(std::abs(rotated.pairing_nn), std::abs(plain.pairing_nn), 1e-15);
  EXPECT_NEAR(std::abs(rotated.pairing_dagger_nn - std::conj(rotated.pairing_nn)), 0.0, 1e-15);
  EXPECT_NEAR(rotated.density, plain.density, 1e-15);
}

TEST(Perturbation, ObservablesScaleWithCouplingSquared) {
  const auto a = observables_second_order({2, 0.01, 1.0, 3.0, 0.0});
  const auto b = observables_second_order({2, 0.02, 1.0, 3.0, 0.0});
  EXPECT_NEAR((b.density - 2.0) / (a.density - 2.0), 4.0, 1e-9);
  EXPECT_NEAR(b.pairing_nn.real() / a.pairing_nn.real(), 2.0, 1e-12);
}

TEST(Perturbation, EnergyCorrections) {
  const auto empty = energy_corrections({0, 0.1, 1.0, -1.0, 0.0}, 6);
  EXPECT_EQ(empty.e0, 0.0);
  EXPECT_NEAR(empty.e2, -6.0 / 8.0, 1e-15);
  EXPECT_EQ(empty.e1, 0.0);
  EXPECT_NEAR(empty.total, empty.e0 + 0.01 * empty.e2, 1e-15);

  const auto one = energy_corrections({1, 0.1, 1.0, 0.5, 0.0}, 1);
  EXPECT_NEAR(one.e0, -0.5, 1e-15);
  EXPECT_NEAR(one.e2, -0.5833333333333333, 1e-12);
  EXPECT_EQ(one.e1, 0.0);
}

TEST(Perturbation, EnergyPerSiteMatchesRing) {
  const PerturbationInput in{1, 0.07, 1.0, 0.5, 0.0};
  const auto res = observables_second_order(in);
  const auto ring = energy_corrections(in, 10);
  EXPECT_NEAR(res.e_total_per_site, ring.total / 10.0, 1e-14);
}
