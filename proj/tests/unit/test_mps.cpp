#include <cmath>
#include <filesystem>

#include <gtest/gtest.h>

#include "bhpair/ed.hpp"
#include "bhpair/error.hpp"
#include "bhpair/finite_mps.hpp"
#include "bhpair/mps.hpp"
#include "bhpair/perturbation.hpp"

using namespace bhpair;

namespace {

ModelParams grand_canonical(double g, double t, double mu) {
  ModelParams p;
  p.g = g;
  p.t = t;
  p.U = 1.0;
  p.mu = mu;
  p.grand_canonical = true;
  return p;
}

ItebdOptions small_options(int chi, int n_max) {
  ItebdOptions opt;
  opt.chi = chi;
  opt.n_max = n_max;
  return opt;
}

}  // namespace

TEST(Itebd, ProductStateObservables) {
  const auto terms = build_local_terms(grand_canonical(0.0, 0.0, 0.5));
  const auto vac = measure(product_state(4, 0, 0.0, 1), terms);
  EXPECT_EQ(vac.density, 0.0);
  EXPECT_EQ(vac.density_sq, 0.0);
  EXPECT_EQ(vac.pairing_nn, 0.0);
  EXPECT_EQ(vac.hopping_nn, 0.0);
  EXPECT_EQ(vac.amp, 0.0);
  const auto one = measure(product_state(4, 1, 0.0, 1), terms);
  EXPECT_NEAR(one.density, 1.0, 1e-15);
  EXPECT_NEAR(one.density_sq, 1.0, 1e-15);
  EXPECT_NEAR(one.number_fluct, 0.0, 1e-15);
  EXPECT_NEAR(one.free_energy_per_site, -0.5, 1e-15);
}

TEST(Itebd, ProductStateCorrelatorVanishes) {
  const MPSState st = product_state(3, 1, 1e-3, 9);
  const Eigen::MatrixXd ad = creation(3);
  for (double c : long_range_correlator(st, ad, ad, 6)) EXPECT_NEAR(c, 0.0, 1e-14);
}

TEST(Itebd, InsulatorIsExact) {
  const auto terms = build_local_terms(grand_canonical(0.0, 0.0, 1.0));
  const MPSState st = itebd_ground(terms, small_options(4, 4));
  EXPECT_TRUE(st.converged);
  const auto obs = measure(st, terms);
  EXPECT_NEAR(obs.density, 1.0, 1e-12);
  EXPECT_LE(obs.number_fluct, 1e-8);
  EXPECT_LE(std::abs(obs.pairing_nn), 1e-8);
  EXPECT_LE(std::abs(obs.hopping_nn), 1e-8);
}

TEST(Itebd, WeakPairingMatchesPerturbationTheory) {
  const auto terms = build_local_terms(grand_canonical(0.05, 0.0, 0.5));
  const MPSState st = itebd_ground(terms, small_options(8, 5));
  ASSERT_TRUE(st.converged);
  EXPECT_LT(st.canonical_residual, 1e-8);
  const auto obs = measure(st, terms);
  const auto pert = observables_second_order({1, 0.05, 1.0, 0.5, 0.0});
  EXPECT_NEAR(obs.density, pert.density, 0.01 * pert.density);
  EXPECT_NEAR(obs.number_fluct, pert.number_fluct, 0.05 * pert.number_fluct);
  EXPECT_NEAR(obs.pairing_nn, pert.pairing_dagger_nn.real(), 0.02 * std::abs(pert.pairing_dagger_nn));
}

TEST(Itebd, PairingHasNoSingleParticleOrder) {
  const auto terms = build_local_terms(grand_canonical(0.3, 0.0, 1.2));
  const MPSState st = itebd_ground(terms, small_options(8, 5));
  const auto obs = measure(st, terms);
  ASSERT_TRUE(st.charged());
  EXPECT_LE(std::abs(obs.hopping_nn), 1e-14);
  EXPECT_LE(std::abs(obs.amp), 1e-14);
  EXPECT_GT(std::abs(obs.pairing_nn), 0.05);
  EXPECT_NEAR(obs.pairing_connected, obs.pairing_nn, 1e-14);
  // Pair correlations live on odd distances and decay along them. Even
  // distances would change the sublattice charge.
  const Eigen::MatrixXd ad = creation(5);
  const auto corr = long_range_correlator(st, ad, ad, 8);
  for (std::size_t r = 1; r < corr.size(); r += 2) EXPECT_LE(std::abs(corr[r]), 1e-14);
  for (std::size_t r = 2; r < corr.size(); r += 2) EXPECT_LT(std::abs(corr[r]), std::abs(corr[r - 2]));
}

TEST(Itebd, ChargeTrackingOnlyForPairingTerms) {
  EXPECT_TRUE(product_state(4, 1, 0.0, 1).charged());
  EXPECT_FALSE(product_state(4, 1, 1e-3, 1).charged());
  const MPSState pairing = itebd_ground(build_local_terms(grand_canonical(0.2, 0.0, 0.5)), small_options(6, 4));
  ASSERT_TRUE(pairing.charged());
  for (int bond = 0; bond < 2; ++bond)
    EXPECT_EQ(pairing.charges[bond].size(), static_cast<std::size_t>(pairing.schmidt[bond].size()));
  const MPSState hopping = itebd_ground(build_local_terms(grand_canonical(0.0, 0.1, 0.5)), small_options(6, 3));
  EXPECT_FALSE(hopping.charged());
}

TEST(Itebd, MottPlateauOfBoseHubbard) {
  const auto terms = build_local_terms(grand_canonical(0.0, 0.1, 0.5));
  const MPSState st = itebd_ground(terms, small_options(8, 4));
  const auto obs = measure(st, terms);
  EXPECT_NEAR(obs.density, 1.0, 1e-8);
  EXPECT_GT(obs.hopping_nn, 0.05);
}

TEST(Itebd, DeterministicForFixedSeed) {
  const auto terms = build_local_terms(grand_canonical(0.0, 0.1, 0.5));
  const MPSState a = itebd_ground(terms, small_options(6, 3));
  const MPSState b = itebd_ground(terms, small_options(6, 3));
  for (int site = 0; site < 2; ++site) {
    EXPECT_EQ(a.schmidt[site], b.schmidt[site]);
    for (std::size_t s = 0; s < a.tensors[site].size(); ++s)
      EXPECT_EQ(a.tensors[site][s], b.tensors[site][s]);
  }
}

TEST(Itebd, DriveOnDecoupledSitesIsSingleSiteProblem) {
  ModelParams p;
  p.U = 1.0;
  p.omega = 1.0;
  p.Omega = 0.3;
  const auto terms = build_local_terms(p);
  const auto result = driven_ground(terms, small_options(4, 8));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(terms.site.matrix(8));
  const Eigen::VectorXd v = es.eigenvectors().col(0);
  const double density = v.dot(number_operator(8) * v);
  // Stages stop on the energy, which is quadratic in the state error.
  EXPECT_NEAR(result.observables.density, density, 1e-5);
  EXPECT_NEAR(result.observables.free_energy_per_site, es.eigenvalues()(0), 1e-9);

  p.Omega = 0.0;
  const auto vacuum = driven_ground(build_local_terms(p), small_options(4, 8));
  EXPECT_NEAR(vacuum.observables.density, 0.0, 1e-14);
}

TEST(Itebd, CheckpointRoundTrip) {
  const ModelParams params = grand_canonical(0.2, 0.0, 0.5);
  const auto terms = build_local_terms(params);
  const MPSState st = itebd_ground(terms, small_options(6, 4));
  const auto path = std::filesystem::temp_directory_path() / "bhpair_checkpoint_test.json";
  save_checkpoint(path.string(), st, params);
  ModelParams loaded_params;
  const MPSState back = load_checkpoint(path.string(), &loaded_params);
  std::filesystem::remove(path);
  EXPECT_EQ(loaded_params.g, params.g);
  EXPECT_EQ(loaded_params.mu, params.mu);
  EXPECT_EQ(back.n_max, st.n_max);
  EXPECT_EQ(back.chi, st.chi);
  EXPECT_EQ(back.seed, st.seed);
  EXPECT_EQ(back.log.size(), st.log.size());
  EXPECT_TRUE(st.charged());
  EXPECT_EQ(back.charges, st.charges);
  for (int site = 0; site < 2; ++site) {
    EXPECT_EQ(back.schmidt[site], st.schmidt[site]);
    for (std::size_t s = 0; s < st.tensors[site].size(); ++s)
      EXPECT_EQ(back.tensors[site][s], st.tensors[site][s]);
  }
  EXPECT_NEAR(measure(back, terms).density, measure(st, terms).density, 1e-15);
}

TEST(Itebd, RejectsPhasedBonds) {
  ModelParams p;
  p.g = 0.2;
  p.omega = 1.0;
  p.sites = 4;
  p.d = 1;
  EXPECT_THROW(itebd_ground(build_local_terms(p), small_options(4, 3)), Error);
}

TEST(FiniteMps, MatchesExactDiagonalization) {
  const auto terms = build_local_terms(grand_canonical(0.2, 0.0, 0.5));
  FiniteOptions opt;
  opt.chi = 32;
  opt.n_max = 3;
  FiniteMPS mps = finite_ground(terms, 6, opt);
  const FockSpace space(6, 3, Boundary::open);
  const auto gs = ground_state(build_hamiltonian(terms, space));
  EXPECT_NEAR(mps.energy, gs.energy, 1e-6);
  EXPECT_NEAR(energy_expectation(mps, terms), mps.energy, 1e-9);
  const auto obs = measure_lattice(gs.vector, space);
  for (int i = 0; i < 6; ++i) {
    EXPECT_NEAR(mps.density[i], obs.density[i], 1e-5);
    EXPECT_NEAR(mps.density_sq[i], obs.density_sq[i], 1e-5);
  }
  for (int i = 0; i < 5; ++i)
    EXPECT_NEAR(mps.pair_correlator(i, i + 1), obs.pairing_nn[i].real(), 1e-5);
}

TEST(FiniteMps, InsulatorEnergy) {
  const double mu = 2.5;
  const auto terms = build_local_terms(grand_canonical(0.0, 0.0, mu));
  FiniteOptions opt;
  opt.chi = 8;
  opt.n_max = 4;
  const FiniteMPS mps = finite_ground(terms, 8, opt);
  const int n = insulator_occupation(mu, 1.0);
  EXPECT_NEAR(mps.energy, 8 * (n * (n - 1.0) - mu * n), 1e-10);
  const auto prof = correlation_length(mps);
  for (double xi : prof.xi_per_site) EXPECT_EQ(xi, 0.0);
}

TEST(FiniteMps, CorrelationLengthOfUniformCorrelator) {
  Eigen::MatrixXd c = Eigen::MatrixXd::Ones(4, 4);
  c.diagonal().setZero();
  const auto prof = correlation_length(c, 0, 3);
  EXPECT_NEAR(prof.xi_per_site[1], 4.0 / 3.0, 1e-15);
  EXPECT_NEAR(prof.xi_per_site[0], 2.0, 1e-15);
  EXPECT_NEAR(prof.max_xi, 2.0, 1e-15);
  const auto zero = correlation_length(Eigen::MatrixXd::Zero(5, 5), 0, 4);
  EXPECT_EQ(zero.max_xi, 0.0);
}

TEST(FiniteMps, CorrelationLengthGrowsWithPairing) {
  FiniteOptions opt;
  opt.chi = 16;
  opt.n_max = 4;
  double previous = 0.0;
  for (double g : {0.1, 0.3}) {
    FiniteMPS mps = finite_ground(build_local_terms(grand_canonical(g, 0.0, 0.5)), 16, opt);
    const auto prof = correlation_length(mps);
    EXPECT_TRUE(std::isfinite(prof.max_xi));
    EXPECT_GT(prof.max_xi, previous);
    EXPECT_LT(prof.max_xi, 16.0);
    previous = prof.max_xi;
  }
}
