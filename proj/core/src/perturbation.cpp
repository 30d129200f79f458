#include "bhpair/perturbation.hpp"

#include <cmath>
#include <sstream>

#include "bhpair/error.hpp"

namespace bhpair {

namespace {

void check_input(const PerturbationInput& in) {
  if (in.n < 0) throw ConfigError("filling n must be non-negative");
  if (!(in.U > 0.0)) throw ConfigError("perturbation theory requires U > 0");
}

}  // namespace

double f(int n, double U, double mu) {
  if (n == 0) return 0.0;
  const double denom = 2.0 * U * (n - 1) - mu;
  if (std::abs(denom) <= 1e-12 * std::max(1.0, std::abs(U))) {
    std::ostringstream os;
    os << "f_" << n << " is singular: mu = " << 2.0 * U * (n - 1) << " is resonant";
    throw SingularityError(os.str(), 2.0 * U * (n - 1));
  }
  return n / denom;
}

PerturbationResult observables_second_order(const PerturbationInput& in) {
  check_input(in);
  PerturbationResult r;
  const int n = in.n;
  r.f_n = f(n, in.U, in.mu);
  r.f_np1 = f(n + 1, in.U, in.mu);
  const double g2 = in.g * in.g;
  const double fn2 = r.f_n * r.f_n;
  const double fp2 = r.f_np1 * r.f_np1;

  r.density = n + g2 / 8.0 * (fp2 - fn2);
  r.density_sq = double(n) * n + g2 / 8.0 * ((2.0 * n + 1.0) * fp2 - (2.0 * n - 1.0) * fn2);
  r.number_fluct = r.density_sq - r.density * r.density;

  const double amplitude = in.g / 4.0 * (n * r.f_n - (n + 1.0) * r.f_np1);
  r.pairing_nn = std::polar(1.0, in.phi) * amplitude;
  r.pairing_dagger_nn = std::conj(r.pairing_nn);
  r.hopping_nn = 0.0;

  r.e0_per_site = n * (in.U * (n - 1.0) - in.mu);
  r.e2_per_site = (n * r.f_n - (n + 1.0) * r.f_np1) / 8.0;
  r.e_total_per_site = r.e0_per_site + g2 * r.e2_per_site;
  r.outside_validity = std::abs(in.g) > 0.1 * in.U;
  return r;
}

EnergyCorrections energy_corrections(const PerturbationInput& in, int sites) {
  check_input(in);
  if (sites < 1) throw ConfigError("energy corrections need N >= 1");
  const int n = in.n;
  const double fn = f(n, in.U, in.mu);
  const double fp = f(n + 1, in.U, in.mu);
  EnergyCorrections e;
  e.e0 = double(sites) * n * (in.U * (n - 1.0) - in.mu);
  e.e1 = 0.0;
  e.e2 = sites / 8.0 * (n * fn - (n + 1.0) * fp);
  e.total = e.e0 + in.g * in.g * e.e2;
  return e;
}

}  // namespace bhpair
