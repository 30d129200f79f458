#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bhpair/ed.hpp"
#include "bhpair/error.hpp"
#include "bhpair/finite_mps.hpp"
#include "bhpair/gaussian.hpp"
#include "bhpair/model.hpp"
#include "bhpair/mps.hpp"
#include "bhpair/perturbation.hpp"
#include "bhpair/sweep.hpp"

namespace {

using bhpair::format_number;
using json = nlohmann::ordered_json;

constexpr int kExitConfig = 2;
constexpr int kExitPartial = 3;

// Output goes to a file when a path is given, else to stdout.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (path.empty()) return;
    file_ = std::make_unique<std::ofstream>(path);
    if (!*file_) throw bhpair::Error("cannot open " + path + " for writing");
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

struct ModelFlags {
  bhpair::ModelParams params;
  int sites = 0;
  std::string term_kind;

  void attach(CLI::App& app) {
    app.add_option("--g", params.g, "Pairing strength g");
    app.add_option("--U", params.U, "On-site interaction U");
    app.add_option("--omega", params.omega, "Photon frequency");
    app.add_option("--mu", params.mu, "Chemical potential");
    app.add_option("--Omega", params.Omega, "Coherent drive strength");
    app.add_option("--t", params.t, "Hopping amplitude (Bose-Hubbard comparison)");
    app.add_option("--d", params.d, "Momentum boost");
    app.add_option("--term-kind", term_kind, "pairing or hopping")->check(CLI::IsMember({"pairing", "hopping"}));
    app.add_flag("--combined", params.combined, "Allow pairing and hopping together");
  }

  bhpair::ModelParams resolve() const {
    bhpair::ModelParams p = params;
    if (!term_kind.empty()) p.term_kind = bhpair::term_kind_from_string(term_kind);
    return p;
  }
};

std::vector<double> parse_steps(const std::string& text) {
  std::vector<double> steps;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw bhpair::ConfigError("bad time step '" + item + "'");
    steps.push_back(v);
  }
  if (steps.empty()) throw bhpair::ConfigError("empty imaginary-time schedule");
  return steps;
}

json observables_json(const bhpair::SiteObservables& o) {
  json j;
  j["density"] = number(o.density);
  j["density_sq"] = number(o.density_sq);
  j["number_fluct"] = number(o.number_fluct);
  j["pairing_nn"] = number(o.pairing_nn);
  j["pairing_connected"] = number(o.pairing_connected);
  j["hopping_nn"] = number(o.hopping_nn);
  j["denscorr_nn"] = number(o.denscorr_nn);
  j["amp"] = number(o.amp);
  j["free_energy_per_site"] = number(o.free_energy_per_site);
  return j;
}

int run_landscape(double omega, double g, int sites, int d, int resolution, const std::string& out) {
  const auto rows = bhpair::negativity_landscape(omega, g, sites, d, resolution);
  Sink sink(out);
  auto& os = sink.stream();
  os << "# bhpair gaussian-landscape\n"
     << "# omega = " << format_number(omega) << "\n# g = " << format_number(g) << "\n# N = " << sites
     << "\n# d = " << d << "\n# resolution = " << resolution << '\n';
  os << "k,q,partner_q,epsilon_q,r_q,E_N,excluded_flag\n";
  for (const auto& r : rows)
    os << r.k << ',' << format_number(r.q) << ',' << format_number(r.partner_q) << ',' << format_number(r.epsilon)
       << ',' << format_number(r.r) << ',' << format_number(r.negativity) << ',' << (r.excluded ? 1 : 0) << '\n';
  return 0;
}

int run_perturb(const bhpair::PerturbationInput& in_base, int filling, const std::string& out) {
  bhpair::PerturbationInput in = in_base;
  in.n = filling >= 0 ? filling : bhpair::insulator_occupation(in.mu, in.U);
  const auto r = bhpair::observables_second_order(in);
  json j;
  j["n"] = in.n;
  j["g"] = in.g;
  j["U"] = in.U;
  j["mu"] = in.mu;
  j["f_n"] = number(r.f_n);
  j["f_n_plus_1"] = number(r.f_np1);
  j["density"] = number(r.density);
  j["density_sq"] = number(r.density_sq);
  j["number_fluct"] = number(r.number_fluct);
  j["pairing_dagger_nn"] = {number(r.pairing_dagger_nn.real()), number(r.pairing_dagger_nn.imag())};
  j["pairing_nn"] = {number(r.pairing_nn.real()), number(r.pairing_nn.imag())};
  j["e_total_per_site"] = number(r.e_total_per_site);
  j["outside_validity"] = r.outside_validity;
  Sink sink(out);
  sink.stream() << j.dump(2) << '\n';
  return 0;
}

struct ItebdFlags {
  int chi = 20;
  int n_max = 10;
  std::uint64_t seed = 1;
  std::string schedule;
  double tolerance = 1e-9;
  std::string save;
  std::string resume;
  int correlator_range = 0;
};

int run_itebd(const bhpair::ModelParams& base, const ItebdFlags& f, const std::string& out) {
  bhpair::ModelParams p = base;
  p.sites.reset();
  p.grand_canonical = true;
  bhpair::ItebdOptions opt;
  opt.chi = f.chi;
  opt.n_max = f.n_max;
  opt.seed = f.seed;
  opt.schedule.tolerance = f.tolerance;
  if (!f.schedule.empty()) opt.schedule.steps = parse_steps(f.schedule);

  bhpair::MPSState st;
  if (!f.resume.empty()) {
    bhpair::ModelParams stored;
    st = bhpair::load_checkpoint(f.resume, &stored);
    if (st.n_max != f.n_max) throw bhpair::ConfigError("checkpoint n_max differs from --n-max");
  }
  p.validate();
  const auto terms = bhpair::build_local_terms(p);
  if (f.resume.empty()) st = bhpair::itebd_ground(terms, opt);
  else bhpair::evolve(st, terms, opt);
  const auto obs = bhpair::measure(st, terms);
  if (!f.save.empty()) bhpair::save_checkpoint(f.save, st, p);

  json j;
  j["model"] = bhpair::to_key_values(p);
  j["chi"] = f.chi;
  j["n_max"] = f.n_max;
  j["seed"] = f.seed;
  j["converged"] = st.converged;
  j["canonical_residual"] = number(st.canonical_residual);
  j["observables"] = observables_json(obs);
  json stages = json::array();
  for (const auto& r : st.log)
    stages.push_back({{"dt", r.dt}, {"steps", r.steps}, {"free_energy", number(r.free_energy)}, {"converged", r.converged}});
  j["stages"] = stages;
  for (std::size_t b = 0; b < 2; ++b) {
    json w = json::array();
    for (Eigen::Index i = 0; i < st.schmidt[b].size(); ++i) w.push_back(st.schmidt[b](i));
    j["schmidt"].push_back(w);
  }
  if (f.correlator_range > 0) {
    const Eigen::MatrixXd ad = bhpair::creation(st.n_max);
    const auto c = bhpair::long_range_correlator(st, ad, ad, f.correlator_range);
    json arr = json::array();
    for (double v : c) arr.push_back(number(v));
    j["pair_correlator"] = arr;
  }
  Sink sink(out);
  sink.stream() << j.dump(2) << '\n';
  return st.converged ? 0 : kExitPartial;
}

int run_finite(const bhpair::ModelParams& base, int length, const bhpair::FiniteOptions& opt, const std::string& out) {
  bhpair::ModelParams p = base;
  p.sites = length;
  p.grand_canonical = true;
  p.validate();
  const auto terms = bhpair::build_local_terms(p);
  const auto m = bhpair::finite_ground(terms, length, opt);
  const auto prof = bhpair::correlation_length(m);
  Sink sink(out);
  auto& os = sink.stream();
  os << "# bhpair finite-xi\n";
  for (const auto& [k, v] : bhpair::to_key_values(p)) os << "# model." << k << " = " << v << '\n';
  os << "# L = " << length << "\n# chi = " << opt.chi << "\n# n_max = " << opt.n_max << "\n# seed = " << opt.seed
     << "\n# boundary = open\n# energy = " << format_number(m.energy) << "\n# sweeps = " << m.sweep_energies.size()
     << "\n# max_xi = " << format_number(prof.max_xi) << "\n# xi_argmax = " << prof.argmax << '\n';
  os << "site,density,density_sq,xi\n";
  for (int i = 0; i < length; ++i) {
    const auto s = static_cast<std::size_t>(i);
    os << i << ',' << format_number(m.density[s]) << ',' << format_number(m.density_sq[s]) << ','
       << format_number(prof.xi_per_site[s]) << '\n';
  }
  return 0;
}

int run_two_mode_check(double omega, double g, double q, int n_max, const std::string& out) {
  const auto c = bhpair::two_mode_check(omega, g, q, n_max);
  json j;
  j["omega"] = omega;
  j["g"] = g;
  j["q"] = q;
  j["n_max"] = n_max;
  j["energy"] = number(c.energy);
  j["expected_energy"] = number(c.expected_energy);
  j["negativity"] = number(c.negativity);
  j["negativity_refined"] = number(c.negativity_refined);
  j["expected_negativity"] = number(c.expected_negativity);
  j["mode_occupation"] = number(c.mode_occupation);
  j["expected_occupation"] = number(c.expected_occupation);
  j["covariance_max_deviation"] = number((c.covariance.C - c.expected_covariance.C).cwiseAbs().maxCoeff());
  j["converged"] = c.converged;
  Sink sink(out);
  sink.stream() << j.dump(2) << '\n';
  return c.converged ? 0 : kExitPartial;
}

int run_lattice_check(const bhpair::ModelParams& base, int sites, int n_max, bool open, const std::string& out) {
  bhpair::ModelParams p = base;
  p.sites = sites;
  p.validate();
  const auto terms = bhpair::build_local_terms(p);
  const bhpair::FockSpace space(sites, n_max, open ? bhpair::Boundary::open : bhpair::Boundary::ring);
  const auto gs = bhpair::ground_state(bhpair::build_hamiltonian(terms, space));
  const auto obs = bhpair::measure_lattice(gs.vector, space);
  json j;
  j["model"] = bhpair::to_key_values(p);
  j["n_max"] = n_max;
  j["boundary"] = open ? "open" : "ring";
  j["energy"] = number(gs.energy);
  j["residual"] = number(gs.residual);
  j["density"] = number(obs.mean_density());
  j["number_fluct"] = number(obs.mean_fluct());
  j["max_abs_amp"] = number(obs.max_abs_amp());
  j["max_abs_hopping"] = number(obs.max_abs_hopping());
  j["pairing_dagger_nn"] = {number(obs.mean_pairing().real()), number(obs.mean_pairing().imag())};
  if (p.U > 0.0) {
    const auto mf = bhpair::mean_field_minimizer(p.g, p.U);
    j["mean_field_alpha_sq"] = number(mf.alpha_sq);
    j["mean_field_energy"] = number(mf.energy);
  }
  Sink sink(out);
  sink.stream() << j.dump(2) << '\n';
  return 0;
}

struct SweepFlags {
  std::string config;
  std::vector<std::string> overrides;
  int workers = 0;
  std::string output;
  std::string format;
  std::string checkpoint_dir;
};

int run_sweep_command(const SweepFlags& f) {
  std::vector<std::string> overrides = f.overrides;
  if (!f.output.empty()) overrides.push_back("output.path=" + f.output);
  if (!f.format.empty()) overrides.push_back("output.format=" + f.format);
  if (!f.checkpoint_dir.empty()) overrides.push_back("output.checkpoint_dir=" + f.checkpoint_dir);
  const auto cfg = bhpair::load_config(f.config, overrides);
  const int workers = f.workers > 0 ? f.workers : bhpair::default_workers();
  auto data = bhpair::run_sweep(cfg, workers);
  if (std::any_of(cfg.axes.begin(), cfg.axes.end(), [](const bhpair::Axis& a) { return a.name == "mu"; }))
    bhpair::add_compressibility(data, "mu");
  Sink sink(cfg.output.path);
  bhpair::emit(data, sink.stream(), cfg.output.format);
  const auto failed = data.failures();
  if (failed > 0) {
    std::cerr << "bhpair: " << failed << " of " << data.rows.size() << " cells failed\n";
    return kExitPartial;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pairing-model phase diagrams: Gaussian, perturbative, MPS and exact solvers"};
  app.require_subcommand(1);
  std::string out;

  auto* landscape = app.add_subcommand("gaussian-landscape", "Two-mode entanglement across the Brillouin zone");
  double l_omega = 1.0, l_g = 0.6;
  int l_sites = 64, l_d = 0, l_res = 0;
  landscape->add_option("--omega", l_omega, "Photon frequency")->capture_default_str();
  landscape->add_option("--g", l_g, "Pairing strength")->capture_default_str();
  landscape->add_option("--N", l_sites, "Ring length")->capture_default_str()->check(CLI::PositiveNumber);
  landscape->add_option("--d", l_d, "Momentum boost")->capture_default_str();
  landscape->add_option("--resolution", l_res, "Sampled momenta (0 = N)")->capture_default_str();
  landscape->add_option("-o,--output", out, "Output file (default stdout)");

  auto* perturb = app.add_subcommand("perturb", "Second-order observables around the uniform insulator");
  bhpair::PerturbationInput p_in;
  int p_fill = -1;
  perturb->add_option("--g", p_in.g, "Pairing strength");
  perturb->add_option("--U", p_in.U, "On-site interaction")->capture_default_str();
  perturb->add_option("--mu", p_in.mu, "Chemical potential");
  perturb->add_option("--n", p_fill, "Filling (default: insulator occupation for mu)");
  perturb->add_option("-o,--output", out, "Output file (default stdout)");

  auto* itebd = app.add_subcommand("itebd", "Infinite-chain ground state by imaginary-time evolution");
  ModelFlags i_model;
  i_model.params.U = 1.0;
  i_model.attach(*itebd);
  ItebdFlags i_flags;
  itebd->add_option("--chi", i_flags.chi, "Bond dimension")->capture_default_str();
  itebd->add_option("--n-max", i_flags.n_max, "Occupation cutoff")->capture_default_str();
  itebd->add_option("--seed", i_flags.seed, "Seed of the initial admixture")->capture_default_str();
  itebd->add_option("--schedule", i_flags.schedule, "Comma-separated time steps");
  itebd->add_option("--tolerance", i_flags.tolerance, "Per-stage free-energy tolerance")->capture_default_str();
  itebd->add_option("--save", i_flags.save, "Write a checkpoint of the final state");
  itebd->add_option("--resume", i_flags.resume, "Continue from a checkpoint");
  itebd->add_option("--correlator-range", i_flags.correlator_range, "Connected <a+ a+> out to this distance");
  itebd->add_option("-o,--output", out, "Output file (default stdout)");

  auto* finite = app.add_subcommand("finite-xi", "Open-chain DMRG and the pair correlation length profile");
  ModelFlags f_model;
  f_model.params.U = 1.0;
  f_model.attach(*finite);
  int f_length = 100;
  bhpair::FiniteOptions f_opt;
  finite->add_option("--L", f_length, "Chain length")->capture_default_str()->check(CLI::Range(2, 100000));
  finite->add_option("--chi", f_opt.chi, "Bond dimension")->capture_default_str();
  finite->add_option("--n-max", f_opt.n_max, "Occupation cutoff")->capture_default_str();
  finite->add_option("--seed", f_opt.seed, "Seed of the initial admixture")->capture_default_str();
  finite->add_option("--max-sweeps", f_opt.max_sweeps, "Sweep budget")->capture_default_str();
  finite->add_option("-o,--output", out, "Output file (default stdout)");

  auto* ed = app.add_subcommand("ed-check", "Exact diagonalization checks");
  double e_omega = 1.0, e_g = 0.6, e_q = std::numbers::pi;
  int e_nmax = 40, e_sites = 0;
  bool e_open = false;
  ModelFlags e_model;
  e_model.attach(*ed);
  ed->add_option("--q", e_q, "Momentum of the two-mode check")->capture_default_str();
  ed->add_option("--n-max", e_nmax, "Occupation cutoff")->capture_default_str();
  ed->add_option("--sites", e_sites, "Lattice ED on this many sites instead of the two-mode check");
  ed->add_flag("--open", e_open, "Open boundary for lattice ED");
  ed->add_option("-o,--output", out, "Output file (default stdout)");

  auto* sweep = app.add_subcommand("sweep", "Config-driven parameter sweep");
  SweepFlags s_flags;
  sweep->add_option("config", s_flags.config, "Sweep configuration file")->required()->check(CLI::ExistingFile);
  sweep->add_option("--set", s_flags.overrides, "Override as section.key=value (repeatable)");
  sweep->add_option("--workers", s_flags.workers, "Worker threads (default BHPAIR_WORKERS or hardware)");
  sweep->add_option("-o,--output", s_flags.output, "Output path (overrides the config)");
  sweep->add_option("--format", s_flags.format, "csv or jsonl")->check(CLI::IsMember({"csv", "jsonl", "json-lines"}));
  sweep->add_option("--checkpoint-dir", s_flags.checkpoint_dir, "Directory of per-cell results for resuming");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*landscape) return run_landscape(l_omega, l_g, l_sites, l_d, l_res, out);
    if (*perturb) return run_perturb(p_in, p_fill, out);
    if (*itebd) return run_itebd(i_model.resolve(), i_flags, out);
    if (*finite) return run_finite(f_model.resolve(), f_length, f_opt, out);
    if (*ed) {
      if (e_sites > 0) return run_lattice_check(e_model.resolve(), e_sites, e_nmax, e_open, out);
      const auto p = e_model.resolve();
      return run_two_mode_check(ed->count("--omega") ? p.omega : e_omega, ed->count("--g") ? p.g : e_g, e_q, e_nmax, out);
    }
    if (*sweep) return run_sweep_command(s_flags);
  } catch (const bhpair::ConfigError& e) {
    std::cerr << "bhpair: configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "bhpair: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
