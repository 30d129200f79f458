#include "bhpair/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <ostream>
#include <set>
#include <thread>

#include <json.hpp>

#include "bhpair/error.hpp"
#include "bhpair/finite_mps.hpp"
#include "bhpair/gaussian.hpp"
#include "bhpair/perturbation.hpp"

#ifndef BHPAIR_VERSION
#define BHPAIR_VERSION "unknown"
#endif

namespace bhpair {

namespace {

using nlohmann::json;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void set_axis(ModelParams& p, const std::string& name, double value) {
  if (name == "g") p.g = value;
  else if (name == "U") p.U = value;
  else if (name == "omega") p.omega = value;
  else if (name == "mu") p.mu = value;
  else if (name == "Omega") p.Omega = value;
  else if (name == "t") p.t = value;
  else throw ConfigError("cannot sweep '" + name + "'");
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? " " : "") + format_number(v[i]);
  return out;
}

std::map<std::string, std::string> metadata_for(const SweepConfig& cfg) {
  std::map<std::string, std::string> m;
  const auto& s = cfg.solver;
  m["code_version"] = BHPAIR_VERSION;
  m["solver"] = to_string(s.kind);
  for (const auto& [k, v] : to_key_values(cfg.model)) m["model." + k] = v;
  for (const auto& ax : cfg.axes)
    m["axis." + ax.name] = format_number(ax.start) + " " + format_number(ax.stop) + " " + std::to_string(ax.count);
  m["seed"] = std::to_string(s.seed);
  switch (s.kind) {
    case SolverKind::itebd:
      m["chi"] = std::to_string(s.chi);
      m["n_max"] = std::to_string(s.n_max);
      m["schedule"] = join(s.schedule.steps);
      m["tolerance"] = format_number(s.schedule.tolerance);
      m["check_time"] = format_number(s.schedule.check_time);
      m["min_check_steps"] = std::to_string(s.schedule.min_check_steps);
      m["max_steps"] = std::to_string(s.schedule.max_steps_per_stage);
      break;
    case SolverKind::finite:
      m["chi"] = std::to_string(s.chi);
      m["n_max"] = std::to_string(s.n_max);
      m["L"] = std::to_string(s.length);
      m["boundary"] = "open (xi maximum over central sites L/4..3L/4)";
      break;
    case SolverKind::ed:
      m["n_max"] = std::to_string(s.n_max);
      m["sites"] = std::to_string(s.sites);
      m["boundary"] = s.boundary == Boundary::ring ? "ring" : "open";
      break;
    case SolverKind::perturbation:
      m["filling"] = s.filling < 0 ? "insulator" : std::to_string(s.filling);
      break;
    case SolverKind::gaussian:
      break;
  }
  return m;
}

std::string cell_file(const std::string& dir, const std::vector<int>& index) {
  std::string name = "cell";
  for (int i : index) name += "_" + std::to_string(i);
  return (std::filesystem::path(dir) / (name + ".json")).string();
}

bool load_cell(const std::string& path, const std::map<std::string, std::string>& meta, CellResult& cell) {
  std::ifstream in(path);
  if (!in) return false;
  try {
    json j;
    in >> j;
    if (j.at("metadata").get<std::map<std::string, std::string>>() != meta) return false;
    if (j.at("index").get<std::vector<int>>() != cell.index) return false;
    for (const auto& [k, v] : j.at("values").items())
      cell.values[k] = v.is_null() ? kNaN : v.get<double>();
    cell.status = "ok";
    return true;
  } catch (const json::exception&) {
    return false;
  }
}

void save_cell(const std::string& path, const std::map<std::string, std::string>& meta, const CellResult& cell) {
  json j;
  j["metadata"] = meta;
  j["index"] = cell.index;
  j["coords"] = cell.coords;
  j["values"] = json::object();
  for (const auto& [k, v] : cell.values) j["values"][k] = std::isfinite(v) ? json(v) : json(nullptr);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw Error("cannot write cell checkpoint " + tmp);
    out << j.dump() << '\n';
  }
  std::filesystem::rename(tmp, path);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

}  // namespace

Record evaluate_point(const ModelParams& params, const SolverOptions& s) {
  ModelParams p = params;
  Record r;
  switch (s.kind) {
    case SolverKind::gaussian: {
      p.validate();
      const auto obs = linear_ring_observables(p.omega, p.g, *p.sites);
      r["density"] = obs.density;
      r["energy_per_site"] = obs.energy_per_site;
      r["max_negativity"] = obs.max_negativity;
      r["pairing_nn"] = obs.pairing_nn;
      break;
    }
    case SolverKind::perturbation: {
      p.validate();
      PerturbationInput in;
      in.n = s.filling >= 0 ? s.filling : insulator_occupation(p.mu, p.U);
      in.g = p.g;
      in.U = p.U;
      in.mu = p.mu;
      const auto res = observables_second_order(in);
      r["filling"] = in.n;
      r["density"] = res.density;
      r["density_sq"] = res.density_sq;
      r["number_fluct"] = res.number_fluct;
      r["pairing_re"] = res.pairing_dagger_nn.real();
      r["pairing_im"] = res.pairing_dagger_nn.imag();
      r["e_total"] = res.e_total_per_site;
      r["outside_validity"] = res.outside_validity ? 1.0 : 0.0;
      break;
    }
    case SolverKind::itebd: {
      p.sites.reset();
      p.validate();
      const LocalTerms terms = build_local_terms(p);
      ItebdOptions opt;
      opt.chi = s.chi;
      opt.n_max = s.n_max;
      opt.schedule = s.schedule;
      opt.seed = s.seed;
      const MPSState st = itebd_ground(terms, opt);
      const auto obs = measure(st, terms);
      r["amp"] = obs.amp;
      r["canonical_residual"] = st.canonical_residual;
      r["converged"] = st.converged ? 1.0 : 0.0;
      r["denscorr_nn"] = obs.denscorr_nn;
      r["density"] = obs.density;
      r["density_sq"] = obs.density_sq;
      r["free_energy"] = obs.free_energy_per_site;
      r["hopping_nn"] = obs.hopping_nn;
      r["number_fluct"] = obs.number_fluct;
      r["pairing_connected"] = obs.pairing_connected;
      r["pairing_nn"] = obs.pairing_nn;
      r["smallest_schmidt"] = std::min(st.schmidt[0].minCoeff(), st.schmidt[1].minCoeff());
      break;
    }
    case SolverKind::finite: {
      p.sites = s.length;
      p.validate();
      const LocalTerms terms = build_local_terms(p);
      FiniteOptions opt;
      opt.chi = s.chi;
      opt.n_max = s.n_max;
      opt.seed = s.seed;
      const FiniteMPS m = finite_ground(terms, s.length, opt);
      const auto prof = correlation_length(m);
      double central = 0.0;
      int count = 0;
      for (int i = s.length / 4; i <= 3 * s.length / 4; ++i, ++count) central += m.density[static_cast<std::size_t>(i)];
      r["density_center"] = central / count;
      r["energy"] = m.energy;
      r["energy_per_site"] = m.energy / s.length;
      r["max_xi"] = prof.max_xi;
      r["sweeps"] = static_cast<double>(m.sweep_energies.size());
      r["xi_argmax"] = prof.argmax;
      break;
    }
    case SolverKind::ed: {
      p.sites = s.sites;
      p.validate();
      const LocalTerms terms = build_local_terms(p);
      const FockSpace space(s.sites, s.n_max, s.boundary);
      const auto gs = ground_state(build_hamiltonian(terms, space));
      const auto obs = measure_lattice(gs.vector, space);
      r["amp_abs"] = obs.max_abs_amp();
      r["density"] = obs.mean_density();
      r["energy"] = gs.energy;
      r["hopping_abs"] = obs.max_abs_hopping();
      r["number_fluct"] = obs.mean_fluct();
      r["pairing_re"] = obs.mean_pairing().real();
      r["pairing_im"] = obs.mean_pairing().imag();
      break;
    }
  }
  return r;
}

std::size_t SweepDataset::failures() const {
  return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const CellResult& c) { return !c.ok(); }));
}

std::vector<std::string> SweepDataset::observable_columns() const {
  std::set<std::string> names;
  for (const auto& row : rows)
    for (const auto& [k, v] : row.values) names.insert(k);
  for (const auto& d : derived) names.erase(d);
  return {names.begin(), names.end()};
}

int default_workers() {
  if (const char* env = std::getenv("BHPAIR_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
    throw ConfigError("BHPAIR_WORKERS must be a positive integer");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

SweepDataset run_sweep(const SweepConfig& cfg, int workers) {
  cfg.validate();
  if (workers <= 0) workers = default_workers();

  std::vector<Axis> axes = cfg.axes;
  std::sort(axes.begin(), axes.end(), [](const Axis& a, const Axis& b) { return a.name < b.name; });
  SweepDataset data;
  data.metadata = metadata_for(cfg);
  for (const auto& ax : axes) data.axis_names.push_back(ax.name);

  std::vector<std::vector<double>> grids;
  for (const auto& ax : axes) grids.push_back(ax.values());
  std::size_t total = 1;
  for (const auto& g : grids) total *= g.size();
  data.rows.resize(total);
  for (std::size_t cell = 0; cell < total; ++cell) {
    std::size_t rest = cell;
    auto& row = data.rows[cell];
    row.index.assign(axes.size(), 0);
    row.coords.assign(axes.size(), 0.0);
    for (std::size_t a = axes.size(); a-- > 0;) {
      row.index[a] = static_cast<int>(rest % grids[a].size());
      row.coords[a] = grids[a][static_cast<std::size_t>(row.index[a])];
      rest /= grids[a].size();
    }
  }

  const std::string& dir = cfg.output.checkpoint_dir;
  if (!dir.empty()) std::filesystem::create_directories(dir);

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t cell = next++; cell < total; cell = next++) {
      CellResult& row = data.rows[cell];
      const std::string path = dir.empty() ? std::string() : cell_file(dir, row.index);
      if (!path.empty() && load_cell(path, data.metadata, row)) continue;
      try {
        ModelParams p = cfg.model;
        for (std::size_t a = 0; a < axes.size(); ++a) set_axis(p, axes[a].name, row.coords[a]);
        row.values = evaluate_point(p, cfg.solver);
        row.status = "ok";
        if (!path.empty()) save_cell(path, data.metadata, row);
      } catch (const std::exception& e) {
        row.values.clear();
        row.status = std::string("error: ") + e.what();
      }
    }
  };
  const int n = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(workers), total));
  if (n <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < n; ++i) pool.emplace_back(work);
  }
  return data;
}

std::vector<double> derivative(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n != y.size()) throw ConfigError("derivative: size mismatch");
  if (n < 2) throw ConfigError("derivative needs at least two points");
  std::vector<double> out(n);
  out[0] = (y[1] - y[0]) / (x[1] - x[0]);
  out[n - 1] = (y[n - 1] - y[n - 2]) / (x[n - 1] - x[n - 2]);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h1 = x[i] - x[i - 1];
    const double h2 = x[i + 1] - x[i];
    out[i] = (h1 * h1 * y[i + 1] - h2 * h2 * y[i - 1] + (h2 * h2 - h1 * h1) * y[i]) / (h1 * h2 * (h1 + h2));
  }
  return out;
}

void add_compressibility(SweepDataset& data, const std::string& axis) {
  const auto it = std::find(data.axis_names.begin(), data.axis_names.end(), axis);
  if (it == data.axis_names.end()) throw ConfigError("compressibility needs a '" + axis + "' axis");
  const std::size_t a = static_cast<std::size_t>(it - data.axis_names.begin());
  const std::string column = "compressibility";

  // Group rows by every other coordinate.
  std::map<std::vector<int>, std::vector<std::size_t>> lines;
  for (std::size_t r = 0; r < data.rows.size(); ++r) {
    std::vector<int> key = data.rows[r].index;
    key.erase(key.begin() + static_cast<std::ptrdiff_t>(a));
    lines[key].push_back(r);
  }
  for (auto& [key, members] : lines) {
    std::sort(members.begin(), members.end(),
              [&](std::size_t l, std::size_t r) { return data.rows[l].index[a] < data.rows[r].index[a]; });
    std::vector<double> x, y;
    std::vector<std::size_t> used;
    for (std::size_t r : members) {
      const auto& row = data.rows[r];
      const auto d = row.values.find("density");
      if (row.ok() && d != row.values.end()) {
        x.push_back(row.coords[a]);
        y.push_back(d->second);
        used.push_back(r);
      }
    }
    for (std::size_t r : members)
      if (data.rows[r].ok()) data.rows[r].values[column] = kNaN;
    if (x.size() < 2) continue;
    const auto dy = derivative(x, y);
    for (std::size_t k = 0; k < used.size(); ++k) data.rows[used[k]].values[column] = dy[k];
  }
  if (std::find(data.derived.begin(), data.derived.end(), column) == data.derived.end())
    data.derived.push_back(column);
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void emit(const SweepDataset& data, std::ostream& out, OutputFormat format) {
  const auto observables = data.observable_columns();
  std::vector<std::string> columns = data.axis_names;
  columns.insert(columns.end(), observables.begin(), observables.end());
  columns.insert(columns.end(), data.derived.begin(), data.derived.end());
  columns.push_back("status");

  auto value_of = [](const CellResult& row, const std::string& name) {
    const auto f = row.values.find(name);
    return f == row.values.end() ? kNaN : f->second;
  };

  if (format == OutputFormat::csv) {
    out << "# bhpair sweep\n";
    for (const auto& [k, v] : data.metadata) out << "# " << k << " = " << v << '\n';
    for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
    out << '\n';
    for (const auto& row : data.rows) {
      for (std::size_t a = 0; a < data.axis_names.size(); ++a) out << (a ? "," : "") << format_number(row.coords[a]);
      for (const auto& name : observables) out << ',' << format_number(value_of(row, name));
      for (const auto& name : data.derived) out << ',' << format_number(value_of(row, name));
      out << ',' << csv_field(row.status) << '\n';
    }
  } else {
    nlohmann::ordered_json pre;
    pre["metadata"] = data.metadata;
    pre["columns"] = columns;
    out << pre.dump() << '\n';
    for (const auto& row : data.rows) {
      nlohmann::ordered_json j;
      auto put = [&](const std::string& name, double v) {
        j[name] = std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
      };
      for (std::size_t a = 0; a < data.axis_names.size(); ++a) put(data.axis_names[a], row.coords[a]);
      for (const auto& name : observables) put(name, value_of(row, name));
      for (const auto& name : data.derived) put(name, value_of(row, name));
      j["status"] = row.status;
      out << j.dump() << '\n';
    }
  }
  if (!out) throw Error("failed writing dataset");
}

}  // namespace bhpair
