#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "bhpair/error.hpp"
#include "bhpair/sweep.hpp"

namespace bhpair {

namespace pt = boost::property_tree;

namespace {

const std::vector<std::string> kAxisNames{"g", "Omega", "U", "mu", "omega", "t"};

template <typename T>
T read_value(const std::string& key, const std::string& text) {
  std::istringstream in(text);
  T v{};
  in >> v;
  if (in.fail() || !(in >> std::ws).eof())
    throw ConfigError("'" + key + "': cannot parse '" + text + "'");
  return v;
}

std::vector<double> read_list(const std::string& key, const std::string& text) {
  std::istringstream in(text);
  std::vector<double> out;
  double v = 0.0;
  while (in >> v) out.push_back(v);
  if (!in.eof()) throw ConfigError("'" + key + "': cannot parse list '" + text + "'");
  return out;
}

void apply_override(pt::ptree& tree, const std::string& item) {
  const auto eq = item.find('=');
  const auto dot = item.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq)
    throw ConfigError("override must look like section.key=value: '" + item + "'");
  const std::string section = item.substr(0, dot);
  const std::string key = item.substr(dot + 1, eq - dot - 1);
  // property_tree paths use '.', so address the section child explicitly.
  const pt::ptree::path_type sec_path(section, '/');
  auto existing = tree.get_child_optional(sec_path);
  pt::ptree& target = existing ? *existing : tree.add_child(sec_path, pt::ptree{});
  target.put(pt::ptree::path_type(key, '/'), item.substr(eq + 1));
}

SweepConfig from_tree(const pt::ptree& tree) {
  SweepConfig cfg;
  for (const auto& [section, body] : tree) {
    if (!body.data().empty()) throw ConfigError("key '" + section + "' outside of any section");
    if (section == "model") {
      std::map<std::string, std::string> kv;
      for (const auto& [k, v] : body) kv[k] = v.data();
      cfg.model = model_from_key_values(kv);
    } else if (section == "axes") {
      for (const auto& [k, v] : body) {
        const auto parts = read_list("axes." + k, v.data());
        if (parts.size() != 3) throw ConfigError("axis '" + k + "' needs: start stop count");
        Axis ax;
        ax.name = k;
        ax.start = parts[0];
        ax.stop = parts[1];
        if (parts[2] != std::floor(parts[2])) throw ConfigError("axis '" + k + "': count must be an integer");
        ax.count = static_cast<int>(parts[2]);
        cfg.axes.push_back(ax);
      }
    } else if (section == "solver") {
      auto& s = cfg.solver;
      for (const auto& [k, v] : body) {
        const std::string& val = v.data();
        const std::string key = "solver." + k;
        if (k == "kind") s.kind = solver_kind_from_string(val);
        else if (k == "chi") s.chi = read_value<int>(key, val);
        else if (k == "n_max") s.n_max = read_value<int>(key, val);
        else if (k == "L") s.length = read_value<int>(key, val);
        else if (k == "sites") s.sites = read_value<int>(key, val);
        else if (k == "boundary") {
          if (val == "ring") s.boundary = Boundary::ring;
          else if (val == "open") s.boundary = Boundary::open;
          else throw ConfigError("solver.boundary must be ring or open");
        } else if (k == "seed") s.seed = read_value<std::uint64_t>(key, val);
        else if (k == "schedule") s.schedule.steps = read_list(key, val);
        else if (k == "tolerance") s.schedule.tolerance = read_value<double>(key, val);
        else if (k == "check_time") s.schedule.check_time = read_value<double>(key, val);
        else if (k == "min_check_steps") s.schedule.min_check_steps = read_value<long>(key, val);
        else if (k == "max_steps") s.schedule.max_steps_per_stage = read_value<long>(key, val);
        else if (k == "filling") s.filling = read_value<int>(key, val);
        else if (k == "resolution") s.resolution = read_value<int>(key, val);
        else throw ConfigError("unknown solver key '" + k + "'");
      }
    } else if (section == "output") {
      for (const auto& [k, v] : body) {
        if (k == "path") cfg.output.path = v.data();
        else if (k == "format") {
          if (v.data() == "csv") cfg.output.format = OutputFormat::csv;
          else if (v.data() == "jsonl" || v.data() == "json-lines") cfg.output.format = OutputFormat::jsonl;
          else throw ConfigError("output.format must be csv or jsonl");
        } else if (k == "checkpoint_dir") cfg.output.checkpoint_dir = v.data();
        else throw ConfigError("unknown output key '" + k + "'");
      }
    } else {
      throw ConfigError("unknown section [" + section + "]");
    }
  }
  cfg.validate();
  return cfg;
}

}  // namespace

std::string to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::gaussian: return "gaussian";
    case SolverKind::perturbation: return "perturbation";
    case SolverKind::itebd: return "itebd";
    case SolverKind::finite: return "finite";
    case SolverKind::ed: return "ed";
  }
  return "unknown";
}

SolverKind solver_kind_from_string(const std::string& s) {
  if (s == "gaussian") return SolverKind::gaussian;
  if (s == "perturbation") return SolverKind::perturbation;
  if (s == "itebd") return SolverKind::itebd;
  if (s == "finite") return SolverKind::finite;
  if (s == "ed") return SolverKind::ed;
  throw ConfigError("unknown solver '" + s + "'");
}

std::vector<double> Axis::values() const {
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    out[static_cast<std::size_t>(i)] =
        i + 1 == count ? stop : start + (stop - start) * static_cast<double>(i) / (count - 1);
  return out;
}

void SweepConfig::validate() const {
  if (axes.empty() || axes.size() > 2) throw ConfigError("a sweep needs one or two axes");
  for (const auto& ax : axes) {
    if (std::find(kAxisNames.begin(), kAxisNames.end(), ax.name) == kAxisNames.end())
      throw ConfigError("axis '" + ax.name + "' is not a numeric model parameter");
    if (ax.count < 2) throw ConfigError("axis '" + ax.name + "' needs count >= 2");
  }
  if (axes.size() == 2 && axes[0].name == axes[1].name) throw ConfigError("duplicate axis");
  const auto swept = [&](const std::string& n) {
    return std::any_of(axes.begin(), axes.end(), [&](const Axis& a) { return a.name == n; });
  };
  const auto& s = solver;
  if (s.chi < 2 && (s.kind == SolverKind::itebd || s.kind == SolverKind::finite))
    throw ConfigError("solver.chi must be >= 2");
  if (s.n_max < 1) throw ConfigError("solver.n_max must be >= 1");
  switch (s.kind) {
    case SolverKind::gaussian:
      if (model.U != 0.0 || swept("U")) throw ConfigError("the gaussian solver needs U = 0");
      if (!model.sites) throw ConfigError("the gaussian solver needs a finite N");
      break;
    case SolverKind::perturbation:
      if (!model.grand_canonical) throw ConfigError("the perturbative solver is grand-canonical");
      break;
    case SolverKind::itebd:
      if (model.d != 0) throw ConfigError("itebd needs d = 0");
      if (s.n_max < 2) throw ConfigError("itebd needs n_max >= 2");
      break;
    case SolverKind::finite:
      if (model.d != 0) throw ConfigError("the finite solver needs d = 0");
      if (s.length < 4) throw ConfigError("solver.L must be >= 4");
      break;
    case SolverKind::ed:
      if (s.sites < 1) throw ConfigError("solver.sites must be positive");
      break;
  }
  if (!model.grand_canonical && swept("mu")) throw ConfigError("sweeping mu needs grand_canonical = true");
}

SweepConfig parse_config(std::istream& in, const std::vector<std::string>& overrides) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  for (const auto& o : overrides) apply_override(tree, o);
  return from_tree(tree);
}

SweepConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  return parse_config(in, overrides);
}

}  // namespace bhpair
