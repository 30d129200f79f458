#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "bhpair/ed.hpp"
#include "bhpair/model.hpp"
#include "bhpair/mps.hpp"

namespace bhpair {

enum class SolverKind { gaussian, perturbation, itebd, finite, ed };
std::string to_string(SolverKind kind);
SolverKind solver_kind_from_string(const std::string& s);

enum class OutputFormat { csv, jsonl };

struct Axis {
  std::string name;
  double start = 0.0;
  double stop = 0.0;
  int count = 2;

  std::vector<double> values() const;
};

struct SolverOptions {
  SolverKind kind = SolverKind::itebd;
  int chi = 20;
  int n_max = 10;
  int length = 40;           // finite chain
  int sites = 4;             // ed lattice
  Boundary boundary = Boundary::ring;
  std::uint64_t seed = 1;
  ImaginaryTimeSchedule schedule;
  int filling = -1;          // perturbation: -1 picks the insulator occupation
  int resolution = 0;        // gaussian landscapes
};

struct OutputOptions {
  std::string path;          // empty: stdout
  OutputFormat format = OutputFormat::csv;
  std::string checkpoint_dir;
};

struct SweepConfig {
  ModelParams model;
  std::vector<Axis> axes;
  SolverOptions solver;
  OutputOptions output;

  /// Throws ConfigError for unknown axes, bad counts and solver/model mismatches.
  void validate() const;
};

/// Flat sectioned text: [model] keys, [axes] name = start stop count,
/// [solver] and [output]. `overrides` are "section.key=value" strings.
SweepConfig parse_config(std::istream& in, const std::vector<std::string>& overrides = {});
SweepConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

using Record = std::map<std::string, double>;

/// Runs one solver at one parameter point.
Record evaluate_point(const ModelParams& params, const SolverOptions& solver);

struct CellResult {
  std::vector<int> index;
  std::vector<double> coords;
  Record values;
  std::string status = "ok";

  bool ok() const { return status == "ok"; }
};

struct SweepDataset {
  std::vector<std::string> axis_names;  // sorted
  std::vector<CellResult> rows;         // row-major over axis_names
  std::vector<std::string> derived;     // derived column names, in order
  std::map<std::string, std::string> metadata;

  std::size_t failures() const;
  std::vector<std::string> observable_columns() const;
};

/// Worker count from BHPAIR_WORKERS, else hardware concurrency.
int default_workers();

/// Evaluates every grid cell; failures are recorded per cell.
SweepDataset run_sweep(const SweepConfig& cfg, int workers = 0);

/// dy/dx on a possibly non-uniform grid: weighted central differences inside,
/// one-sided at both ends.
std::vector<double> derivative(const std::vector<double>& x, const std::vector<double>& y);

/// Adds d(density)/d(axis) as column "compressibility" along the named axis.
void add_compressibility(SweepDataset& data, const std::string& axis = "mu");

std::string format_number(double v);
void emit(const SweepDataset& data, std::ostream& out, OutputFormat format);

}  // namespace bhpair
