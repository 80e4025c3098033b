#pragma once

// Experiment harness behind the CLI: run configuration, backend dispatch,
// reference solutions, error metrics, timing, and CSV/plot emission.

#include <optional>
#include <string>
#include <vector>

#include "rte/angular.hpp"
#include "rte/diagnostics.hpp"
#include "rte/medium.hpp"
#include "rte/phase.hpp"

namespace rte {

struct RunConfig {
  std::string problem = "iso";     // iso | aniso
  std::string backend = "dense";   // dense | fft | rsf
  int n = 32;
  double eps = 1e-6;

  // homogeneous: mu_s constant; bump: mu_s = 1 + rho*exp(-|x-c|^2/4);
  // forward: the position-dependent forward-peaked pair
  // (mu_s = 1 + 2*rho*g with the matching phase function).
  std::string medium = "homogeneous";
  double mu_s = 1.0;
  double mu_a = 0.2;
  double rho = 1.0;

  // isotropic | two-term | forward (forward is implied by medium=forward).
  std::string phase = "isotropic";
  double phase_a = 0.2;  // two-term coefficient
  std::vector<int> modes = {-1, 0, 1};

  int source = 1;  // f1 | f2 | f3
  std::string out_dir = ".";
  bool write_solution = true;
  bool write_report = true;
  bool write_plot = false;
  bool compute_error = true;
  unsigned seed = 1234;  // randomized probes only; solves are deterministic

  static RunConfig from_file(const std::string& path);
  // key=value assignment shared by config files and CLI overrides; throws
  // InputError on unknown keys or unparseable values.
  void set(const std::string& key, const std::string& value);
  void validate() const;

  Medium make_medium() const;
  PhaseFunction make_phase() const;
  ModeSet make_modes() const;
  std::string slug() const;  // deterministic output-file stem
};

struct RunResult {
  std::vector<double> u;
  std::optional<ModalSolution> modal;
  double t_pre = 0.0;  // assembly / symbol / factorization seconds
  double t_sol = 0.0;  // median-of-3 solve seconds
  int iterations = 0;  // Krylov iterations (fft backend)
  std::optional<double> error;  // relative L2 vs the reference policy
  std::string reference;        // which backend served as reference
  std::string solution_path, report_path, plot_path;
};

// Relative L2 over grid values; 0 when u == ref.
double relative_l2_error(const std::vector<double>& u,
                         const std::vector<double>& ref);

RunResult run(const RunConfig& cfg);

// One row per combination of the axes (empty axis = keep the template's
// value). Per-row failures are recorded in the status column and the sweep
// continues. Returns the table path.
struct SweepAxes {
  std::vector<int> n;
  std::vector<double> eps;
  std::vector<double> rho;
};
std::string sweep(const RunConfig& base, const SweepAxes& axes,
                  const std::string& table_name = "sweep");

// Diagnostics battery over representative configurations; one report line
// each, serialized as JSON lines. Returns overall pass.
bool check_suite(const std::string& out_dir, std::string* summary = nullptr);

// Desk-scale reproductions of the benchmark table layouts. Presets:
// table-iso-con-err, table-iso-var-err, table-ani-con-err, table-ani-var-mus.
// n_override trims or replaces the preset's grid axis (0 = preset default).
std::string repro(const std::string& preset, const std::string& out_dir,
                  int n_override = 0);

// write-then-rename; the target never holds partial content.
void write_file_atomic(const std::string& path, const std::string& content);

std::string format_double(double v);  // shortest round-trip decimal form

}  // namespace rte
