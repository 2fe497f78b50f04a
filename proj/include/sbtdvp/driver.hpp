#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sbtdvp/analysis.hpp"
#include "sbtdvp/dynamics.hpp"
#include "sbtdvp/run_config.hpp"

namespace sbtdvp {

inline constexpr int kOutputSchemaVersion = 1;
inline constexpr const char* kWorkerEnv = "SBTDVP_MAX_WORKERS";

struct RunOutcome {
  RunConfig config;
  Trajectory trajectory;
  double recurrence_time = 0.0;
  /// Continuum value 2 alpha wc Gamma(s) and the truncated, discretized sum.
  double reorganization_energy = 0.0;
  double discrete_reorganization_energy = 0.0;
  double wall_seconds = 0.0;
};

/// Runs the trajectory described by `config` without touching the filesystem.
RunOutcome execute(const RunConfig& config, const TrajectoryCallbacks& callbacks = {});

/// Column order of the trajectory table.
inline constexpr std::string_view kTableColumns = "t,p_z,p_x,p_y,entropy,sigma,e_total,e_bath,norm";

/// '#'-prefixed header block followed by the comma-separated table.
void write_table(std::ostream& out, const RunOutcome& outcome);

/// JSON sidecar text: settings, derived bath quantities, diagnostics, wall time.
std::string metadata_json(const RunOutcome& outcome);

std::filesystem::path sidecar_path(const std::filesystem::path& table);

/// Writes the table and its sidecar. Throws std::runtime_error if either file
/// exists and `overwrite` is false.
void write_outputs(const RunOutcome& outcome, bool overwrite);

/// execute + write_outputs.
RunOutcome run(const RunConfig& config, bool overwrite = false);

/// Reads a trajectory table back (header lines skipped).
std::vector<ObservableRecord> read_table(std::istream& in);

enum class SweepParameter { alpha, s, delta };

std::string_view to_string(SweepParameter p);
SweepParameter parse_sweep_parameter(std::string_view text);

struct SweepRow {
  double value = 0.0;
  bool ok = false;
  std::string error;
  std::string table_path;
  /// Empty when the window is shorter than minimum_classification_window.
  std::optional<Coherence> classification;
  double steady_p_z = 0.0;
  double steady_entropy = 0.0;
  /// NaN unless sigma was computed and defined.
  double sigma_saturation = 0.0;
};

/// Steady values and classification derived from recorded observables only.
SweepRow summarize(double value, double delta, std::span<const ObservableRecord> records);

/// Number of concurrent sweep workers: the environment cap if set, else the hardware count.
std::size_t worker_limit();

/// One trajectory per value, written to `out_dir`/<param>_<value>.csv.
/// Failed runs are recorded in their row; the rest continue.
std::vector<SweepRow> sweep(const RunConfig& base, SweepParameter parameter,
                            std::span<const double> values, const std::filesystem::path& out_dir,
                            bool overwrite, std::size_t workers = worker_limit());

void write_sweep_summary(std::ostream& out, SweepParameter parameter,
                         std::span<const SweepRow> rows);

struct InitialConditionComparison {
  std::vector<double> t;
  std::vector<double> p_z_factorized;
  std::vector<double> p_z_polarized;
  SeriesDifference difference;
  double steady_factorized = 0.0;
  double steady_polarized = 0.0;
};

/// Throws ConfigError unless the configs differ only in initial_condition
/// (output paths excepted) and one of them is factorized, the other polarized.
InitialConditionComparison compare_initial_conditions(const RunConfig& first,
                                                      const RunConfig& second);
void write_comparison(std::ostream& out, const InitialConditionComparison& comparison);

/// Small-bath comparison of the variational engine against exact Fock propagation.
struct OracleCheckConfig {
  SpectralParams spectral{0.25, 0.1, 1.0};
  std::size_t n_modes = 3;
  double omega_max = 3.0;
  std::size_t n_max = 24;
  double delta = 0.2;
  InitialCondition initial_condition = InitialCondition::factorized;
  double t_max = 5.0;
  double dt = 0.01;
  /// Exact samples and deviation checks are taken every this many steps.
  std::size_t sample_every = 25;
};

struct OracleCheckReport {
  double max_p_z_error = 0.0;
  double max_entropy_error = 0.0;
  /// Worst relative mismatch between the closed-form and Fock-space <delta|delta>.
  double max_deviation_rel_error = 0.0;
  std::size_t deviation_samples = 0;
  double max_displacement = 0.0;
  double truncation_defect = 0.0;
  std::vector<double> t;
  std::vector<double> p_z_variational;
  std::vector<double> p_z_exact;
};

OracleCheckReport oracle_check(const OracleCheckConfig& config);

}  // namespace sbtdvp
