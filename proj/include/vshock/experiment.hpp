#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vshock/metrics.hpp"
#include "vshock/pde_solver.hpp"
#include "vshock/shock_profile.hpp"

namespace vshock {

enum class Scenario { theorem1, theorem2, theorem3, custom };
std::string to_string(Scenario s);
Scenario scenario_from_string(const std::string& s);

/// Exit statuses of run() and the CLI.
enum ExitCode : int { kExitOk = 0, kExitCheckFailed = 1, kExitConfig = 2, kExitBlowUp = 3 };

/// Threshold p0 of the opposite-sign case, computed once and cached.
double p0_threshold();

struct ExperimentConfig {
  Scenario scenario = Scenario::custom;

  double u_minus = 1.0;
  double u_plus = -1.0;
  double p = 1.5;
  /// "burgers", "quartic" or "polynomial:c2,c3,...".
  std::string flux = "burgers";

  SolverConfig solver;
  InitialData initial;

  /// Metrics schedule.
  double c0 = 0.0;  // 0: default_c0(p)
  bool zero_mass_shift = false;
  bool antiderivative = false;

  /// Rate checks. Negative window ends select [t_end / 10, t_end].
  bool check_rates = true;
  double fit_t_a = -1.0;
  double fit_t_b = -1.0;
  double tolerance_factor = 1.1;
  /// Theorem 3 exponents are 1/8 - delta and 1/6 - delta.
  double delta = 0.02;
  /// Subtract the norms of an unperturbed companion run (the numerical
  /// floor) before the sup-ratio test.
  bool floor_correction = true;
  double floor_rel = 1e-6;
  double floor_abs = 1e-10;
  double floor_stationary_tol = 1e-13;

  /// Energy and dissipation checks at every output.
  bool check_energy = true;
  double dissipation_tol = 1e-8;
  double l1_factor = 1.001;
  double shift_bound_tol = 1e-10;
  double phi_tol = 1e-8;

  /// Snapshot CSVs at snapshots + 1 evenly spaced outputs, t = 0 and t_end
  /// included; 0 writes every output.
  std::size_t snapshots = 10;
  /// Extra profile table beyond the grid on each side.
  double profile_margin = 10.0;
  double profile_spacing = 0.01;

  std::filesystem::path output_dir = "out";

  /// Preset values; custom equals theorem1 without the scenario constraints.
  static ExperimentConfig preset(Scenario s);
  /// Starts from the preset named by the `scenario` key (custom if absent)
  /// and overrides every key present. Unknown keys raise ConfigError.
  static ExperimentConfig from_json(const nlohmann::json& doc);
  static ExperimentConfig from_toml(const std::string& text);
  /// TOML unless the extension is .json.
  static ExperimentConfig load(const std::filesystem::path& path);
  /// The parsed file as a JSON object, before presets are applied.
  static nlohmann::json load_document(const std::filesystem::path& path);

  /// Applies one key = value override using the same keys as the files.
  void set(const std::string& key, const std::string& value);

  /// Every settable key with its value type: 'n' number, 'i' integer,
  /// 'b' bool, 's' string.
  static std::vector<std::pair<std::string, char>> keys();

  /// Every field, defaults included.
  nlohmann::json to_json() const;
  /// Throws ConfigError on violated scenario constraints or bad fields.
  void validate() const;

  ShockParams shock_params() const;
  /// Theoretical exponents (L2, Linf) for the scenario.
  std::pair<double, double> rate_exponents() const;
};

struct CheckResult {
  std::string name;
  bool pass = false;
  double value = 0.0;      // worst observed quantity
  double threshold = 0.0;  // what it was compared with
  double at_t = 0.0;
  std::string detail;
  nlohmann::json to_json() const;
};

struct RunResult {
  int exit_code = kExitOk;
  std::string error;
  TimeSeries series;
  TimeSeries floor_series;
  std::vector<RateFit> rates;
  std::vector<CheckResult> checks;
  double wall_seconds = 0.0;
  nlohmann::json summary;
};

/// Energy suite on a finished series. tolerance for ||v-U||_2^2 increases is
/// 1e-8 + 10 dx^2 (steps between the outputs).
std::vector<CheckResult> energy_checks(const TimeSeries& series, const ExperimentConfig& config);

/// Runs the simulation (and the floor companion) and writes into output_dir:
///   profile.csv, profile.json, timeseries.csv, diagnostics.csv,
///   snapshots/u_NNNNNN.csv, rates.json, run_summary.json, timing.json.
/// Everything but timing.json is byte-identical across reruns.
RunResult run(const ExperimentConfig& config);

struct SweepEntry {
  std::string key;  // "p=<p>,scenario=<name>"
  double p = 0.0;
  std::string scenario;
  std::filesystem::path output_dir;
  int exit_code = 0;
  std::string error;
  std::vector<RateFit> rates;
};

struct SweepReport {
  std::vector<SweepEntry> entries;  // sorted by (p, scenario, output_dir)
  int exit_code = 0;
  nlohmann::json to_json() const;
};

/// Runs configs on up to `parallelism` worker threads. Duplicate output
/// directories raise ConfigError before anything starts. A failing child is
/// recorded and the rest continue.
SweepReport sweep(const std::vector<ExperimentConfig>& configs, std::size_t parallelism);

}  // namespace vshock
