#ifndef BBPN_EXPERIMENT_HPP
#define BBPN_EXPERIMENT_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bbpn/dataset.hpp"
#include "bbpn/kernel.hpp"
#include "bbpn/likelihood.hpp"
#include "bbpn/metrics.hpp"
#include "bbpn/posterior.hpp"
#include "bbpn/problems.hpp"

namespace bbpn {

/// Key/value configuration with [section] headers; keys are addressed as
/// "section.key" ("" section for the preamble). Values keep their raw text
/// until queried.
class ConfigMap {
 public:
  static ConfigMap parse(std::istream& in);
  static ConfigMap parse_file(const std::string& path);

  bool has(const std::string& key) const;
  void set(const std::string& key, const std::string& value);

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::uint64_t get_uint64(const std::string& key, std::uint64_t fallback) const;
  std::vector<double> get_doubles(const std::string& key,
                                  const std::vector<double>& fallback) const;

  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

/// One experiment run: data generation across the resolution grid, optional
/// cumulative augmentation, hyperparameter fitting, limit prediction,
/// metrics and classical baselines.
struct ExperimentConfig {
  std::string problem;  // riemann | ode | eigen-qr | eigen-tensor | pde-kse
  std::string label;
  std::uint64_t seed = 1;
  std::string out_dir = "out";

  std::vector<double> h_grid;          // decreasing; problem default when empty
  std::vector<double> w_grid;          // alternative: solver controls
  std::string h_param = "w^-1";        // control-to-resolution map
  bool cumulative = false;

  RadialProfile profile = RadialProfile::Matern12;
  double alpha = 1.0;       // fixed order (ignored when learned)
  bool learn_alpha = false;
  bool stationary = false;  // alpha = 0 ablation
  int basis_v = 1;
  double nugget_tau = 1e-10;

  FitConfig fit;
  bool diagonal_s = false;
  double band_sigmas = 2.0;
  double central_mass = 0.95;
  bool classical_baselines = true;

  ConfigMap extra;  // problem-specific sections (ode.*, qr.*, tensor.*, kse.*)

  static ExperimentConfig from_map(const ConfigMap& map);
  static ExperimentConfig load(const std::string& path);
  void validate() const;
};

struct QueryPointResult {
  Ordinate t;
  double mean = 0.0;
  double sd = 0.0;
  std::optional<double> truth;
  std::optional<double> baseline_richardson;  // n-point polynomial tableau
  std::optional<double> baseline_bs;          // rational tableau
};

struct StageResult {
  double h_finest = 0.0;
  Dataset dataset;
  std::vector<FitResult> fits;  // one per independent output group
  LimitPosterior posterior;     // joint over the stage query, group-blocked
  std::vector<QueryPointResult> points;
  std::optional<CalibrationReport> report;
  double alpha_ml = 0.0;
};

struct ExperimentResult {
  std::string label;
  ExperimentConfig config;
  std::vector<Dataset> runs;  // raw per-resolution datasets
  std::vector<StageResult> stages;
  std::optional<std::string> failure;  // "phase: message" when a phase failed
};

std::vector<std::string> problem_names();

/// Runs the configured experiment end to end. Exceptions inside a phase are
/// captured into result.failure (tagged with the phase name) so that partial
/// outputs can still be flushed.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Fits a user-supplied dataset (the `extrapolate` entry point); the query
/// defaults to the distinct ordinates of the data.
ExperimentResult run_extrapolate(const ExperimentConfig& config, const Dataset& data,
                                 const std::vector<Ordinate>& query = {});

/// Writes results.csv, band.csv, fit.json, runs/run_<i>.csv and status.txt
/// under out_dir. Failed runs still flush partial outputs; status.txt then
/// carries the failure marker.
void emit_outputs(const ExperimentResult& result, const std::string& out_dir);

/// Repetition study: re-fits the final stage `repetitions` times with seeds
/// seed, seed+1, ... and writes one calibration CSV row per repetition.
void run_calibration_study(const ExperimentConfig& config, int repetitions, std::ostream& out);

}  // namespace bbpn

#endif  // BBPN_EXPERIMENT_HPP
