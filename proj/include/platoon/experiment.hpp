#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "platoon/metrics.hpp"
#include "platoon/runtime.hpp"
#include "platoon/synthesis.hpp"

namespace platoon {

enum ExitCode : int {
  kExitOk = 0,
  kExitInfeasible = 2,
  kExitDiverged = 3,
  kExitConfigError = 4,
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DitherSettings {
  bool enabled = true;
  double amplitude = 0.05;  ///< commanded-accel units [m/s^2]
};

struct ProfileSettings {
  std::string file;               ///< drive-cycle CSV; empty = constant profile
  double hold_duration = 75.0;    ///< formation / collection hold [s]
  double hold_speed = 20.0;       ///< [m/s]
  double speed_scale = 1.0;       ///< unit conversion applied to the file column
  double constant_duration = 60.0;  ///< post-hold length when no file is given
  std::string interp = "linear";  ///< or "zoh"
};

struct SynthesisSettings {
  double eps1 = 1.0, eps2 = 1.0;
  double lambda1 = 1.0, lambda2 = 0.1;
  std::string norm = "spectral";  ///< or "frobenius"
  bool grid_search = false;
  int max_subplatoon = 2;
  bool solve_monolithic = true;  ///< also solve the unsplit problem (timing reference)
  double delta_override = -1.0;  ///< >= 0 replaces the computed bound
  double subplatoon_delta_inflation = 1.0;  ///< factor for non-leading sub-platoons
  double margin = 1e-6;
};

struct ExperimentConfig {
  PlatoonSpec platoon;  ///< nominal parameters
  std::vector<VehicleState> initial;
  double perturbation = 0.10;  ///< relative truth perturbation and box half-width
  bool perturb_hvs = false;
  std::uint64_t seed = 1;
  AccGains acc;
  DitherSettings dither;
  int T = 500;
  ProfileSettings profile;
  SynthesisSettings synthesis;
  std::string outdir = "out";
  double eval_window_start = -1.0;  ///< < 0: start of the post-hold segment

  static ExperimentConfig case1_defaults();
  static ExperimentConfig case2_defaults();
  void validate() const;
};

ExperimentConfig load_config(const std::string& path, ExperimentConfig base);
void save_config_echo(const std::string& path, const ExperimentConfig& config,
                      const PlatoonSpec& true_spec);

/// Truth model: nominal parameters independently perturbed per vehicle and
/// per parameter by a seeded uniform draw within the configured fraction.
PlatoonSpec draw_true_spec(const ExperimentConfig& config);

ReferenceProfile build_profile(const ExperimentConfig& config);

/// Disturbance bound from the configured parameter box (or the override).
double resolve_delta(const ExperimentConfig& config, const PlatoonSpec& sub_spec,
                     bool leading);

struct SynthesisArtifacts {
  std::optional<SynthesisResult> monolithic;
  std::vector<SynthesisResult> splits;
  std::vector<SubPlatoon> partition;
  ControllerBundle bundle;
  bool feasible = false;
};

/// Solves the configured SDPs over a recorded batch and assembles the
/// deployable controller from the split results.
SynthesisArtifacts synthesize_pipeline(const ExperimentConfig& config,
                                       const DataBatch& batch);

struct CaseResult {
  int exit_code = kExitOk;
  MetricsReport cacc_metrics;
  MetricsReport acc_metrics;
  SynthesisArtifacts synthesis;
  PlatoonSpec true_spec;
  Trajectory cacc_trajectory;
  Trajectory acc_trajectory;
  RichnessReport richness;
  std::string message;
};

/// Full pipeline: draw truth, form the platoon under the classic controller,
/// collect data, synthesize, evaluate both controllers over the whole
/// profile, and write the artifact set into config.outdir.
CaseResult run_case(const ExperimentConfig& config);

void write_combined_metrics_csv(
    const std::string& path,
    const std::vector<std::pair<std::string, MetricsReport>>& reports);

}  // namespace platoon
