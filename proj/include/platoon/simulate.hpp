#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "platoon/controllers.hpp"
#include "platoon/disturbance.hpp"
#include "platoon/lifted_system.hpp"
#include "platoon/reference_profile.hpp"

namespace platoon {

/// Raised when a simulated state leaves the finite range (crash/divergence).
struct SimulationDiverged : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Recorded data sequences of one collection run.
struct DataBatch {
  Eigen::MatrixXd U0;  ///< n_u x T
  Eigen::MatrixXd X0;  ///< n_x x T
  Eigen::MatrixXd X1;  ///< n_x x T
  Eigen::MatrixXd Z0;  ///< n_z x T
  Eigen::MatrixXd W0;  ///< n_w x T; empty unless design-consistent
  int T = 0;
  double t_s = 0.0;
  bool design_consistent = false;

  void validate() const;
};

/// Per-vehicle record at one sample instant.
struct VehicleSample {
  double p = 0, v = 0, a = 0;          // absolute state
  double u = 0;                        // applied effort (0 for HVs)
  double h_err = 0, v_err = 0, w = 0;  // error coordinates and disturbance
};

/// Uniformly sampled closed-loop run of the whole platoon.
struct Trajectory {
  double t_s = 0.0;
  std::vector<double> times;
  std::vector<std::vector<VehicleSample>> steps;  // [step][vehicle]

  int sample_count() const { return static_cast<int>(times.size()); }
  int vehicle_count() const { return steps.empty() ? 0 : static_cast<int>(steps[0].size()); }
};

void write_trajectory_csv(const Trajectory& traj, const std::string& path);
Trajectory read_trajectory_csv(const std::string& path);

struct HighFidelityOptions {
  int substeps = 10;  ///< RK4 substeps per control sample
  double divergence_limit = 1e6;
};

/// Integrates the continuous nonlinear vehicle models under the sampled-data
/// controller (zero-order hold between samples) with a fixed-step classical
/// 4th-order scheme at t_s / substeps. Errors are measured against the
/// instantaneous profile speed and the integrated virtual-leader position
/// anchored at p_0(0) + h_star.
Trajectory integrate_high_fidelity(const PlatoonSpec& spec, Controller& controller,
                                   const ReferenceProfile& profile,
                                   const std::vector<VehicleState>& initial,
                                   double duration,
                                   const HighFidelityOptions& opts = {});

/// One exact step of the discrete design model x+ = A Z(x) + B u + D w.
Eigen::VectorXd step_design_consistent(const LiftedSystem& sys, const Eigen::VectorXd& x,
                                       const Eigen::VectorXd& u, const Eigen::VectorXd& w);

/// Result of stepping the discrete design model for `steps` samples.
struct DesignConsistentRun {
  Eigen::MatrixXd X;  ///< n_x x (steps+1)
  Eigen::MatrixXd U;  ///< n_u x steps
  Eigen::MatrixXd W;  ///< n_w x steps
  double min_follower_gap = 0.0;

  DataBatch to_batch(const LiftingLayout& layout, double t_s) const;
};

/// Steps the discrete design model under the controller, drawing the true
/// disturbances from the spec's (possibly perturbed) vehicle parameters.
DesignConsistentRun simulate_design_consistent(const LiftedSystem& sys,
                                               const PlatoonSpec& spec,
                                               Controller& controller,
                                               const Eigen::VectorXd& x0, int steps);

enum class CollectionMode { DesignConsistent, HighFidelity };

struct CollectResult {
  DataBatch batch;
  Trajectory trajectory;
};

/// Runs the platoon under the given (ACC) controller over a constant-speed
/// segment of the profile and records T samples. Design-consistent mode steps
/// the discrete design model exactly and records the disturbance sequence;
/// high-fidelity mode samples the continuous simulation. A follower gap
/// reaching zero aborts the collection.
CollectResult collect_data(const PlatoonSpec& spec, Controller& controller, int T,
                           CollectionMode mode, const std::vector<VehicleState>& initial,
                           const ReferenceProfile& profile);

struct RichnessReport {
  int rank = 0;
  int n_z = 0;
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  bool full_row_rank = false;
};

/// Numerical row-rank of the lifted data matrix with tolerance
/// max(rows, cols) * eps * sigma_max.
RichnessReport check_richness(const Eigen::MatrixXd& Z0);

/// Maps absolute vehicle states to the stacked error state at time t of the
/// profile, with the virtual leader anchored at p_0(0) + h_star.
Eigen::VectorXd error_state(const PlatoonSpec& spec, const std::vector<VehicleState>& states,
                            const ReferenceProfile& profile, double t, double leader_anchor);

}  // namespace platoon
