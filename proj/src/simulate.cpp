#include "platoon/simulate.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace platoon {

void DataBatch::validate() const {
  const auto cols_ok = [&](const Eigen::MatrixXd& m) { return m.cols() == T; };
  if (!cols_ok(U0) || !cols_ok(X0) || !cols_ok(X1) || !cols_ok(Z0))
    throw std::invalid_argument("DataBatch: column counts must all equal T");
  if (design_consistent && W0.cols() != T)
    throw std::invalid_argument("DataBatch: design-consistent batch must carry W0");
}

Eigen::VectorXd error_state(const PlatoonSpec& spec, const std::vector<VehicleState>& states,
                            const ReferenceProfile& profile, double t, double leader_anchor) {
  const int n = spec.size();
  if (static_cast<int>(states.size()) != n)
    throw std::invalid_argument("error_state: one state per vehicle required");
  const double v_ref = profile.speed_at(t);
  const double vl_pos = leader_anchor + profile.distance_at(t);
  Eigen::VectorXd x(3 * n);
  for (int i = 0; i < n; ++i) {
    const double gap = i == 0 ? vl_pos - states[0].p : states[i - 1].p - states[i].p;
    x(3 * i) = gap - spec.h_star;
    x(3 * i + 1) = states[i].v - v_ref;
    x(3 * i + 2) = states[i].a;
  }
  return x;
}

namespace {

void check_finite(const Eigen::VectorXd& y, double limit, double t) {
  for (int i = 0; i < y.size(); ++i) {
    if (!std::isfinite(y(i)) || std::abs(y(i)) > limit) {
      std::ostringstream msg;
      msg << "simulation diverged at t = " << t << " (state entry " << i << " = " << y(i)
          << ")";
      throw SimulationDiverged(msg.str());
    }
  }
}

// Stacked (p, v, a) derivative of the coupled nonlinear platoon under held
// efforts u (one per AV, layout order).
Eigen::VectorXd platoon_rhs(const PlatoonSpec& spec, const LiftingLayout& layout,
                            const Eigen::VectorXd& y, const Eigen::VectorXd& u) {
  const int n = spec.size();
  Eigen::VectorXd dy(3 * n);
  int av = 0;
  for (int i = 0; i < n; ++i) {
    const VehicleState si{y(3 * i), y(3 * i + 1), y(3 * i + 2)};
    if (is_av(spec.vehicles[i])) {
      const VehicleState d = av_derivative(si, spec.av_at(i), u(av));
      dy.segment<3>(3 * i) << d.p, d.v, d.a;
      ++av;
    } else {
      const VehicleState pred{y(3 * (i - 1)), y(3 * (i - 1) + 1), y(3 * (i - 1) + 2)};
      const VehicleState d = hv_derivative(si, pred, spec.hv_at(i));
      dy.segment<3>(3 * i) << si.v, d.v, d.a;
    }
  }
  (void)layout;
  return dy;
}

Eigen::VectorXd rk4_step(const PlatoonSpec& spec, const LiftingLayout& layout,
                         const Eigen::VectorXd& y, const Eigen::VectorXd& u, double dt) {
  const Eigen::VectorXd k1 = platoon_rhs(spec, layout, y, u);
  const Eigen::VectorXd k2 = platoon_rhs(spec, layout, y + 0.5 * dt * k1, u);
  const Eigen::VectorXd k3 = platoon_rhs(spec, layout, y + 0.5 * dt * k2, u);
  const Eigen::VectorXd k4 = platoon_rhs(spec, layout, y + dt * k3, u);
  return y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

Trajectory integrate_high_fidelity(const PlatoonSpec& spec, Controller& controller,
                                   const ReferenceProfile& profile,
                                   const std::vector<VehicleState>& initial,
                                   double duration, const HighFidelityOptions& opts) {
  spec.validate();
  if (duration <= 0.0) throw std::invalid_argument("integrate_high_fidelity: duration <= 0");
  if (opts.substeps < 1) throw std::invalid_argument("integrate_high_fidelity: substeps < 1");
  const LiftingLayout layout = make_layout(spec);
  const int n = spec.size();
  const int steps = static_cast<int>(std::llround(duration / spec.t_s));
  const double leader_anchor = initial.at(0).p + spec.h_star;

  Eigen::VectorXd y(3 * n);
  for (int i = 0; i < n; ++i) y.segment<3>(3 * i) << initial[i].p, initial[i].v, initial[i].a;

  controller.reset();
  Trajectory traj;
  traj.t_s = spec.t_s;
  traj.times.reserve(steps + 1);
  traj.steps.reserve(steps + 1);

  const double dt = spec.t_s / opts.substeps;
  Eigen::VectorXd u_held = Eigen::VectorXd::Zero(layout.n_u);
  for (int k = 0; k <= steps; ++k) {
    const double t = k * spec.t_s;
    check_finite(y, opts.divergence_limit, t);

    std::vector<VehicleState> states(n);
    for (int i = 0; i < n; ++i) states[i] = {y(3 * i), y(3 * i + 1), y(3 * i + 2)};
    const Eigen::VectorXd x_err = error_state(spec, states, profile, t, leader_anchor);
    u_held = controller.control(k, x_err);

    std::vector<VehicleSample> row(n);
    int av = 0;
    for (int i = 0; i < n; ++i) {
      VehicleSample& s = row[i];
      s.p = states[i].p;
      s.v = states[i].v;
      s.a = states[i].a;
      s.h_err = x_err(3 * i);
      s.v_err = x_err(3 * i + 1);
      s.u = is_av(spec.vehicles[i]) ? u_held(av++) : 0.0;
      s.w = true_disturbance(spec, i, s.h_err);
    }
    traj.times.push_back(t);
    traj.steps.push_back(std::move(row));

    if (k == steps) break;
    for (int s = 0; s < opts.substeps; ++s) y = rk4_step(spec, layout, y, u_held, dt);
  }
  return traj;
}

Eigen::VectorXd step_design_consistent(const LiftedSystem& sys, const Eigen::VectorXd& x,
                                       const Eigen::VectorXd& u, const Eigen::VectorXd& w) {
  if (!sys.discretized())
    throw std::invalid_argument("step_design_consistent: system not discretized");
  if (x.size() != sys.layout.n_x || u.size() != sys.layout.n_u || w.size() != sys.layout.n_w)
    throw std::invalid_argument("step_design_consistent: dimension mismatch");
  return sys.A * lift(x, sys.layout) + sys.B * u + sys.D * w;
}

DesignConsistentRun simulate_design_consistent(const LiftedSystem& sys,
                                               const PlatoonSpec& spec,
                                               Controller& controller,
                                               const Eigen::VectorXd& x0, int steps) {
  if (steps < 1) throw std::invalid_argument("simulate_design_consistent: steps < 1");
  const LiftingLayout& L = sys.layout;
  DesignConsistentRun run;
  run.X.resize(L.n_x, steps + 1);
  run.U.resize(L.n_u, steps);
  run.W.resize(L.n_w, steps);
  run.X.col(0) = x0;
  run.min_follower_gap = std::numeric_limits<double>::infinity();

  controller.reset();
  for (int k = 0; k < steps; ++k) {
    const Eigen::VectorXd x = run.X.col(k);
    check_finite(x, 1e9, k * sys.t_s);
    Eigen::VectorXd w(L.n_w);
    for (int i = 0; i < L.n; ++i) w(i) = true_disturbance(spec, i, x(3 * i));
    const Eigen::VectorXd u = controller.control(k, x);
    run.U.col(k) = u;
    run.W.col(k) = w;
    run.X.col(k + 1) = step_design_consistent(sys, x, u, w);
    for (int i = 1; i < L.n; ++i)
      run.min_follower_gap = std::min(run.min_follower_gap, x(3 * i) + spec.h_star);
  }
  return run;
}

DataBatch DesignConsistentRun::to_batch(const LiftingLayout& layout, double t_s) const {
  DataBatch b;
  const int T = static_cast<int>(U.cols());
  b.T = T;
  b.t_s = t_s;
  b.design_consistent = true;
  b.U0 = U;
  b.X0 = X.leftCols(T);
  b.X1 = X.rightCols(T);
  b.W0 = W;
  b.Z0.resize(layout.n_z, T);
  for (int k = 0; k < T; ++k) b.Z0.col(k) = lift(X.col(k), layout);
  return b;
}

CollectResult collect_data(const PlatoonSpec& spec, Controller& controller, int T,
                           CollectionMode mode, const std::vector<VehicleState>& initial,
                           const ReferenceProfile& profile) {
  if (T < 1) throw std::invalid_argument("collect_data: T must be at least 1");
  spec.validate();
  const double window = T * spec.t_s;
  if (!profile.constant_over(0.0, window, 1e-9))
    throw std::invalid_argument(
        "collect_data: the reference must be constant over the collection window");

  CollectResult out;
  if (mode == CollectionMode::DesignConsistent) {
    const LiftedSystem sys = discretize(assemble_polynomial_system(spec), spec.t_s);
    const double anchor = initial.at(0).p + spec.h_star;
    const Eigen::VectorXd x0 = error_state(spec, initial, profile, 0.0, anchor);
    const DesignConsistentRun run =
        simulate_design_consistent(sys, spec, controller, x0, T);
    if (run.min_follower_gap <= 0.0)
      throw SimulationDiverged("collect_data: follower gap closed during collection");
    out.batch = run.to_batch(sys.layout, spec.t_s);

    // reconstruct an absolute-coordinate trajectory for inspection
    out.trajectory.t_s = spec.t_s;
    for (int k = 0; k <= T; ++k) {
      const double t = k * spec.t_s;
      const double vl = anchor + profile.distance_at(t);
      const double v_ref = profile.speed_at(t);
      std::vector<VehicleSample> row(spec.size());
      double p_pred = vl;
      int av = 0;
      for (int i = 0; i < spec.size(); ++i) {
        VehicleSample& s = row[i];
        s.h_err = run.X(3 * i, k);
        s.v_err = run.X(3 * i + 1, k);
        s.a = run.X(3 * i + 2, k);
        s.v = s.v_err + v_ref;
        s.p = p_pred - (s.h_err + spec.h_star);
        p_pred = s.p;
        if (k < T) {
          s.w = run.W(i, k);
          s.u = is_av(spec.vehicles[i]) ? run.U(av, k) : 0.0;
        }
        if (is_av(spec.vehicles[i])) ++av;
      }
      out.trajectory.times.push_back(t);
      out.trajectory.steps.push_back(std::move(row));
    }
  } else {
    const LiftingLayout layout = make_layout(spec);
    out.trajectory = integrate_high_fidelity(spec, controller, profile, initial, window);
    for (int k = 0; k < T; ++k)
      for (int i = 1; i < spec.size(); ++i)
        if (out.trajectory.steps[k][i].h_err + spec.h_star <= 0.0)
          throw SimulationDiverged("collect_data: follower gap closed during collection");

    DataBatch& b = out.batch;
    b.T = T;
    b.t_s = spec.t_s;
    b.design_consistent = false;
    b.U0.resize(layout.n_u, T);
    b.X0.resize(layout.n_x, T);
    b.X1.resize(layout.n_x, T);
    b.Z0.resize(layout.n_z, T);
    for (int k = 0; k <= T; ++k) {
      Eigen::VectorXd x(layout.n_x);
      for (int i = 0; i < spec.size(); ++i) {
        const VehicleSample& s = out.trajectory.steps[k][i];
        x.segment<3>(3 * i) << s.h_err, s.v_err, s.a;
      }
      if (k < T) {
        b.X0.col(k) = x;
        b.Z0.col(k) = lift(x, layout);
        int av = 0;
        for (int i = 0; i < spec.size(); ++i)
          if (is_av(spec.vehicles[i])) b.U0(av++, k) = out.trajectory.steps[k][i].u;
      }
      if (k > 0) b.X1.col(k - 1) = x;
    }
  }
  out.batch.validate();
  return out;
}

RichnessReport check_richness(const Eigen::MatrixXd& Z0) {
  RichnessReport r;
  r.n_z = static_cast<int>(Z0.rows());
  if (Z0.size() == 0) return r;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(Z0);
  const Eigen::VectorXd& sv = svd.singularValues();
  r.sigma_max = sv.size() ? sv(0) : 0.0;
  const double tol = std::max(Z0.rows(), Z0.cols()) *
                     std::numeric_limits<double>::epsilon() * r.sigma_max;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > tol) ++r.rank;
  r.sigma_min = sv.size() ? sv(sv.size() - 1) : 0.0;
  r.full_row_rank = r.rank == r.n_z;
  return r;
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_trajectory_csv: cannot open " + path);
  out << "t,vehicle,p,v,a,u,h_err,v_err,w\n";
  char buf[512];
  for (int k = 0; k < traj.sample_count(); ++k) {
    for (int i = 0; i < traj.vehicle_count(); ++i) {
      const VehicleSample& s = traj.steps[k][i];
      std::snprintf(buf, sizeof(buf),
                    "%.17g,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                    traj.times[k], i + 1, s.p, s.v, s.a, s.u, s.h_err, s.v_err, s.w);
      out << buf;
    }
  }
}

Trajectory read_trajectory_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_trajectory_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("t,vehicle", 0) != 0)
    throw std::runtime_error("read_trajectory_csv: bad header in " + path);
  Trajectory traj;
  double last_t = 0.0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string field;
    std::vector<double> vals;
    while (std::getline(ss, field, ',')) vals.push_back(std::stod(field));
    if (vals.size() != 9)
      throw std::runtime_error("read_trajectory_csv: malformed row in " + path);
    const double t = vals[0];
    if (traj.times.empty() || t > last_t + 1e-12) {
      traj.times.push_back(t);
      traj.steps.emplace_back();
      last_t = t;
    }
    VehicleSample s;
    s.p = vals[2];
    s.v = vals[3];
    s.a = vals[4];
    s.u = vals[5];
    s.h_err = vals[6];
    s.v_err = vals[7];
    s.w = vals[8];
    traj.steps.back().push_back(s);
  }
  if (traj.times.size() >= 2) traj.t_s = traj.times[1] - traj.times[0];
  return traj;
}

}  // namespace platoon
