#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "platoon/matrix_io.hpp"
#include "platoon/metrics.hpp"
#include "platoon/simulate.hpp"

using namespace platoon;

namespace {

VehicleParams case1_av() { return {0.2, 1.0, 2.2, 0.35, 150.0, 1500.0}; }

PlatoonSpec pure_av_platoon(int n) {
  PlatoonSpec s;
  s.vehicles.assign(n, case1_av());
  s.h_star = 20.0;
  s.v_star = 20.0;
  s.t_s = 0.05;
  return s;
}

std::vector<VehicleState> case1_initial() {
  return {{65, 20, 0}, {40, 15, 0}, {25, 18, 0}, {0, 15, 0}};
}

std::vector<double> nominal_masses(const PlatoonSpec& s) {
  std::vector<double> m;
  for (int i : s.av_indices()) m.push_back(s.av_at(i).m);
  return m;
}

std::string temp_path(const std::string& name) {
  return std::string("/tmp/platoon_datagen_") + name;
}

}  // namespace

TEST_CASE("reference profile basics") {
  SUBCASE("two-row file plus hold gives a constant 85 s profile") {
    const std::string path = temp_path("const.csv");
    std::ofstream(path) << "time_s,speed_mps\n0,20\n10,20\n";
    const ReferenceProfile cycle = load_drive_cycle(path);
    const ReferenceProfile p = cycle.with_hold(20.0, 75.0);
    CHECK(p.end_time() == doctest::Approx(85.0));
    for (double t : {0.0, 30.0, 74.9, 75.0, 80.0, 85.0})
      CHECK(p.speed_at(t) == doctest::Approx(20.0));
    CHECK(p.distance_at(75.0) == doctest::Approx(1500.0));
    CHECK(virtual_leader_position(p, 0.0) == 0.0);
    CHECK(p.constant_over(0.0, 85.0));
  }

  SUBCASE("piecewise hold-style integral") {
    const ReferenceProfile p({0.0, 10.0, 20.0}, {10.0, 20.0, 20.0},
                             ReferenceProfile::Interp::Zoh);
    CHECK(virtual_leader_position(p, 20.0) == doctest::Approx(300.0));
    CHECK(virtual_leader_position(p, 10.0) == doctest::Approx(100.0));
    CHECK(p.speed_at(9.99) == 10.0);
    CHECK(p.speed_at(10.0) == 20.0);
    CHECK_FALSE(p.constant_over(0.0, 20.0));
  }

  SUBCASE("out-of-range time is rejected") {
    const ReferenceProfile p = ReferenceProfile::constant(5.0, 10.0);
    CHECK_THROWS_AS(p.distance_at(11.0), std::out_of_range);
    CHECK_THROWS_AS(p.distance_at(-1.0), std::out_of_range);
  }
}

TEST_CASE("drive cycle loader errors") {
  SUBCASE("missing header") {
    const std::string path = temp_path("nohdr.csv");
    std::ofstream(path) << "0,20\n10,20\n";
    CHECK_THROWS_WITH_AS(load_drive_cycle(path),
                         doctest::Contains("expected header"), std::runtime_error);
  }
  SUBCASE("malformed row reports the line number") {
    const std::string path = temp_path("bad.csv");
    std::ofstream(path) << "time_s,speed_mps\n0,20\noops\n";
    CHECK_THROWS_WITH_AS(load_drive_cycle(path), doctest::Contains("line 3"),
                         std::runtime_error);
  }
  SUBCASE("non-monotonic time") {
    const std::string path = temp_path("mono.csv");
    std::ofstream(path) << "time_s,speed_mps\n0,20\n5,20\n5,21\n";
    CHECK_THROWS_WITH_AS(load_drive_cycle(path), doctest::Contains("non-monotonic"),
                         std::runtime_error);
  }
}

TEST_CASE("bundled drive cycle fixture") {
  const ReferenceProfile p = load_drive_cycle(std::string(PLATOON_DATA_DIR) +
                                              "/us06_drive_cycle.csv");
  CHECK(p.end_time() == doctest::Approx(596.0).epsilon(0.03));  // about 600 s
  CHECK(p.max_speed() * 3.6 == doctest::Approx(129.2).epsilon(0.01));
  CHECK(p.speed_at(0.0) == 0.0);
  CHECK(p.speed_at(p.end_time()) == 0.0);
}

TEST_CASE("classic follower law") {
  const PlatoonSpec spec = pure_av_platoon(2);
  const LiftingLayout layout = make_layout(spec);

  SUBCASE("commanded acceleration") {
    CHECK(acc_commanded_accel(2.0, 1.0, {0.1, 0.5}) == doctest::Approx(0.7));
    CHECK(acc_commanded_accel(0.0, 0.0, {0.23, 0.74}) == 0.0);
  }

  SUBCASE("zero error gives dither-only effort") {
    AccController ctrl(layout, {0.23, 0.74}, nominal_masses(spec), 0.05, 99);
    const Eigen::VectorXd u = ctrl.control(0, Eigen::VectorXd::Zero(6));
    for (int j = 0; j < 2; ++j) CHECK(std::abs(u(j)) <= 0.05 * 1500.0 + 1e-12);
  }

  SUBCASE("degenerate gains leave pure dither") {
    AccController ctrl(layout, {0.0, 0.0}, nominal_masses(spec), 0.05, 99);
    Eigen::VectorXd x(6);
    x << 3, -2, 1, -4, 2, 0.5;
    const Eigen::VectorXd u = ctrl.control(0, x);
    for (int j = 0; j < 2; ++j) {
      CHECK(std::abs(u(j)) <= 0.05 * 1500.0 + 1e-12);
      CHECK(u(j) != 0.0);
    }
  }

  SUBCASE("follower tracks its predecessor, leader the reference") {
    AccController ctrl(layout, {0.2, 0.5}, nominal_masses(spec), 0.0, 0);
    Eigen::VectorXd x(6);
    x << 1.0, 2.0, 0.0, 3.0, -1.0, 0.0;
    const Eigen::VectorXd u = ctrl.control(0, x);
    CHECK(u(0) == doctest::Approx(1500.0 * (0.2 * 1.0 + 0.5 * (0.0 - 2.0))));
    CHECK(u(1) == doctest::Approx(1500.0 * (0.2 * 3.0 + 0.5 * (2.0 - (-1.0)))));
  }
}

TEST_CASE("design-consistent stepping") {
  const PlatoonSpec spec = pure_av_platoon(1);
  const LiftedSystem sys = discretize(assemble_polynomial_system(spec), spec.t_s);

  SUBCASE("origin is a fixed point of the undisturbed map") {
    const Eigen::VectorXd next = step_design_consistent(
        sys, Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1));
    CHECK(next.isZero(0.0));
  }

  SUBCASE("one step matches an independently assembled map") {
    // rebuild the single-vehicle matrices entry by entry from the model
    const VehicleParams p = case1_av();
    const double R = air_resistance(p), tau = p.tau, vs = 20.0, ts = 0.05;
    Eigen::MatrixXd a_ref = Eigen::MatrixXd::Zero(3, 5);
    a_ref(0, 0) = 1.0;
    a_ref(0, 1) = -ts;
    a_ref(1, 1) = 1.0;
    a_ref(1, 2) = ts;
    a_ref(2, 1) = ts * (-2.0 * R * vs / tau);
    a_ref(2, 2) = 1.0 + ts * (-(1.0 + 2.0 * tau * R * vs) / tau);
    a_ref(2, 3) = ts * (-2.0 * R);
    a_ref(2, 4) = ts * (-R / tau);
    Eigen::Vector3d b_ref(0.0, 0.0, ts / (tau * p.m));
    Eigen::Vector3d d_ref(0.0, 0.0, ts);

    Eigen::VectorXd x(3), u(1), w(1);
    x << 0.8, -1.2, 0.4;
    u << 37.0;
    w << -1.0;
    Eigen::VectorXd z(5);
    z << x(0), x(1), x(2), x(1) * x(2), x(1) * x(1);
    const Eigen::VectorXd expect = a_ref * z + b_ref * u(0) + d_ref * w(0);
    const Eigen::VectorXd got = step_design_consistent(sys, x, u, w);
    CHECK((got - expect).lpNorm<Eigen::Infinity>() < 1e-14);
  }

  SUBCASE("affine in the disturbance") {
    Eigen::VectorXd x(3), u(1), w(1);
    x << 1.0, 0.5, -0.2;
    u << 10.0;
    w << 2.0;
    const Eigen::VectorXd a = step_design_consistent(sys, x, u, w);
    const Eigen::VectorXd b = step_design_consistent(sys, x, u, 2.0 * w);
    CHECK((b - a - sys.D * w).lpNorm<Eigen::Infinity>() < 1e-13);
  }

  CHECK_THROWS_AS(step_design_consistent(sys, Eigen::VectorXd::Zero(2),
                                         Eigen::VectorXd::Zero(1),
                                         Eigen::VectorXd::Zero(1)),
                  std::invalid_argument);
}

TEST_CASE("data collection, design-consistent mode") {
  const PlatoonSpec spec = pure_av_platoon(4);
  const LiftedSystem sys = discretize(assemble_polynomial_system(spec), spec.t_s);
  const ReferenceProfile profile = ReferenceProfile::constant(20.0, 80.0);
  AccController ctrl(sys.layout, {0.23, 0.74}, nominal_masses(spec), 0.05, 12345);

  const int T = 500;
  const CollectResult res =
      collect_data(spec, ctrl, T, CollectionMode::DesignConsistent, case1_initial(), profile);
  const DataBatch& b = res.batch;

  SUBCASE("spans 25 s of the hold at the stated sample count") {
    CHECK(b.T == 500);
    CHECK(b.T * b.t_s == doctest::Approx(25.0));
    CHECK(res.trajectory.sample_count() == 501);
  }

  SUBCASE("exact one-step identity") {
    const Eigen::MatrixXd resid = b.X1 - (sys.A * b.Z0 + sys.B * b.U0 + sys.D * b.W0);
    CHECK(resid.lpNorm<Eigen::Infinity>() <= 1e-10);
  }

  SUBCASE("columns shift by one sample") {
    for (int k = 0; k + 1 < b.T; ++k)
      CHECK((b.X1.col(k) - b.X0.col(k + 1)).lpNorm<Eigen::Infinity>() == 0.0);
  }

  SUBCASE("initial gaps follow the initial positions") {
    CHECK(res.trajectory.steps[0][1].h_err == doctest::Approx(5.0));   // gap 25
    CHECK(res.trajectory.steps[0][2].h_err == doctest::Approx(-5.0));  // gap 15
    CHECK(res.trajectory.steps[0][3].h_err == doctest::Approx(5.0));   // gap 25
    CHECK(res.trajectory.steps[0][0].h_err == doctest::Approx(0.0));   // anchored leader
  }

  SUBCASE("identical seeds reproduce the batch bit for bit") {
    AccController ctrl2(sys.layout, {0.23, 0.74}, nominal_masses(spec), 0.05, 12345);
    const CollectResult res2 = collect_data(spec, ctrl2, T, CollectionMode::DesignConsistent,
                                            case1_initial(), profile);
    CHECK((res.batch.U0 - res2.batch.U0).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK((res.batch.Z0 - res2.batch.Z0).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK((res.batch.X1 - res2.batch.X1).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(hash_matrices({&res.batch.U0, &res.batch.Z0}) ==
          hash_matrices({&res2.batch.U0, &res2.batch.Z0}));
  }

  SUBCASE("richness holds with excitation") {
    const RichnessReport r = check_richness(b.Z0);
    CHECK(r.n_z == 20);
    CHECK(r.rank == 20);
    CHECK(r.full_row_rank);
  }

  SUBCASE("non-constant reference over the window is rejected") {
    const ReferenceProfile ramp({0.0, 30.0}, {20.0, 25.0});
    AccController c3(sys.layout, {0.23, 0.74}, nominal_masses(spec), 0.05, 1);
    CHECK_THROWS_AS(collect_data(spec, c3, T, CollectionMode::DesignConsistent,
                                 case1_initial(), ramp),
                    std::invalid_argument);
  }
}

TEST_CASE("collection rejects a closing gap") {
  const PlatoonSpec spec = pure_av_platoon(2);
  const LiftingLayout layout = make_layout(spec);
  const ReferenceProfile profile = ReferenceProfile::constant(20.0, 80.0);
  // zero gains, no reaction: the faster follower must plow into its leader
  AccController ctrl(layout, {0.0, 0.0}, nominal_masses(spec), 0.0, 1);
  const std::vector<VehicleState> initial = {{2.0, 20, 0}, {0.0, 28, 0}};
  CHECK_THROWS_AS(
      collect_data(spec, ctrl, 300, CollectionMode::DesignConsistent, initial, profile),
      SimulationDiverged);
}

TEST_CASE("richness gate details") {
  SUBCASE("fewer samples than lifted rows always fails") {
    const RichnessReport r = check_richness(Eigen::MatrixXd::Random(10, 6));
    CHECK_FALSE(r.full_row_rank);
    CHECK(r.rank <= 6);
  }
  SUBCASE("an identically zero row kills the rank") {
    Eigen::MatrixXd z = Eigen::MatrixXd::Random(6, 50);
    z.row(3).setZero();
    const RichnessReport r = check_richness(z);
    CHECK_FALSE(r.full_row_rank);
    CHECK(r.rank == 5);
  }
}

TEST_CASE("high-fidelity integration") {
  SUBCASE("equilibrium is preserved") {
    const PlatoonSpec spec = pure_av_platoon(3);
    const ReferenceProfile profile = ReferenceProfile::constant(20.0, 20.0);
    Eigen::VectorXd u_eq(3);
    for (int i = 0; i < 3; ++i) u_eq(i) = av_cruise_effort(20.0, spec.av_at(i));
    ConstantController ctrl(u_eq);
    const std::vector<VehicleState> initial = {{40, 20, 0}, {20, 20, 0}, {0, 20, 0}};
    const Trajectory traj = integrate_high_fidelity(spec, ctrl, profile, initial, 10.0);
    for (int k = 0; k < traj.sample_count(); ++k)
      for (int i = 0; i < 3; ++i) {
        CHECK(std::abs(traj.steps[k][i].h_err) < 1e-9);
        CHECK(std::abs(traj.steps[k][i].v_err) < 1e-9);
      }
  }

  SUBCASE("one sampled step approaches the Euler design step at second order") {
    auto one_step_gap = [](double ts) {
      PlatoonSpec spec = pure_av_platoon(1);
      spec.t_s = ts;
      const LiftedSystem sys = discretize(assemble_polynomial_system(spec), ts);
      const ReferenceProfile profile = ReferenceProfile::constant(20.0, 10.0);
      const std::vector<VehicleState> initial = {{0.0, 18.0, 0.5}};
      Eigen::VectorXd u(1);
      u << 500.0;
      ConstantController ctrl(u);
      const Trajectory traj = integrate_high_fidelity(spec, ctrl, profile, initial, ts);
      Eigen::VectorXd x0(3), w(1);
      x0 << 0.0, -2.0, 0.5;
      w << true_disturbance(spec, 0, 0.0);
      const Eigen::VectorXd euler = step_design_consistent(sys, x0, u, w);
      Eigen::VectorXd hf(3);
      hf << traj.steps[1][0].h_err, traj.steps[1][0].v_err, traj.steps[1][0].a;
      return (hf - euler).lpNorm<Eigen::Infinity>();
    };
    const double gap_full = one_step_gap(0.05);
    const double gap_half = one_step_gap(0.025);
    CHECK(gap_full > 0.0);
    CHECK(gap_full / gap_half == doctest::Approx(4.0).epsilon(0.25));
  }

  SUBCASE("divergence is detected and reported") {
    const PlatoonSpec spec = pure_av_platoon(1);
    const ReferenceProfile profile = ReferenceProfile::constant(20.0, 1000.0);
    Eigen::VectorXd u(1);
    u << 1e9;  // absurd sustained effort
    ConstantController ctrl(u);
    CHECK_THROWS_AS(integrate_high_fidelity(spec, ctrl, profile, {{0, 20, 0}}, 900.0),
                    SimulationDiverged);
  }
}

TEST_CASE("data collection, high-fidelity mode") {
  const PlatoonSpec spec = pure_av_platoon(2);
  const ReferenceProfile profile = ReferenceProfile::constant(20.0, 40.0);
  AccController ctrl(make_layout(spec), {0.23, 0.74}, nominal_masses(spec), 0.05, 5);
  const CollectResult res = collect_data(spec, ctrl, 300, CollectionMode::HighFidelity,
                                         {{25, 19, 0}, {0, 21, 0}}, profile);
  CHECK(res.batch.T == 300);
  CHECK_FALSE(res.batch.design_consistent);
  CHECK(res.batch.W0.size() == 0);
  for (int k = 0; k + 1 < res.batch.T; ++k)
    CHECK((res.batch.X1.col(k) - res.batch.X0.col(k + 1)).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(check_richness(res.batch.Z0).full_row_rank);
}

TEST_CASE("trajectory csv round trip") {
  const PlatoonSpec spec = pure_av_platoon(2);
  const ReferenceProfile profile = ReferenceProfile::constant(20.0, 10.0);
  AccController ctrl(make_layout(spec), {0.23, 0.74}, nominal_masses(spec), 0.05, 5);
  const CollectResult res = collect_data(spec, ctrl, 50, CollectionMode::DesignConsistent,
                                         {{25, 19, 0}, {0, 21, 0}}, profile);
  const std::string path = temp_path("traj.csv");
  write_trajectory_csv(res.trajectory, path);
  const Trajectory back = read_trajectory_csv(path);
  REQUIRE(back.sample_count() == res.trajectory.sample_count());
  REQUIRE(back.vehicle_count() == 2);
  for (int k = 0; k < back.sample_count(); ++k)
    for (int i = 0; i < 2; ++i) {
      CHECK(back.steps[k][i].p == res.trajectory.steps[k][i].p);
      CHECK(back.steps[k][i].v == res.trajectory.steps[k][i].v);
      CHECK(back.steps[k][i].u == res.trajectory.steps[k][i].u);
      CHECK(back.steps[k][i].h_err == res.trajectory.steps[k][i].h_err);
    }
}

TEST_CASE("metrics on synthetic signals") {
  const PlatoonSpec spec = pure_av_platoon(2);
  Trajectory traj;
  traj.t_s = 0.1;
  const double amp = 1.5;
  for (int k = 0; k <= 1000; ++k) {
    const double t = 0.1 * k;
    traj.times.push_back(t);
    std::vector<VehicleSample> row(2);
    row[0] = {};  // leader pinned to the reference
    row[1].v_err = amp * std::sin(2.0 * M_PI * t / 10.0);
    row[1].h_err = 0.0;
    traj.steps.push_back(row);
  }
  const MetricsReport m = compute_metrics(traj, spec, 0.0, 100.0);
  CHECK(m.rms_velocity_dev[0] == doctest::Approx(0.0));
  // whole periods of a sinusoid: rms = amplitude / sqrt(2)
  CHECK(m.rms_velocity_dev[1] == doctest::Approx(amp / std::sqrt(2.0)).epsilon(1e-3));
  CHECK(m.min_gap == doctest::Approx(spec.h_star));
  CHECK_THROWS_AS(compute_metrics(traj, spec, 200.0, 300.0), std::invalid_argument);
}

TEST_CASE("data batch json round trip") {
  const PlatoonSpec spec = pure_av_platoon(2);
  const ReferenceProfile profile = ReferenceProfile::constant(20.0, 10.0);
  AccController ctrl(make_layout(spec), {0.23, 0.74}, nominal_masses(spec), 0.05, 5);
  const CollectResult res = collect_data(spec, ctrl, 40, CollectionMode::DesignConsistent,
                                         {{25, 19, 0}, {0, 21, 0}}, profile);
  const std::string path = temp_path("batch.json");
  save_data_batch(path, res.batch);
  const DataBatch back = load_data_batch(path);
  CHECK(back.T == res.batch.T);
  CHECK(back.design_consistent);
  CHECK((back.U0 - res.batch.U0).lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK((back.Z0 - res.batch.Z0).lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK((back.W0 - res.batch.W0).lpNorm<Eigen::Infinity>() < 1e-12);
}
