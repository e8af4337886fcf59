#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "platoon/disturbance.hpp"
#include "platoon/lifted_system.hpp"
#include "platoon/rng.hpp"

using namespace platoon;

namespace {

VehicleParams case1_av() { return {0.2, 1.0, 2.2, 0.35, 150.0, 1500.0}; }
HvParams case2_hv() { return {0.2, 0.4, 0.7, 5.0, 50.0, 40.0}; }

PlatoonSpec pure_av_platoon(int n) {
  PlatoonSpec s;
  s.vehicles.assign(n, case1_av());
  s.h_star = 20.0;
  s.v_star = 20.0;
  s.t_s = 0.05;
  return s;
}

PlatoonSpec mixed_platoon() {
  PlatoonSpec s;
  s.vehicles = {VehicleModel{case1_av()}, VehicleModel{case2_hv()},
                VehicleModel{case1_av()}};
  s.h_star = 20.0;
  s.v_star = 20.0;
  s.t_s = 0.05;
  return s;
}

}  // namespace

TEST_CASE("air resistance") {
  CHECK(air_resistance(case1_av()) == doctest::Approx(2.5666666666666665e-4).epsilon(1e-14));
  CHECK(air_resistance({1.0, 2.0, 1.0, 1.0, 1.0, 1.0}) == doctest::Approx(1.0));

  // doubling the mass halves R
  Rng rng(7);
  for (int i = 0; i < 20; ++i) {
    VehicleParams p{rng.uniform(0.1, 1.0), rng.uniform(0.5, 2.0), rng.uniform(1.0, 4.0),
                    rng.uniform(0.2, 0.6), rng.uniform(50, 300), rng.uniform(800, 3000)};
    VehicleParams heavy = p;
    heavy.m *= 2.0;
    CHECK(air_resistance(heavy) == doctest::Approx(0.5 * air_resistance(p)).epsilon(1e-14));
  }

  VehicleParams bad = case1_av();
  bad.sigma = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("av derivative") {
  const VehicleParams p = case1_av();

  SUBCASE("at rest the mechanical drag is cancelled by u = d") {
    const VehicleState d = av_derivative({0, 0, 0}, p, p.d);
    CHECK(d.p == 0.0);
    CHECK(d.v == 0.0);
    CHECK(d.a == doctest::Approx(0.0).epsilon(1e-15));
  }

  SUBCASE("zero acceleration leaves only the drag terms") {
    const VehicleState d = av_derivative({0, 20.0, 0}, p, 0.0);
    CHECK(d.a == doctest::Approx(-1.0133333333333332).epsilon(1e-13));
  }

  SUBCASE("hand-evaluated jerk at v = 20, a = 1") {
    const VehicleState d = av_derivative({0, 20, 1}, p, 0.0);
    CHECK(d.a == doctest::Approx(-6.0236).epsilon(1e-13));
    CHECK(d.p == 20.0);
    CHECK(d.v == 1.0);
  }

  SUBCASE("cruise equilibrium produces zero jerk") {
    const double u = av_cruise_effort(20.0, p);
    const VehicleState d = av_derivative({123.0, 20.0, 0.0}, p, u);
    CHECK(d.a == doctest::Approx(0.0).epsilon(1e-15));
  }
}

TEST_CASE("range policy") {
  const HvParams p = case2_hv();
  CHECK(range_policy(p.h_s, p) == 0.0);
  CHECK(range_policy(p.h_g, p) == doctest::Approx(p.v_max));
  CHECK(range_policy(1.0, p) == 0.0);
  CHECK(range_policy(80.0, p) == p.v_max);
  CHECK(range_policy(27.5, p) == doctest::Approx(20.0).epsilon(1e-12));

  SUBCASE("continuous at both joints") {
    for (double eps : {1e-3, 1e-6, 1e-9}) {
      CHECK(std::abs(range_policy(p.h_s + eps, p) - range_policy(p.h_s, p)) < 1e-2);
      CHECK(std::abs(range_policy(p.h_g - eps, p) - range_policy(p.h_g, p)) < 1e-2);
    }
    CHECK(std::abs(range_policy(p.h_s + 1e-9, p)) < 1e-15);
  }

  SUBCASE("nondecreasing and bounded") {
    double prev = -1.0;
    for (double h = 0.0; h <= 2.0 * p.h_g; h += 0.05) {
      const double v = range_policy(h, p);
      CHECK(v >= prev - 1e-12);
      CHECK(v >= 0.0);
      CHECK(v <= p.v_max + 1e-12);
      prev = v;
    }
  }
}

TEST_CASE("hv derivative") {
  const HvParams p = case2_hv();

  SUBCASE("free-flow equilibrium") {
    const VehicleState d = hv_derivative({0, p.v_max, 0}, {100.0, p.v_max, 0}, p);
    CHECK(d.p == doctest::Approx(0.0));
    CHECK(d.v == 0.0);
    CHECK(d.a == doctest::Approx(0.0).epsilon(1e-15));
  }

  SUBCASE("standstill equilibrium") {
    const VehicleState d = hv_derivative({0, 0, 0}, {3.0, 0, 0}, p);
    CHECK(d.p == 0.0);
    CHECK(d.a == doctest::Approx(0.0).epsilon(1e-15));
  }

  SUBCASE("mid-range hand evaluation") {
    const VehicleState d = hv_derivative({0, 15, 0}, {27.5, 20, 0}, p);
    CHECK(d.p == doctest::Approx(5.0));
    CHECK(d.a == doctest::Approx(3.0 / 0.7).epsilon(1e-12));
  }
}

TEST_CASE("av error blocks") {
  const AvErrorBlocks b = build_av_error_blocks(case1_av(), 20.0);
  CHECK(b.A(0, 1) == -1.0);
  CHECK(b.C(0, 1) == 1.0);
  CHECK(b.A(2, 2) == doctest::Approx(-5.0102666666666655).epsilon(1e-13));
  CHECK(b.A(2, 1) == doctest::Approx(-0.051333333333333335).epsilon(1e-13));
  CHECK(b.B(2) == doctest::Approx(0.0033333333333333335).epsilon(1e-14));
  CHECK(b.E(2, 0) == doctest::Approx(-0.0005133333333333333).epsilon(1e-13));
  CHECK(b.E(2, 1) == doctest::Approx(-0.0012833333333333332).epsilon(1e-13));
  CHECK(b.D(2) == 1.0);
  CHECK(b.E.topRows(2).isZero(0.0));
}

TEST_CASE("hv error blocks") {
  const HvErrorBlocks b = build_hv_error_blocks(case2_hv());
  CHECK(b.A(2, 1) == doctest::Approx(-0.8571428571428573).epsilon(1e-13));
  CHECK(b.C(2, 1) == doctest::Approx(0.5714285714285715).epsilon(1e-13));
  CHECK(b.C(0, 1) == 1.0);
  CHECK(b.D(2) == 1.0);

  // vanishing-gain limit: bottom row tends to [0, 0, -1/tau]
  HvParams small = case2_hv();
  small.alpha = small.beta = 1e-12;
  const HvErrorBlocks bs = build_hv_error_blocks(small);
  CHECK(bs.A(2, 1) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(bs.A(2, 2) == doctest::Approx(-1.0 / 0.7).epsilon(1e-12));
  CHECK(bs.C(2, 1) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("polynomial system assembly") {
  SUBCASE("single AV") {
    const LiftedSystem sys = assemble_polynomial_system(pure_av_platoon(1));
    CHECK(sys.A_c.rows() == 3);
    CHECK(sys.A_c.cols() == 5);
    CHECK(sys.layout.n_z == 5);
    CHECK(sys.layout.monomial_offset[0] == 3);
  }

  SUBCASE("four AVs") {
    const LiftedSystem sys = assemble_polynomial_system(pure_av_platoon(4));
    CHECK(sys.layout.n_x == 12);
    CHECK(sys.layout.n_u == 4);
    CHECK(sys.layout.n_w == 4);
    CHECK(sys.layout.n_z == 20);
    CHECK(sys.A_c(3, 1) == 1.0);   // follower spacing row sees predecessor speed
    CHECK(sys.A_c(0, 1) == -1.0);  // leader couples to no predecessor
    CHECK(sys.B_c(2, 0) != 0.0);
    CHECK(sys.B_c(2, 1) == 0.0);
    CHECK(sys.D_c(5, 1) == 1.0);
  }

  SUBCASE("mixed platoon dims and layout") {
    const LiftedSystem sys = assemble_polynomial_system(mixed_platoon());
    CHECK(sys.layout.n_x == 9);
    CHECK(sys.layout.n_u == 2);
    CHECK(sys.layout.n_w == 3);
    CHECK(sys.layout.n_z == 13);
    CHECK(sys.layout.monomial_offset[0] == 9);
    CHECK(sys.layout.monomial_offset[1] == -1);
    CHECK(sys.layout.monomial_offset[2] == 11);
    CHECK(sys.B_c.cols() == 2);
    CHECK(sys.A_c(5, 1) == doctest::Approx(0.4 / 0.7));  // HV relative-speed coupling
  }

  SUBCASE("human-driven leader is rejected") {
    PlatoonSpec bad = mixed_platoon();
    std::swap(bad.vehicles[0], bad.vehicles[1]);
    CHECK_THROWS_AS(assemble_polynomial_system(bad), std::invalid_argument);
  }
}

TEST_CASE("discretization") {
  const PlatoonSpec spec = pure_av_platoon(2);
  const LiftedSystem cont = assemble_polynomial_system(spec);
  const LiftedSystem sys = discretize(cont, 0.05);

  CHECK(sys.A(0, 1) == doctest::Approx(-0.05).epsilon(1e-15));
  CHECK(sys.A(0, 0) == 1.0);
  CHECK(sys.B.isApprox(0.05 * cont.B_c));
  CHECK(sys.D.isApprox(0.05 * cont.D_c));

  SUBCASE("A - t_s A_c recovers the identity pad to machine precision") {
    Eigen::MatrixXd pad = sys.A - 0.05 * sys.A_c;
    Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(6, 10);
    expect.leftCols(6) = Eigen::MatrixXd::Identity(6, 6);
    CHECK((pad - expect).lpNorm<Eigen::Infinity>() < 1e-15);
  }

  SUBCASE("vanishing sample time limit") {
    const LiftedSystem tiny = discretize(cont, 1e-12);
    Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(6, 10);
    expect.leftCols(6) = Eigen::MatrixXd::Identity(6, 6);
    CHECK((tiny.A - expect).lpNorm<Eigen::Infinity>() < 1e-10);
    CHECK(tiny.B.lpNorm<Eigen::Infinity>() < 1e-10);
  }

  CHECK_THROWS_AS(discretize(cont, 0.0), std::invalid_argument);
}

TEST_CASE("lifting") {
  const LiftingLayout single = make_layout(pure_av_platoon(1));

  CHECK(lift(Eigen::VectorXd::Zero(3), single).isZero(0.0));

  Eigen::VectorXd x(3);
  x << 1.0, 2.0, 3.0;
  const Eigen::VectorXd z = lift(x, single);
  CHECK(z.size() == 5);
  CHECK(z(0) == 1.0);
  CHECK(z(1) == 2.0);
  CHECK(z(2) == 3.0);
  CHECK(z(3) == 6.0);
  CHECK(z(4) == 4.0);

  SUBCASE("mixed platoon: HV contributes no monomials") {
    const LiftingLayout layout = make_layout(mixed_platoon());
    Eigen::VectorXd xm = Eigen::VectorXd::LinSpaced(9, 1.0, 9.0);
    const Eigen::VectorXd zm = lift(xm, layout);
    CHECK(zm.size() == 13);
    CHECK(zm.head(9) == xm);
    CHECK(zm(9) == xm(1) * xm(2));
    CHECK(zm(10) == xm(1) * xm(1));
    CHECK(zm(11) == xm(7) * xm(8));
    CHECK(zm(12) == xm(7) * xm(7));
  }

  SUBCASE("leading entries always replicate the state") {
    Rng rng(3);
    const LiftingLayout layout = make_layout(pure_av_platoon(3));
    for (int trial = 0; trial < 20; ++trial) {
      Eigen::VectorXd x9(9);
      for (int i = 0; i < 9; ++i) x9(i) = rng.uniform(-5.0, 5.0);
      CHECK(lift(x9, layout).head(9) == x9);
    }
  }

  SUBCASE("monomials vanish superlinearly near the origin") {
    Rng rng(11);
    const LiftingLayout layout = make_layout(pure_av_platoon(2));
    Eigen::VectorXd u(6);
    for (int i = 0; i < 6; ++i) u(i) = rng.uniform(-1.0, 1.0);
    u.normalize();
    double prev_ratio = -1.0;
    for (double t : {1e-2, 5e-3, 2.5e-3}) {
      const Eigen::VectorXd zt = lift(t * u, layout);
      const double ratio = zt.tail(layout.n_z - layout.n_x).norm() / (t * u).norm();
      if (prev_ratio > 0.0) CHECK(ratio == doctest::Approx(prev_ratio / 2).epsilon(1e-9));
      prev_ratio = ratio;
    }
  }

  CHECK_THROWS_AS(lift(Eigen::VectorXd::Zero(4), single), std::invalid_argument);
}

TEST_CASE("disturbance bound") {
  SUBCASE("zero-width box reproduces the direct formula") {
    const PlatoonSpec spec = pure_av_platoon(1);
    const DisturbanceBound b = disturbance_bound(ParamBox::relative(spec, 0.0), spec);
    CHECK(b.delta == doctest::Approx(1.0133333333333334).epsilon(1e-13));
  }

  SUBCASE("ten-percent box value") {
    const PlatoonSpec spec = pure_av_platoon(1);
    const DisturbanceBound b = disturbance_bound(ParamBox::relative(spec, 0.10), spec);
    CHECK(b.delta == doctest::Approx(1.7099743941472338).epsilon(1e-12));
  }

  SUBCASE("widening any upper bound never decreases the bound") {
    const PlatoonSpec spec = pure_av_platoon(1);
    const ParamBox base = ParamBox::relative(spec, 0.05);
    const double delta0 = disturbance_bound(base, spec).delta;
    for (int which = 0; which < 4; ++which) {
      ParamBox wide = base;
      auto& hi = std::get<VehicleParamBounds>(wide.bounds[0]).hi;
      if (which == 0) hi.m *= 1.2;
      if (which == 1) hi.d *= 1.2;
      if (which == 2) hi.sigma *= 1.2;
      if (which == 3) hi.c *= 1.2;
      CHECK(disturbance_bound(wide, spec).delta >= delta0 - 1e-15);
    }
  }

  SUBCASE("human-driven vehicle bound") {
    const PlatoonSpec spec = mixed_platoon();
    const DisturbanceBound b = disturbance_bound(ParamBox::relative(spec, 0.0), spec);
    CHECK(b.per_vehicle[1] == doctest::Approx(5.714285714285714).epsilon(1e-13));
    CHECK(b.delta == doctest::Approx(5.714285714285714).epsilon(1e-13));
  }

  SUBCASE("empty platoon is rejected") {
    PlatoonSpec empty;
    CHECK_THROWS(disturbance_bound(ParamBox{}, empty));
  }
}

TEST_CASE("true disturbance") {
  SUBCASE("AV constant value") {
    const PlatoonSpec spec = pure_av_platoon(1);
    CHECK(true_disturbance(spec, 0, 0.0) ==
          doctest::Approx(-1.0133333333333334).epsilon(1e-13));
    CHECK(true_disturbance(spec, 0, 5.0) == true_disturbance(spec, 0, -5.0));
  }

  SUBCASE("HV vanishes where the desired speed matches the reference") {
    const PlatoonSpec spec = mixed_platoon();
    CHECK(true_disturbance(spec, 1, 27.5 - spec.h_star) ==
          doctest::Approx(0.0).epsilon(1e-12));
  }

  SUBCASE("bounded by the interval bound over the reachable gap range") {
    const PlatoonSpec spec = mixed_platoon();
    const DisturbanceBound b = disturbance_bound(ParamBox::relative(spec, 0.0), spec);
    for (int i = 0; i < spec.size(); ++i) {
      for (double h = 0.0; h <= 100.0; h += 0.25)
        CHECK(std::abs(true_disturbance(spec, i, h - spec.h_star)) <=
              b.per_vehicle[i] + 1e-12);
    }
  }
}
