#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "lander/dynamics.hpp"
#include "lander/seeker.hpp"

using namespace lander;

TEST_CASE("measure_unlagged: boresight on LOS gives zero gimbal angles") {
  const Eigen::Vector3d r_tl(120.0, -80.0, -300.0);
  const Quaternion q0 = initial_platform(r_tl);
  const SeekerMeasurement m =
      measure_unlagged(r_tl, Eigen::Vector3d::Zero(), q0);
  CHECK(std::abs(m.theta_u) < 1e-9);
  CHECK(std::abs(m.theta_v) < 1e-9);
  CHECK(m.range == doctest::Approx(r_tl.norm()));
}

TEST_CASE("measure_unlagged: range is the Euclidean norm") {
  const SeekerMeasurement m = measure_unlagged(
      Eigen::Vector3d(300.0, 400.0, 0.0), Eigen::Vector3d::Zero(),
      Quaternion::identity());
  CHECK(m.range == doctest::Approx(500.0));
}

TEST_CASE("measure_unlagged: closing speed for a vertical descent") {
  // DLS 100 m below, lander descending at 10 m/s: the target-relative
  // velocity is +10 m/s along z and the geometry closes at 10 m/s.
  const Eigen::Vector3d r_tl(0.0, 0.0, -100.0);
  const Eigen::Vector3d v_tl(0.0, 0.0, 10.0);
  const SeekerMeasurement m =
      measure_unlagged(r_tl, v_tl, Quaternion::identity());
  CHECK(m.v_c == doctest::Approx(10.0));
}

TEST_CASE("measure_unlagged: known off-boresight angle") {
  // Platform w-axis along +z (identity platform), target 30 degrees off
  // boresight in the u-z plane.
  const double s = std::sin(deg2rad(30.0));
  const double c = std::cos(deg2rad(30.0));
  const Eigen::Vector3d r_tl = 1000.0 * Eigen::Vector3d(s, 0.0, c);
  const SeekerMeasurement m =
      measure_unlagged(r_tl, Eigen::Vector3d::Zero(), Quaternion::identity());
  CHECK(rad2deg(m.theta_u) == doctest::Approx(30.0).epsilon(1e-9));
  CHECK(std::abs(m.theta_v) < 1e-12);
}

TEST_CASE("measure_unlagged: degenerate range holds zeros") {
  const SeekerMeasurement m = measure_unlagged(
      Eigen::Vector3d::Constant(1e-9), Eigen::Vector3d(1.0, 2.0, 3.0),
      Quaternion::identity());
  CHECK(m.theta_u == 0.0);
  CHECK(m.theta_v == 0.0);
  CHECK(m.range == 0.0);
  CHECK(m.v_c == 0.0);
}

TEST_CASE("platform_reset: aligned platform is unchanged") {
  const Eigen::Vector3d r_tl(50.0, 75.0, -400.0);
  const Quaternion q0 = initial_platform(r_tl);
  const Quaternion q1 = platform_reset(r_tl, q0);
  const double err = std::min((q1.vec() - q0.vec()).norm(),
                              (q1.vec() + q0.vec()).norm());
  CHECK(err < 1e-9);
}

TEST_CASE("platform_reset: zeroes the un-lagged gimbal angles") {
  std::mt19937_64 gen(31);
  std::uniform_real_distribution<double> u(-500.0, 500.0);
  for (int i = 0; i < 100; ++i) {
    const Eigen::Vector3d r_tl(u(gen), u(gen), u(gen) - 600.0);
    Quaternion q0 = Quaternion::from_axis_angle(
        Eigen::Vector3d(u(gen), u(gen), u(gen)).normalized(), 0.01 * u(gen));
    const Quaternion q1 = platform_reset(r_tl, q0);
    const SeekerMeasurement m =
        measure_unlagged(r_tl, Eigen::Vector3d::Zero(), q1);
    CHECK(std::abs(m.theta_u) < 1e-9);
    CHECK(std::abs(m.theta_v) < 1e-9);
  }
}

TEST_CASE("platform_reset: minimal rotation from the prior attitude") {
  // The correction must be the shortest arc from the old w-axis to the
  // LOS: its rotation angle equals the angle between them.
  const Eigen::Vector3d r_tl(100.0, 0.0, 100.0);
  const Quaternion q0 = Quaternion::identity();  // w-axis = +z
  const Quaternion q1 = platform_reset(r_tl, q0);
  const Quaternion corr = qsub(q1, q0);
  const double angle = 2.0 * std::acos(std::min(1.0, std::abs(corr.q0)));
  CHECK(rad2deg(angle) == doctest::Approx(45.0).epsilon(1e-9));
}

TEST_CASE("platform_reset: degenerate LOS keeps the prior attitude") {
  const Quaternion q0 =
      Quaternion::from_axis_angle(Eigen::Vector3d::UnitX(), 0.4);
  const Quaternion q1 = platform_reset(Eigen::Vector3d::Zero(), q0);
  CHECK((q1.vec() - q0.vec()).norm() == 0.0);
}

TEST_CASE("seeker lag: converges to a static scene within 5 time constants") {
  // Drive the lag states through the physics stepper with a frozen
  // platform and static relative geometry approximation: lander far away,
  // zero velocity, zero thrust, no gravity influence on the lag itself.
  JointState s;
  s.lander.r_l = Eigen::Vector3d(0.0, 0.0, 1000.0);
  s.lander.v_l = Eigen::Vector3d::Zero();
  StepContext ctx;
  ctx.thrust_cmd = Eigen::Vector4d::Zero();
  ctx.r_target = Eigen::Vector3d::Zero();
  ctx.platform_q0 = Quaternion::identity();
  // Lag starts at zero; un-lagged range is ~1000 m (slowly growing as the
  // lander falls, so compare against the instantaneous value).
  for (int i = 0; i < 5; ++i) s = step_physics(s, ctx);  // 1 s = 5 tau
  const Eigen::Vector3d r_tl = ctx.r_target - s.lander.r_l;
  CHECK(std::abs(s.seeker.range - r_tl.norm()) / r_tl.norm() < 0.01);
}

TEST_CASE("seeker lag: first-order step response through the stepper") {
  // theta_u steps from 0 toward a constant un-lagged 10 degrees; after one
  // time constant (0.2 s) the lag reaches ~63.2% of the step.
  JointState s;
  // Geometry chosen so the un-lagged theta_u is 10 degrees and nearly
  // constant over 0.2 s: distant target, stationary lander.
  const double su = std::sin(deg2rad(10.0));
  const double cu = std::cos(deg2rad(10.0));
  s.lander.r_l = -1.0e6 * Eigen::Vector3d(su, 0.0, cu);
  StepContext ctx;
  ctx.thrust_cmd = Eigen::Vector4d::Zero();
  ctx.platform_q0 = Quaternion::identity();
  s = step_physics(s, ctx);  // one nav step = one time constant
  const double expected = 10.0 * (1.0 - std::exp(-1.0));
  CHECK(rad2deg(s.seeker.theta_u) == doctest::Approx(expected).epsilon(5e-3));
}

TEST_CASE("altitude_mode_measure: direct definition") {
  const AltitudeMeasurement a = altitude_mode_measure(
      Eigen::Vector3d(3.0, -2.0, 5.0), Eigen::Vector3d(0.5, 0.1, -1.0), 0.0);
  CHECK(a.h == doctest::Approx(5.0));
  CHECK(a.h_dot == doctest::Approx(-1.0));

  const AltitudeMeasurement at_dls = altitude_mode_measure(
      Eigen::Vector3d(0.0, 0.0, 12.0), Eigen::Vector3d::Zero(), 12.0);
  CHECK(at_dls.h == 0.0);
  CHECK(at_dls.h_dot == 0.0);
}

TEST_CASE("frozen seeker: lag states hold in the landing segment") {
  JointState s;
  s.lander.r_l = Eigen::Vector3d(2.0, 1.0, 4.0);
  s.lander.v_l = Eigen::Vector3d(0.0, 0.0, -1.0);
  s.seeker.theta_u = 0.05;
  s.seeker.theta_v = -0.03;
  s.seeker.range = 4.5;
  s.seeker.v_c = 1.2;
  StepContext ctx;
  ctx.thrust_cmd = Eigen::Vector4d::Zero();
  ctx.seeker_frozen = true;
  const JointState out = step_physics(s, ctx);
  CHECK(out.seeker.theta_u == doctest::Approx(0.05));
  CHECK(out.seeker.theta_v == doctest::Approx(-0.03));
  CHECK(out.seeker.range == doctest::Approx(4.5));
  CHECK(out.seeker.v_c == doctest::Approx(1.2));
}
