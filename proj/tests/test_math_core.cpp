#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "lander/math_core.hpp"

using namespace lander;

namespace {

Quaternion random_unit_quat(std::mt19937_64& gen) {
  std::normal_distribution<double> n(0.0, 1.0);
  Quaternion q{n(gen), n(gen), n(gen), n(gen)};
  return q.normalized();
}

}  // namespace

TEST_CASE("quat_to_dcm: identity quaternion gives identity matrix") {
  const Eigen::Matrix3d c = quat_to_dcm(Quaternion::identity());
  CHECK((c - Eigen::Matrix3d::Identity()).norm() == doctest::Approx(0.0));
}

TEST_CASE("quat_to_dcm: 90 degrees about z maps inertial x to body -y") {
  const Quaternion q =
      Quaternion::from_axis_angle(Eigen::Vector3d::UnitZ(), M_PI / 2.0);
  const Eigen::Matrix3d c = quat_to_dcm(q);
  const Eigen::Vector3d xb = c * Eigen::Vector3d::UnitX();
  CHECK(xb.x() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(xb.y() == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(xb.z() == doctest::Approx(0.0).epsilon(1e-12));
  // Round trip through the transpose recovers the input exactly.
  const Eigen::Vector3d x = Eigen::Vector3d::UnitX();
  CHECK(((c.transpose() * (c * x)) - x).norm() < 1e-14);
}

TEST_CASE("quat_to_dcm: random unit quaternions give orthonormal matrices") {
  std::mt19937_64 gen(11);
  for (int i = 0; i < 200; ++i) {
    const Quaternion q = random_unit_quat(gen);
    const Eigen::Matrix3d c = quat_to_dcm(q);
    CHECK((c * c.transpose() - Eigen::Matrix3d::Identity()).norm() < 1e-12);
    CHECK(c.determinant() == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("quat_to_dcm: non-finite components are rejected") {
  Quaternion q;
  q.q1 = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS(quat_to_dcm(q));
}

TEST_CASE("quat_deriv: zero rate at zero angular velocity") {
  std::mt19937_64 gen(12);
  const Quaternion q = random_unit_quat(gen);
  CHECK(quat_deriv(q, Eigen::Vector3d::Zero()).norm() == 0.0);
}

TEST_CASE("quat_deriv: identity quaternion gives half-omega rate") {
  const Eigen::Vector3d w(0.3, -0.4, 0.5);
  const Eigen::Vector4d dq = quat_deriv(Quaternion::identity(), w);
  CHECK(dq[0] == doctest::Approx(0.0));
  CHECK(dq[1] == doctest::Approx(w[0] / 2.0));
  CHECK(dq[2] == doctest::Approx(w[1] / 2.0));
  CHECK(dq[3] == doctest::Approx(w[2] / 2.0));
}

TEST_CASE("quat_deriv: norm-preserving (q dot qdot = 0)") {
  std::mt19937_64 gen(13);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 100; ++i) {
    const Quaternion q = random_unit_quat(gen);
    const Eigen::Vector3d w(u(gen), u(gen), u(gen));
    CHECK(std::abs(q.vec().dot(quat_deriv(q, w))) < 1e-12);
  }
}

TEST_CASE("qsub: self-difference is identity") {
  std::mt19937_64 gen(14);
  const Quaternion q = random_unit_quat(gen);
  const Quaternion d = qsub(q, q);
  CHECK(d.q0 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(d.q1) < 1e-12);
  CHECK(std::abs(d.q2) < 1e-12);
  CHECK(std::abs(d.q3) < 1e-12);
}

TEST_CASE("qsub: identity right operand returns the canonicalized input") {
  const Quaternion qa =
      Quaternion::from_axis_angle(Eigen::Vector3d::UnitX(), 0.7);
  const Quaternion d = qsub(qa, Quaternion::identity());
  CHECK(d.q0 == doctest::Approx(qa.q0));
  CHECK(d.q1 == doctest::Approx(qa.q1));
  // Negated input canonicalizes back to a positive scalar part.
  const Quaternion neg{-qa.q0, -qa.q1, -qa.q2, -qa.q3};
  const Quaternion d2 = qsub(neg, Quaternion::identity());
  CHECK(d2.q0 == doctest::Approx(qa.q0));
  CHECK(d2.q1 == doctest::Approx(qa.q1));
}

TEST_CASE("qsub: 90deg about x minus 45deg about x is 45deg about x") {
  const Quaternion qa =
      Quaternion::from_axis_angle(Eigen::Vector3d::UnitX(), M_PI / 2.0);
  const Quaternion qb =
      Quaternion::from_axis_angle(Eigen::Vector3d::UnitX(), M_PI / 4.0);
  const Quaternion expect =
      Quaternion::from_axis_angle(Eigen::Vector3d::UnitX(), M_PI / 4.0);
  const Quaternion d = qsub(qa, qb);
  CHECK((d.vec() - expect.vec()).norm() < 1e-12);
}

TEST_CASE("qsub: composition with qb recovers qa") {
  std::mt19937_64 gen(15);
  for (int i = 0; i < 100; ++i) {
    const Quaternion qa = random_unit_quat(gen);
    const Quaternion qb = random_unit_quat(gen);
    const Quaternion rec = qmul(qsub(qa, qb), qb);
    const double err = std::min((rec.vec() - qa.vec()).norm(),
                                (rec.vec() + qa.vec()).norm());
    CHECK(err < 1e-9);
  }
}

TEST_CASE("to_euler321: identity and pure pitch") {
  const Euler321 e0 = to_euler321(Quaternion::identity());
  CHECK(e0.yaw == doctest::Approx(0.0));
  CHECK(e0.pitch == doctest::Approx(0.0));
  CHECK(e0.roll == doctest::Approx(0.0));

  const Quaternion qy =
      Quaternion::from_axis_angle(Eigen::Vector3d::UnitY(), deg2rad(30.0));
  const Euler321 e = to_euler321(qy);
  CHECK(rad2deg(e.pitch) == doctest::Approx(30.0).epsilon(1e-9));
  CHECK(std::abs(e.yaw) < 1e-12);
  CHECK(std::abs(e.roll) < 1e-12);
}

TEST_CASE("to_euler321: round trip away from gimbal lock") {
  std::mt19937_64 gen(16);
  std::uniform_real_distribution<double> yaw(-M_PI + 1e-3, M_PI - 1e-3);
  std::uniform_real_distribution<double> pitch(-deg2rad(85.0), deg2rad(85.0));
  for (int i = 0; i < 300; ++i) {
    Euler321 e{yaw(gen), pitch(gen), yaw(gen)};
    const Euler321 e2 = to_euler321(from_euler321(e));
    CHECK(std::abs(e2.yaw - e.yaw) < 1e-9);
    CHECK(std::abs(e2.pitch - e.pitch) < 1e-9);
    CHECK(std::abs(e2.roll - e.roll) < 1e-9);
  }
}

TEST_CASE("to_euler321: gimbal lock sets roll to zero") {
  const Quaternion q = from_euler321({0.4, M_PI / 2.0, 0.3});
  const Euler321 e = to_euler321(q);
  CHECK(e.roll == 0.0);
  CHECK(e.pitch == doctest::Approx(M_PI / 2.0).epsilon(1e-9));
  // The lost degree of freedom folds into yaw; rebuilding the quaternion
  // must reproduce the same rotation.
  const Quaternion q2 = from_euler321(e);
  const double err = std::min((q2.vec() - q.vec()).norm(),
                              (q2.vec() + q.vec()).norm());
  CHECK(err < 1e-9);
}

TEST_CASE("from_euler321 closes with quat_to_dcm") {
  // A 3-2-1 sequence applied as successive single-axis rotations must give
  // the same DCM as the composed quaternion.
  const Euler321 e{0.3, -0.5, 0.8};
  const Eigen::Matrix3d c = quat_to_dcm(from_euler321(e));
  const Eigen::Matrix3d cx =
      quat_to_dcm(Quaternion::from_axis_angle(Eigen::Vector3d::UnitX(), e.roll));
  const Eigen::Matrix3d cy = quat_to_dcm(
      Quaternion::from_axis_angle(Eigen::Vector3d::UnitY(), e.pitch));
  const Eigen::Matrix3d cz =
      quat_to_dcm(Quaternion::from_axis_angle(Eigen::Vector3d::UnitZ(), e.yaw));
  CHECK((c - cx * cy * cz).norm() < 1e-12);
}

TEST_CASE("rotate: matches DCM transpose action") {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int i = 0; i < 50; ++i) {
    const Quaternion q = random_unit_quat(gen);
    const Eigen::Vector3d v(u(gen), u(gen), u(gen));
    const Eigen::Vector3d a = rotate(q, v);
    const Eigen::Vector3d b = quat_to_dcm(q).transpose() * v;
    CHECK((a - b).norm() < 1e-12);
  }
}

TEST_CASE("shortest_arc: aligns vectors, handles parallel/antiparallel") {
  const Eigen::Vector3d from = Eigen::Vector3d::UnitZ();
  const Eigen::Vector3d to = Eigen::Vector3d(1.0, 1.0, 1.0).normalized();
  const Quaternion q = Quaternion::shortest_arc(from, to);
  CHECK((rotate(q, from) - to).norm() < 1e-12);

  const Quaternion qi = Quaternion::shortest_arc(from, from);
  CHECK(qi.q0 == doctest::Approx(1.0));

  const Quaternion qa = Quaternion::shortest_arc(from, -from);
  CHECK((rotate(qa, from) + from).norm() < 1e-9);
}

TEST_CASE("rk4_step: zero and constant derivatives") {
  Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(4, 1.0, 4.0);
  const Eigen::VectorXd same =
      rk4_step([](const Eigen::VectorXd& y) { return 0.0 * y; }, x, 0.1);
  CHECK((same - x).norm() == 0.0);

  const Eigen::VectorXd c = Eigen::VectorXd::Constant(4, 2.5);
  const Eigen::VectorXd moved =
      rk4_step([&](const Eigen::VectorXd&) { return c; }, x, 0.1);
  CHECK((moved - (x + 0.1 * c)).norm() < 1e-15);
}

TEST_CASE("rk4_step: exponential decay accuracy and 4th-order convergence") {
  const DerivFn f = [](const Eigen::VectorXd& y) {
    return Eigen::VectorXd(-y);
  };
  Eigen::VectorXd x(1);
  x[0] = 1.0;
  const Eigen::VectorXd x1 = rk4_step(f, x, 0.05);
  CHECK(std::abs(x1[0] - std::exp(-0.05)) < 1e-8);

  // Integrate to t = 1 at dt and dt/2; the global error ratio must sit in
  // the 4th-order band.
  auto integrate = [&](double dt) {
    Eigen::VectorXd y(1);
    y[0] = 1.0;
    const int n = static_cast<int>(std::lround(1.0 / dt));
    for (int i = 0; i < n; ++i) y = rk4_step(f, y, dt);
    return std::abs(y[0] - std::exp(-1.0));
  };
  const double e1 = integrate(0.1);
  const double e2 = integrate(0.05);
  const double ratio = e1 / e2;
  CHECK(ratio > 14.0);
  CHECK(ratio < 18.0);
}

TEST_CASE("rk4_step: non-finite derivative throws") {
  const DerivFn f = [](const Eigen::VectorXd& y) {
    Eigen::VectorXd d = y;
    d[0] = std::numeric_limits<double>::quiet_NaN();
    return d;
  };
  Eigen::VectorXd x = Eigen::VectorXd::Ones(2);
  CHECK_THROWS(rk4_step(f, x, 0.05));
}
