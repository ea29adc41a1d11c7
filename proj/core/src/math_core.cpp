#include "lander/math_core.hpp"

#include <cmath>
#include <stdexcept>

namespace lander {

Quaternion Quaternion::from_axis_angle(const Eigen::Vector3d& axis,
                                       double angle) {
  const Eigen::Vector3d n = axis.normalized();
  const double h = 0.5 * angle;
  const double s = std::sin(h);
  return {std::cos(h), n.x() * s, n.y() * s, n.z() * s};
}

Quaternion Quaternion::shortest_arc(const Eigen::Vector3d& from,
                                    const Eigen::Vector3d& to) {
  const Eigen::Vector3d f = from.normalized();
  const Eigen::Vector3d t = to.normalized();
  const double c = f.dot(t);
  if (c < -1.0 + 1e-12) {
    // Antipodal: rotate pi about any axis perpendicular to f.
    Eigen::Vector3d perp = f.cross(Eigen::Vector3d::UnitX());
    if (perp.squaredNorm() < 1e-12) perp = f.cross(Eigen::Vector3d::UnitY());
    return from_axis_angle(perp, M_PI);
  }
  const Eigen::Vector3d axis = f.cross(t);
  Quaternion q{1.0 + c, axis.x(), axis.y(), axis.z()};
  return q.normalized();
}

double Quaternion::norm() const {
  return std::sqrt(q0 * q0 + q1 * q1 + q2 * q2 + q3 * q3);
}

Quaternion Quaternion::normalized() const {
  const double n = norm();
  return {q0 / n, q1 / n, q2 / n, q3 / n};
}

bool Quaternion::finite() const {
  return std::isfinite(q0) && std::isfinite(q1) && std::isfinite(q2) &&
         std::isfinite(q3);
}

Quaternion qmul(const Quaternion& a, const Quaternion& b) {
  return {a.q0 * b.q0 - a.q1 * b.q1 - a.q2 * b.q2 - a.q3 * b.q3,
          a.q0 * b.q1 + a.q1 * b.q0 + a.q2 * b.q3 - a.q3 * b.q2,
          a.q0 * b.q2 - a.q1 * b.q3 + a.q2 * b.q0 + a.q3 * b.q1,
          a.q0 * b.q3 + a.q1 * b.q2 - a.q2 * b.q1 + a.q3 * b.q0};
}

Quaternion qsub(const Quaternion& qa, const Quaternion& qb) {
  Quaternion d = qmul(qa, qb.conjugate());
  if (d.q0 < 0.0) d = {-d.q0, -d.q1, -d.q2, -d.q3};
  return d;
}

Eigen::Matrix3d quat_to_dcm(const Quaternion& q) {
  if (!q.finite()) throw std::runtime_error("quat_to_dcm: non-finite quaternion");
  const double q0 = q.q0, q1 = q.q1, q2 = q.q2, q3 = q.q3;
  Eigen::Matrix3d c;
  c << 1.0 - 2.0 * (q2 * q2 + q3 * q3), 2.0 * (q1 * q2 + q0 * q3),
      2.0 * (q1 * q3 - q0 * q2),
      2.0 * (q1 * q2 - q0 * q3), 1.0 - 2.0 * (q1 * q1 + q3 * q3),
      2.0 * (q2 * q3 + q0 * q1),
      2.0 * (q1 * q3 + q0 * q2), 2.0 * (q2 * q3 - q0 * q1),
      1.0 - 2.0 * (q1 * q1 + q2 * q2);
  return c;
}

Eigen::Vector3d rotate(const Quaternion& q, const Eigen::Vector3d& v) {
  return quat_to_dcm(q).transpose() * v;
}

Eigen::Vector4d quat_deriv(const Quaternion& q, const Eigen::Vector3d& w) {
  return 0.5 * Eigen::Vector4d{
                   -q.q1 * w.x() - q.q2 * w.y() - q.q3 * w.z(),
                   q.q0 * w.x() - q.q3 * w.y() + q.q2 * w.z(),
                   q.q3 * w.x() + q.q0 * w.y() - q.q1 * w.z(),
                   -q.q2 * w.x() + q.q1 * w.y() + q.q0 * w.z()};
}

Euler321 to_euler321(const Quaternion& q) {
  const Eigen::Matrix3d c = quat_to_dcm(q);
  Euler321 e;
  const double s_pitch = -c(0, 2);
  if (std::abs(s_pitch) >= 1.0 - 1e-6) {
    // Gimbal lock: fold roll into yaw, report roll = 0.
    e.pitch = std::copysign(M_PI / 2.0, s_pitch);
    e.roll = 0.0;
    e.yaw = std::atan2(-c(1, 0), c(1, 1));
  } else {
    e.pitch = std::asin(s_pitch);
    e.yaw = std::atan2(c(0, 1), c(0, 0));
    e.roll = std::atan2(c(1, 2), c(2, 2));
  }
  return e;
}

Quaternion from_euler321(const Euler321& e) {
  const Quaternion qz =
      Quaternion::from_axis_angle(Eigen::Vector3d::UnitZ(), e.yaw);
  const Quaternion qy =
      Quaternion::from_axis_angle(Eigen::Vector3d::UnitY(), e.pitch);
  const Quaternion qx =
      Quaternion::from_axis_angle(Eigen::Vector3d::UnitX(), e.roll);
  return qmul(qmul(qz, qy), qx);
}

Eigen::VectorXd rk4_step(const DerivFn& f, const Eigen::VectorXd& x,
                         double dt) {
  const Eigen::VectorXd k1 = f(x);
  const Eigen::VectorXd k2 = f(x + 0.5 * dt * k1);
  const Eigen::VectorXd k3 = f(x + 0.5 * dt * k2);
  const Eigen::VectorXd k4 = f(x + dt * k3);
  if (!k1.allFinite() || !k2.allFinite() || !k3.allFinite() ||
      !k4.allFinite()) {
    throw std::runtime_error("rk4_step: non-finite derivative");
  }
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace lander
