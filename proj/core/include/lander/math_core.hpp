#ifndef LANDER_MATH_CORE_HPP_
#define LANDER_MATH_CORE_HPP_

#include <Eigen/Dense>
#include <functional>

namespace lander {

// Scalar-first unit quaternion (q0, q1, q2, q3).
struct Quaternion {
  double q0 = 1.0;
  double q1 = 0.0;
  double q2 = 0.0;
  double q3 = 0.0;

  static Quaternion identity() { return {1.0, 0.0, 0.0, 0.0}; }
  static Quaternion from_axis_angle(const Eigen::Vector3d& axis, double angle);
  // Shortest-arc rotation taking unit vector `from` onto unit vector `to`.
  static Quaternion shortest_arc(const Eigen::Vector3d& from,
                                 const Eigen::Vector3d& to);

  Eigen::Vector4d vec() const { return {q0, q1, q2, q3}; }
  double norm() const;
  Quaternion normalized() const;
  Quaternion conjugate() const { return {q0, -q1, -q2, -q3}; }
  bool finite() const;
};

// Hamilton product a ⊗ b.
Quaternion qmul(const Quaternion& a, const Quaternion& b);

// Relative rotation qa ⊗ qb⁻¹, sign-canonicalized so the scalar part is >= 0.
Quaternion qsub(const Quaternion& qa, const Quaternion& qb);

// Direction cosine matrix mapping inertial to body: x_B = C_BN * x_N.
Eigen::Matrix3d quat_to_dcm(const Quaternion& q);

// Active rotation of v by q (body-to-inertial for an attitude quaternion).
Eigen::Vector3d rotate(const Quaternion& q, const Eigen::Vector3d& v);

// Kinematic rate: q_dot = 1/2 * Omega(q) * (0, omega), omega in body frame.
Eigen::Vector4d quat_deriv(const Quaternion& q, const Eigen::Vector3d& omega);

// 3-2-1 (yaw-pitch-roll) Euler angles in radians.
// pitch in [-pi/2, pi/2]; yaw, roll in (-pi, pi].
struct Euler321 {
  double yaw = 0.0;
  double pitch = 0.0;
  double roll = 0.0;
};

Euler321 to_euler321(const Quaternion& q);
Quaternion from_euler321(const Euler321& e);

inline double deg2rad(double d) { return d * M_PI / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / M_PI; }

using DerivFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// Classical fixed-step RK4 update. Throws std::runtime_error on a
// non-finite derivative so the caller can abort the episode.
Eigen::VectorXd rk4_step(const DerivFn& f, const Eigen::VectorXd& x, double dt);

}  // namespace lander

#endif  // LANDER_MATH_CORE_HPP_
