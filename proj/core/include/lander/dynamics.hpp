#ifndef LANDER_DYNAMICS_HPP_
#define LANDER_DYNAMICS_HPP_

#include <Eigen/Dense>

#include "lander/math_core.hpp"
#include "lander/propulsion.hpp"
#include "lander/seeker.hpp"

namespace lander {

constexpr double kGravityZ = -1.63;   // m/s^2, lunar
constexpr double kGRef = 9.8;         // m/s^2
constexpr double kIsp = 225.0;        // s
constexpr double kFuelMax = 200.0;    // kg
constexpr double kNavDt = 0.2;        // s, nav/guidance update period
constexpr double kPhysicsDt = 0.05;   // s, RK4 substep

// Ground-truth 6-DOF state of the lander.
struct LanderState {
  Eigen::Vector3d r_l = Eigen::Vector3d::Zero();   // position, inertial (m)
  Eigen::Vector3d v_l = Eigen::Vector3d::Zero();   // velocity (m/s)
  Quaternion q;                                    // attitude
  Eigen::Vector3d omega = Eigen::Vector3d::Zero(); // body rates (rad/s)
  double mass = 1950.0;                            // kg
  double fuel_used = 0.0;                          // kg
  double t = 0.0;                                  // episode time (s)
};

// Uniform-density ellipsoid with per-episode perturbations.
struct InertiaModel {
  double a = 2.0, b = 2.0, c = 1.0;  // semi-axes (m)
  Eigen::Vector3d dj_diag = Eigen::Vector3d::Zero();  // kg m^2
  Eigen::Vector3d dj_off = Eigen::Vector3d::Zero();   // (xy, xz, yz) kg m^2
};

// Fuel-driven center-of-mass drift, r_com = alpha * zeta * f_used / f_max.
struct ComModel {
  Eigen::Vector3d zeta = Eigen::Vector3d::UnitX();  // unit direction
  double alpha = 0.1;                               // m
  double f_max = kFuelMax;                          // kg
};

Eigen::Matrix3d inertia_tensor(double mass, const InertiaModel& model);
Eigen::Vector3d com_offset(double fuel_used, const ComModel& model);

// Euler rotational EOM: omega_dot = J^{-1}(-omega x J omega - Jdot omega + L_B)
Eigen::Vector3d rotational_deriv(const Eigen::Vector3d& omega,
                                 const Eigen::Matrix3d& inertia,
                                 const Eigen::Matrix3d& inertia_rate,
                                 const Eigen::Vector3d& torque_body);

// r_dot = v; v_dot = F_N/m + g
struct TranslationalDeriv {
  Eigen::Vector3d r_dot;
  Eigen::Vector3d v_dot;
};
TranslationalDeriv translational_deriv(const LanderState& state,
                                       const Eigen::Vector3d& force_inertial);

// m_dot from summed per-thruster thrust (all thrusts >= 0).
double mass_flow(const Eigen::Vector4d& thrust);

// Joint RK4 state layout shared by the physics stepper and the environment:
// [r(3) v(3) q(4) omega(3) m(1) u(4) theta_u theta_v r_meas v_c dq(4)] = 26
struct JointState {
  static constexpr int kDim = 26;
  LanderState lander;
  Eigen::Vector4d thrust = Eigen::Vector4d::Zero();  // lagged actual (N)
  SeekerLag seeker;                                  // lagged measurements
  Quaternion dq;                                     // attitude change since t0

  Eigen::VectorXd pack() const;
  static JointState unpack(const Eigen::VectorXd& x, double t);
};

// Everything frozen across one nav step that the derivative needs.
struct StepContext {
  Eigen::Vector4d thrust_cmd = Eigen::Vector4d::Zero();  // post-failure (N)
  double tau_ctrl = 0.2;
  double tau_seeker = 0.2;
  Quaternion platform_q0;            // seeker platform attitude
  Eigen::Vector3d r_target = Eigen::Vector3d::Zero();
  bool seeker_frozen = false;        // landing segment: lag states held
  InertiaModel inertia;
  ComModel com;
  ThrusterConfig thrusters;
};

// Integrates the joint state over one nav step (4 RK4 substeps of 0.05 s),
// recomputing J each substep and renormalizing the quaternions.
// Throws std::runtime_error on a non-finite state.
JointState step_physics(const JointState& state, const StepContext& ctx,
                        double dt_nav = kNavDt);

}  // namespace lander

#endif  // LANDER_DYNAMICS_HPP_
