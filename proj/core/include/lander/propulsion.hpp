#ifndef LANDER_PROPULSION_HPP_
#define LANDER_PROPULSION_HPP_

#include <Eigen/Dense>
#include <array>

namespace lander {

// Four throttleable engines, all thrusting along body +z.
struct ThrusterConfig {
  static constexpr int kCount = 4;
  std::array<Eigen::Vector3d, 4> positions = {
      Eigen::Vector3d{0.0, -2.0, -1.0}, Eigen::Vector3d{0.0, 2.0, -1.0},
      Eigen::Vector3d{-2.0, 0.0, -1.0}, Eigen::Vector3d{2.0, 0.0, -1.0}};
  std::array<Eigen::Vector3d, 4> directions = {
      Eigen::Vector3d{0.0, 0.0, 1.0}, Eigen::Vector3d{0.0, 0.0, 1.0},
      Eigen::Vector3d{0.0, 0.0, 1.0}, Eigen::Vector3d{0.0, 0.0, 1.0}};
  double u_min = 500.0;   // N
  double u_max = 2500.0;  // N
};

// Per-episode actuator failure assignment plus the lag state.
struct EngineState {
  Eigen::Vector4d thrust = Eigen::Vector4d::Zero();  // lagged actual (N)
  double tau_ctrl = 0.2;                             // s
  bool fail = false;
  int fail_index = 0;
  double fail_scale = 1.0;  // in (0, 1]
};

// clip(u_max * u_pi, u_min, u_max), componentwise.
// Throws std::runtime_error on non-finite actions.
Eigen::Vector4d clip_command(const Eigen::Vector4d& action,
                             const ThrusterConfig& cfg);

// Scales the failed thruster by fail_scale when the failure flag is set.
Eigen::Vector4d apply_failure(const Eigen::Vector4d& thrust_cmd,
                              const EngineState& engine);

// First-order actuator lag: u_dot = (u_cmd - u) / tau_ctrl.
Eigen::Vector4d lag_deriv(const Eigen::Vector4d& thrust,
                          const Eigen::Vector4d& thrust_cmd, double tau_ctrl);

struct BodyWrench {
  Eigen::Vector3d force = Eigen::Vector3d::Zero();   // N
  Eigen::Vector3d torque = Eigen::Vector3d::Zero();  // N m
};

BodyWrench body_wrench(const Eigen::Vector4d& thrust,
                       const Eigen::Vector3d& r_com,
                       const ThrusterConfig& cfg);

}  // namespace lander

#endif  // LANDER_PROPULSION_HPP_
