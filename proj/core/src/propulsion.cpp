#include "lander/propulsion.hpp"

#include <stdexcept>

namespace lander {

Eigen::Vector4d clip_command(const Eigen::Vector4d& action,
                             const ThrusterConfig& cfg) {
  if (!action.allFinite()) {
    throw std::runtime_error("clip_command: non-finite action");
  }
  return (cfg.u_max * action)
      .cwiseMax(cfg.u_min)
      .cwiseMin(cfg.u_max);
}

Eigen::Vector4d apply_failure(const Eigen::Vector4d& thrust_cmd,
                              const EngineState& engine) {
  Eigen::Vector4d out = thrust_cmd;
  if (engine.fail) {
    out[engine.fail_index] *= engine.fail_scale;
  }
  return out;
}

Eigen::Vector4d lag_deriv(const Eigen::Vector4d& thrust,
                          const Eigen::Vector4d& thrust_cmd, double tau_ctrl) {
  return (thrust_cmd - thrust) / tau_ctrl;
}

BodyWrench body_wrench(const Eigen::Vector4d& thrust,
                       const Eigen::Vector3d& r_com,
                       const ThrusterConfig& cfg) {
  BodyWrench w;
  for (int i = 0; i < ThrusterConfig::kCount; ++i) {
    const Eigen::Vector3d f = cfg.directions[i] * thrust[i];
    w.force += f;
    w.torque += (cfg.positions[i] - r_com).cross(f);
  }
  return w;
}

}  // namespace lander
