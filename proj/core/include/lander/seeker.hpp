#ifndef LANDER_SEEKER_HPP_
#define LANDER_SEEKER_HPP_

#include <Eigen/Dense>

#include "lander/math_core.hpp"

namespace lander {

// First-order-lagged seeker outputs (part of the joint RK4 state).
struct SeekerLag {
  double theta_u = 0.0;  // rad
  double theta_v = 0.0;  // rad
  double range = 0.0;    // m
  double v_c = 0.0;      // m/s
};

struct SeekerMeasurement {
  double theta_u = 0.0;
  double theta_v = 0.0;
  double range = 0.0;
  double v_c = 0.0;
};

enum class SeekerMode { kTrack, kAltitude };

// Stabilized platform state. The platform attitude q0 defines the seeker
// frame S via C_SN(q0); it is constant between resets.
struct SeekerState {
  Quaternion q0;
  SeekerLag lag;
  double tau_seeker = 0.2;  // s
  SeekerMode mode = SeekerMode::kTrack;
  double t_last_reset = 0.0;
  bool field_of_regard_exceeded = false;  // diagnostic, |theta| > 45 deg seen
};

// Un-lagged geometric measurements from the platform attitude and the
// relative DLS position/velocity (both inertial, r_tl = r_T - r_L).
SeekerMeasurement measure_unlagged(const Eigen::Vector3d& r_tl,
                                   const Eigen::Vector3d& v_tl,
                                   const Quaternion& q0);

// Minimal (shortest-arc) platform rotation aligning the platform w-axis
// with the current line of sight. Lagged states carry over unchanged.
Quaternion platform_reset(const Eigen::Vector3d& r_tl, const Quaternion& q0);

// Initial platform attitude: w-axis on the LOS with gimbal angles zero.
Quaternion initial_platform(const Eigen::Vector3d& r_tl);

// Landing-segment altitude mode: exact altitude and altitude rate
// relative to the DLS (no lag).
struct AltitudeMeasurement {
  double h = 0.0;      // m above DLS
  double h_dot = 0.0;  // m/s
};
AltitudeMeasurement altitude_mode_measure(const Eigen::Vector3d& r_l,
                                          const Eigen::Vector3d& v_l,
                                          double dls_altitude);

}  // namespace lander

#endif  // LANDER_SEEKER_HPP_
