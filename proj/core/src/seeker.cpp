#include "lander/seeker.hpp"

#include <cmath>

namespace lander {

namespace {
constexpr double kMinRange = 1e-6;  // m

double clamped_asin(double x) {
  return std::asin(std::clamp(x, -1.0, 1.0));
}
}  // namespace

SeekerMeasurement measure_unlagged(const Eigen::Vector3d& r_tl,
                                   const Eigen::Vector3d& v_tl,
                                   const Quaternion& q0) {
  SeekerMeasurement m;
  const double range = r_tl.norm();
  if (range < kMinRange) {
    // Degenerate geometry: hold zeros; the caller keeps prior lag state.
    return m;
  }
  const Eigen::Vector3d los_s = quat_to_dcm(q0) * r_tl / range;
  m.theta_u = clamped_asin(los_s.x());
  m.theta_v = clamped_asin(los_s.y());
  m.range = range;
  m.v_c = -r_tl.dot(v_tl) / range;
  return m;
}

Quaternion platform_reset(const Eigen::Vector3d& r_tl, const Quaternion& q0) {
  if (r_tl.norm() < kMinRange) return q0;
  // Platform w-axis expressed in the inertial frame.
  const Eigen::Vector3d w_n =
      quat_to_dcm(q0).transpose() * Eigen::Vector3d::UnitZ();
  const Quaternion correction = Quaternion::shortest_arc(w_n, r_tl.normalized());
  return qmul(correction, q0).normalized();
}

Quaternion initial_platform(const Eigen::Vector3d& r_tl) {
  return platform_reset(r_tl, Quaternion::identity());
}

AltitudeMeasurement altitude_mode_measure(const Eigen::Vector3d& r_l,
                                          const Eigen::Vector3d& v_l,
                                          double dls_altitude) {
  return {r_l.z() - dls_altitude, v_l.z()};
}

}  // namespace lander
