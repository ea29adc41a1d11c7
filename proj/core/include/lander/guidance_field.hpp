#ifndef LANDER_GUIDANCE_FIELD_HPP_
#define LANDER_GUIDANCE_FIELD_HPP_

#include <Eigen/Dense>

namespace lander {

// Seeker-derived reference velocity field (guidance segment).
struct VelocityFieldParams {
  double tau_vref = 25.0;  // s
  double v_c0 = 0.0;       // closing speed at powered-descent start (m/s)
};

constexpr double kTimeToGoMax = 1000.0;  // s
constexpr double kClosingSpeedEps = 0.1; // m/s

// t_go = r / v_c, clamped to kTimeToGoMax for non-closing geometry.
double time_to_go(double range, double v_c);

// Reconstructed LOS unit vector in the seeker frame scaled by closing
// speed; the radicand is clamped at zero for lag transients.
Eigen::Vector3d v_lambda(double v_c, double theta_u, double theta_v);

// v_c0 * (1 - exp(-t_go / tau_vref)) * w_hat
Eigen::Vector3d v_ref(double t_go, const VelocityFieldParams& params);

inline Eigen::Vector3d v_err(const Eigen::Vector3d& v_lambda,
                             const Eigen::Vector3d& v_ref) {
  return v_lambda - v_ref;
}

}  // namespace lander

#endif  // LANDER_GUIDANCE_FIELD_HPP_
