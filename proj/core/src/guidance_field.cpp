#include "lander/guidance_field.hpp"

#include <algorithm>
#include <cmath>

namespace lander {

double time_to_go(double range, double v_c) {
  if (v_c <= kClosingSpeedEps) return kTimeToGoMax;
  return std::min(range / v_c, kTimeToGoMax);
}

Eigen::Vector3d v_lambda(double v_c, double theta_u, double theta_v) {
  const double su = std::sin(theta_u);
  const double sv = std::sin(theta_v);
  const double radicand = std::max(0.0, 1.0 - su * su - sv * sv);
  return v_c * Eigen::Vector3d{su, sv, std::sqrt(radicand)};
}

Eigen::Vector3d v_ref(double t_go, const VelocityFieldParams& params) {
  const double speed =
      params.v_c0 * (1.0 - std::exp(-t_go / params.tau_vref));
  return {0.0, 0.0, speed};
}

}  // namespace lander
