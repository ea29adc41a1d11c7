#include "lander/dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace lander {

Eigen::Matrix3d inertia_tensor(double mass, const InertiaModel& model) {
  if (mass <= 0.0) {
    if (mass == 0.0) return Eigen::Matrix3d::Zero();
    throw std::runtime_error("inertia_tensor: non-positive mass");
  }
  const double a2 = model.a * model.a;
  const double b2 = model.b * model.b;
  const double c2 = model.c * model.c;
  Eigen::Matrix3d j = Eigen::Matrix3d::Zero();
  j(0, 0) = mass / 5.0 * (b2 + c2) + model.dj_diag.x();
  j(1, 1) = mass / 5.0 * (a2 + c2) + model.dj_diag.y();
  j(2, 2) = mass / 5.0 * (a2 + b2) + model.dj_diag.z();
  j(0, 1) = j(1, 0) = model.dj_off.x();
  j(0, 2) = j(2, 0) = model.dj_off.y();
  j(1, 2) = j(2, 1) = model.dj_off.z();
  return j;
}

Eigen::Vector3d com_offset(double fuel_used, const ComModel& model) {
  const double f = std::clamp(fuel_used, 0.0, model.f_max);
  return model.alpha * model.zeta * (f / model.f_max);
}

Eigen::Vector3d rotational_deriv(const Eigen::Vector3d& omega,
                                 const Eigen::Matrix3d& inertia,
                                 const Eigen::Matrix3d& inertia_rate,
                                 const Eigen::Vector3d& torque_body) {
  Eigen::FullPivLU<Eigen::Matrix3d> lu(inertia);
  if (!lu.isInvertible()) {
    throw std::runtime_error("rotational_deriv: singular inertia tensor");
  }
  const Eigen::Vector3d rhs =
      -omega.cross(inertia * omega) - inertia_rate * omega + torque_body;
  return lu.solve(rhs);
}

TranslationalDeriv translational_deriv(const LanderState& state,
                                       const Eigen::Vector3d& force_inertial) {
  if (state.mass <= 0.0) {
    throw std::runtime_error("translational_deriv: non-positive mass");
  }
  return {state.v_l,
          force_inertial / state.mass + Eigen::Vector3d{0.0, 0.0, kGravityZ}};
}

double mass_flow(const Eigen::Vector4d& thrust) {
  return -thrust.sum() / (kIsp * kGRef);
}

Eigen::VectorXd JointState::pack() const {
  Eigen::VectorXd x(kDim);
  x.segment<3>(0) = lander.r_l;
  x.segment<3>(3) = lander.v_l;
  x.segment<4>(6) = lander.q.vec();
  x.segment<3>(10) = lander.omega;
  x[13] = lander.mass;
  x.segment<4>(14) = thrust;
  x[18] = seeker.theta_u;
  x[19] = seeker.theta_v;
  x[20] = seeker.range;
  x[21] = seeker.v_c;
  x.segment<4>(22) = dq.vec();
  return x;
}

JointState JointState::unpack(const Eigen::VectorXd& x, double t) {
  JointState s;
  s.lander.r_l = x.segment<3>(0);
  s.lander.v_l = x.segment<3>(3);
  s.lander.q = {x[6], x[7], x[8], x[9]};
  s.lander.omega = x.segment<3>(10);
  s.lander.mass = x[13];
  s.lander.t = t;
  s.thrust = x.segment<4>(14);
  s.seeker = {x[18], x[19], x[20], x[21]};
  s.dq = {x[22], x[23], x[24], x[25]};
  return s;
}

namespace {

Eigen::VectorXd joint_deriv(const Eigen::VectorXd& x, const StepContext& ctx,
                            double initial_mass,
                            const Eigen::Matrix3d& inertia_rate) {
  const JointState s = JointState::unpack(x, 0.0);

  const Eigen::Vector4d u_dot =
      lag_deriv(s.thrust, ctx.thrust_cmd, ctx.tau_ctrl);

  const double fuel_used = initial_mass - s.lander.mass;
  const Eigen::Vector3d r_com = com_offset(fuel_used, ctx.com);
  const BodyWrench wrench = body_wrench(s.thrust, r_com, ctx.thrusters);

  const Eigen::Matrix3d c_bn = quat_to_dcm(s.lander.q);
  const Eigen::Vector3d force_n = c_bn.transpose() * wrench.force;

  const TranslationalDeriv td = translational_deriv(s.lander, force_n);
  const Eigen::Matrix3d inertia = inertia_tensor(s.lander.mass, ctx.inertia);
  const Eigen::Vector3d omega_dot =
      rotational_deriv(s.lander.omega, inertia, inertia_rate, wrench.torque);
  const Eigen::Vector4d q_dot = quat_deriv(s.lander.q, s.lander.omega);
  const Eigen::Vector4d dq_dot = quat_deriv(s.dq, s.lander.omega);
  const double m_dot = mass_flow(s.thrust);

  Eigen::VectorXd d(JointState::kDim);
  d.segment<3>(0) = td.r_dot;
  d.segment<3>(3) = td.v_dot;
  d.segment<4>(6) = q_dot;
  d.segment<3>(10) = omega_dot;
  d[13] = m_dot;
  d.segment<4>(14) = u_dot;
  if (ctx.seeker_frozen) {
    d.segment<4>(18).setZero();
  } else {
    const Eigen::Vector3d r_tl = ctx.r_target - s.lander.r_l;
    const Eigen::Vector3d v_tl = -s.lander.v_l;  // DLS is static
    const SeekerMeasurement m = measure_unlagged(r_tl, v_tl, ctx.platform_q0);
    if (r_tl.norm() < 1e-6) {
      d.segment<4>(18).setZero();
    } else {
      d[18] = (m.theta_u - s.seeker.theta_u) / ctx.tau_seeker;
      d[19] = (m.theta_v - s.seeker.theta_v) / ctx.tau_seeker;
      d[20] = (m.range - s.seeker.range) / ctx.tau_seeker;
      d[21] = (m.v_c - s.seeker.v_c) / ctx.tau_seeker;
    }
  }
  d.segment<4>(22) = dq_dot;
  return d;
}

}  // namespace

JointState step_physics(const JointState& state, const StepContext& ctx,
                        double dt_nav) {
  const int n_sub = std::max(1, static_cast<int>(std::lround(dt_nav / kPhysicsDt)));
  const double dt = dt_nav / n_sub;

  Eigen::VectorXd x = state.pack();
  double t = state.lander.t;
  const double initial_mass = state.lander.mass + state.lander.fuel_used;

  for (int i = 0; i < n_sub; ++i) {
    // Jdot from a finite difference of J(m) across the substep, using a
    // mass predictor from the current thrust.
    const double m_now = x[13];
    const double m_pred = m_now + mass_flow(x.segment<4>(14)) * dt;
    const Eigen::Matrix3d inertia_rate =
        (inertia_tensor(m_pred, ctx.inertia) -
         inertia_tensor(m_now, ctx.inertia)) /
        dt;

    x = rk4_step(
        [&](const Eigen::VectorXd& xs) {
          return joint_deriv(xs, ctx, initial_mass, inertia_rate);
        },
        x, dt);

    // Renormalize both quaternions after every substep.
    const double qn = x.segment<4>(6).norm();
    x.segment<4>(6) /= qn;
    const double dqn = x.segment<4>(22).norm();
    x.segment<4>(22) /= dqn;
    // Thrust lag cannot overshoot but guard the bounds anyway.
    x.segment<4>(14) =
        x.segment<4>(14).cwiseMax(0.0).cwiseMin(ctx.thrusters.u_max);
    t += dt;
  }

  if (!x.allFinite()) {
    throw std::runtime_error("step_physics: non-finite state");
  }

  JointState out = JointState::unpack(x, t);
  out.lander.fuel_used = initial_mass - out.lander.mass;
  return out;
}

}  // namespace lander
