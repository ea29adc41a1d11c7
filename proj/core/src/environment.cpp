#include "lander/environment.hpp"

#include <cmath>
#include <stdexcept>

namespace lander {

double Rng::canonical() {
  return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
  return lo + (hi - lo) * canonical();
}

Eigen::Vector3d Rng::unit_vector() {
  const double z = uniform(-1.0, 1.0);
  const double phi = uniform(0.0, 2.0 * M_PI);
  const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {s * std::cos(phi), s * std::sin(phi), z};
}

Eigen::Vector3d Rng::perpendicular_unit(const Eigen::Vector3d& v) {
  const Eigen::Vector3d n = v.normalized();
  for (;;) {
    Eigen::Vector3d u = unit_vector();
    u -= u.dot(n) * n;
    const double len = u.norm();
    if (len > 1e-6) return u / len;
  }
}

int Rng::uniform_int(int n) {
  return std::min(n - 1, static_cast<int>(canonical() * n));
}

double glideslope_deg(const Eigen::Vector3d& v_lt) {
  const double lateral = v_lt.head<2>().norm();
  if (lateral < 1e-12) return 90.0;
  return rad2deg(std::atan(std::abs(v_lt.z()) / lateral));
}

bool success_predicate(const TerminalMetrics& m) {
  return m.speed < 2.0 && m.miss < 10.0 && m.glideslope_deg >= 80.0 &&
         std::abs(m.pitch_deg) < 10.0 && std::abs(m.roll_deg) < 10.0 &&
         m.omega_deg.cwiseAbs().maxCoeff() < 10.0;
}

double guidance_reward(const Eigen::Vector3d& v_err,
                       const Eigen::Vector3d& force_body, bool terminal_bonus,
                       bool attitude_violation, const RewardParams& p,
                       const ThrusterConfig& cfg) {
  double r = p.eta + p.alpha * v_err.norm();
  r += p.beta * force_body.norm() / (ThrusterConfig::kCount * cfg.u_max);
  if (attitude_violation) r += p.attitude_penalty;
  if (terminal_bonus) r += p.kappa;
  return r;
}

double landing_terminal_gaussian(const Eigen::Vector3d& v_lt,
                                 const Eigen::Vector3d& v_l, double pitch_deg,
                                 double roll_deg,
                                 const Eigen::Vector3d& omega_deg,
                                 const RewardParams& p) {
  const double vz = std::copysign(std::max(std::abs(v_lt.z()), 1e-6), v_lt.z());
  const double glide_ratio = 5.0 * v_lt.head<2>().norm() / vz;
  Eigen::Matrix<double, 9, 1> w;
  w << glide_ratio, v_l.x(), v_l.y(), v_l.z(), pitch_deg, roll_deg,
      omega_deg.x(), omega_deg.y(), omega_deg.z();
  return p.kappa *
         std::exp(-w.squaredNorm() / (p.sigma_landing * p.sigma_landing));
}

bool landing_terminal_success(const Eigen::Vector3d& v_lt, double pitch_deg,
                              double roll_deg,
                              const Eigen::Vector3d& omega_deg) {
  return v_lt.norm() < 2.0 && std::abs(pitch_deg) < 10.0 &&
         std::abs(roll_deg) < 10.0 &&
         omega_deg.cwiseAbs().maxCoeff() < 10.0 &&
         glideslope_deg(v_lt) > 80.0;
}

Environment::Environment(EpisodeConfig config, EpisodeMode mode)
    : config_(std::move(config)), mode_(mode) {}

void Environment::sample_episode_models() {
  // Episode-model draws happen in a fixed order, unconditionally, so that
  // scenarios at their identity values reproduce the Optim stream
  // bit-identically.
  double mass_frac = config_.mass_fraction;
  double dj_diag_bound = config_.dj_diag_bound;
  double dj_off_bound = config_.dj_off_bound;
  double fail_scale_min = 1.0;
  bool fail_possible = false;
  switch (config_.scenario.kind) {
    case ScenarioKind::kOptim:
      break;
    case ScenarioKind::kActuatorFailure:
      fail_possible = true;
      fail_scale_min = config_.scenario.delta;
      break;
    case ScenarioKind::kMassVariation:
      mass_frac = config_.scenario.delta;
      break;
    case ScenarioKind::kInertiaVariation:
      dj_diag_bound = config_.scenario.delta;
      dj_off_bound = config_.scenario.delta / 10.0;
      break;
  }

  const double eps = rng_.uniform(-mass_frac, mass_frac);
  joint_.lander.mass = config_.mass_nominal * (1.0 + eps);

  inertia_ = InertiaModel{};
  for (int i = 0; i < 3; ++i) {
    inertia_.dj_diag[i] = rng_.uniform(-dj_diag_bound, dj_diag_bound);
  }
  // Rejection-resample the off-diagonal perturbation until J stays PSD.
  for (;;) {
    for (int i = 0; i < 3; ++i) {
      inertia_.dj_off[i] = rng_.uniform(-dj_off_bound, dj_off_bound);
    }
    const Eigen::Matrix3d j = inertia_tensor(joint_.lander.mass, inertia_);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(j);
    if (es.eigenvalues().minCoeff() >= 0.0) break;
  }

  com_ = ComModel{};
  com_.zeta = rng_.unit_vector();
  com_.alpha = config_.com_alpha;

  engine_ = EngineState{};
  engine_.tau_ctrl = config_.tau_ctrl;
  const double coin = rng_.canonical();
  engine_.fail_index = rng_.uniform_int(ThrusterConfig::kCount);
  engine_.fail_scale = rng_.uniform(fail_scale_min, 1.0);
  engine_.fail = fail_possible && coin < 0.5;
}

StepResult Environment::reset(std::uint64_t seed) {
  rng_.seed(seed);
  joint_ = JointState{};
  r_target_.setZero();
  divert_fired_.fill(false);
  divert_count_ = 0;
  segment_ = Segment::kGuidance;
  reason_ = TerminationReason::kNone;
  step_count_ = 0;
  done_ = false;
  first_step_ = true;

  joint_.lander.r_l = {
      rng_.uniform(config_.downrange_min, config_.downrange_max),
      rng_.uniform(config_.crossrange_min, config_.crossrange_max),
      rng_.uniform(config_.altitude_min, config_.altitude_max)};

  const double speed = rng_.uniform(config_.speed_min, config_.speed_max);
  const Eigen::Vector3d r_tl = r_target_ - joint_.lander.r_l;
  const Eigen::Vector3d los = r_tl.normalized();

  // Heading error: rotate the ideal velocity direction (toward the DLS) by
  // theta_v about a random perpendicular axis.
  const double theta_v =
      deg2rad(rng_.uniform(0.0, config_.heading_error_max_deg));
  const Eigen::Vector3d perp = rng_.perpendicular_unit(los);
  joint_.lander.v_l =
      speed * rotate(Quaternion::from_axis_angle(perp, theta_v), los);

  // Nominal attitude: body -z axis on the LOS, perturbed by theta_q about a
  // uniformly random axis.
  const double theta_q =
      deg2rad(rng_.uniform(0.0, config_.attitude_error_max_deg));
  const Eigen::Vector3d att_axis = rng_.unit_vector();
  const Quaternion nominal =
      Quaternion::shortest_arc(Eigen::Vector3d::UnitZ(), -los);
  joint_.lander.q =
      qmul(Quaternion::from_axis_angle(att_axis, theta_q), nominal)
          .normalized();
  joint_.lander.omega.setZero();

  sample_episode_models();

  joint_.lander.fuel_used = 0.0;
  joint_.lander.t = 0.0;
  joint_.thrust.setZero();
  joint_.dq = Quaternion::identity();

  seeker_ = SeekerState{};
  seeker_.tau_seeker = config_.tau_seeker;
  seeker_.q0 = initial_platform(r_tl);
  seeker_.mode = SeekerMode::kTrack;
  seeker_.t_last_reset = 0.0;
  const SeekerMeasurement m0 =
      measure_unlagged(r_tl, -joint_.lander.v_l, seeker_.q0);
  joint_.seeker = {m0.theta_u, m0.theta_v, m0.range, m0.v_c};
  seeker_.lag = joint_.seeker;

  field_ = VelocityFieldParams{config_.tau_vref, joint_.seeker.v_c};

  thrusters_ = ThrusterConfig{};

  if (mode_ == EpisodeMode::kLandingOnly) {
    throw std::runtime_error(
        "Environment: landing-only mode requires reset_landing()");
  }
  return make_initial_result();
}

StepResult Environment::reset_landing(const LandingIC& ic,
                                      std::uint64_t seed) {
  rng_.seed(seed);
  joint_ = JointState{};
  r_target_.setZero();
  divert_fired_.fill(true);  // no diverts below the segment boundary
  divert_count_ = 0;
  segment_ = Segment::kLanding;
  reason_ = TerminationReason::kNone;
  step_count_ = 0;
  done_ = false;
  first_step_ = true;

  joint_.lander.r_l = r_target_ + ic.r_lt;
  joint_.lander.v_l = ic.v_l;
  joint_.lander.q = ic.q.normalized();
  joint_.lander.omega = ic.omega;
  sample_episode_models();
  joint_.lander.mass = ic.mass;  // pool entry overrides the sampled mass
  joint_.lander.fuel_used = ic.fuel_used;
  joint_.lander.t = 0.0;
  joint_.thrust.setZero();
  joint_.dq = Quaternion::identity();

  seeker_ = SeekerState{};
  seeker_.tau_seeker = config_.tau_seeker;
  seeker_.q0 = Quaternion::identity();  // platform w-axis vertical
  seeker_.mode = SeekerMode::kAltitude;
  joint_.seeker = SeekerLag{};
  seeker_.lag = joint_.seeker;
  field_ = VelocityFieldParams{config_.tau_vref, 0.0};
  thrusters_ = ThrusterConfig{};

  return make_initial_result();
}

StepResult Environment::make_initial_result() {
  StepResult res;
  res.obs = observe();
  res.segment = segment_;
  res.info.t = 0.0;
  res.info.lander = joint_.lander;
  res.info.seeker = joint_.seeker;
  res.info.platform_q0 = seeker_.q0;
  res.info.r_target = r_target_;
  res.info.v_err = segment_ == Segment::kGuidance ? lagged_v_err()
                                                  : Eigen::Vector3d::Zero();
  res.info.thrust = joint_.thrust;
  res.info.segment = segment_;
  return res;
}

Eigen::Vector3d Environment::lagged_v_err() const {
  const SeekerLag& lag = joint_.seeker;
  const Eigen::Vector3d vl = v_lambda(lag.v_c, lag.theta_u, lag.theta_v);
  const double tgo = time_to_go(lag.range, lag.v_c);
  return v_err(vl, v_ref(tgo, field_));
}

void Environment::enter_landing_segment() {
  segment_ = Segment::kLanding;
  seeker_.mode = SeekerMode::kAltitude;
  seeker_.q0 = Quaternion::identity();
  joint_.seeker.theta_u = 0.0;
  joint_.seeker.theta_v = 0.0;
  seeker_.lag = joint_.seeker;
}

Observation Environment::observe() const {
  Observation obs;
  const LanderState& s = joint_.lander;
  const Euler321 e = to_euler321(s.q);
  if (segment_ == Segment::kGuidance) {
    const SeekerLag& lag = joint_.seeker;
    Eigen::VectorXd o(kGuidanceObsDim);
    o.segment<3>(0) = lagged_v_err();
    o[3] = time_to_go(lag.range, lag.v_c);
    o[4] = lag.range;
    o.segment<4>(5) = joint_.dq.vec();
    o.segment<4>(9) = qsub(s.q, seeker_.q0).vec();
    o[13] = e.pitch;
    o[14] = e.roll;
    o.segment<3>(15) = s.omega;
    obs.policy = o;
    obs.value = o;
  } else {
    const AltitudeMeasurement alt =
        altitude_mode_measure(s.r_l, s.v_l, r_target_.z());
    Eigen::VectorXd p(kLandingPolicyObsDim);
    p << alt.h, alt.h_dot, s.q.q0, s.q.q1, s.q.q2, s.q.q3, s.omega.x(),
        s.omega.y(), s.omega.z();
    Eigen::VectorXd v(kLandingValueObsDim);
    const Eigen::Vector3d r_lt = s.r_l - r_target_;
    v << r_lt.z(), s.v_l.x(), s.v_l.y(), s.v_l.z(), s.q.q0, s.q.q1, s.q.q2,
        s.q.q3, s.omega.x(), s.omega.y(), s.omega.z();
    obs.policy = p;
    obs.value = v;
  }
  return obs;
}

TerminalMetrics Environment::terminal_metrics() const {
  TerminalMetrics m;
  const LanderState& s = joint_.lander;
  const Eigen::Vector3d r_lt = s.r_l - r_target_;
  const Eigen::Vector3d v_lt = s.v_l;
  const Euler321 e = to_euler321(s.q);
  m.miss = r_lt.norm();
  m.downrange_miss = r_lt.x();
  m.crossrange_miss = r_lt.y();
  m.speed = v_lt.norm();
  m.pitch_deg = rad2deg(e.pitch);
  m.roll_deg = rad2deg(e.roll);
  m.omega_deg = s.omega * 180.0 / M_PI;
  m.glideslope_deg = glideslope_deg(v_lt);
  m.fuel_used = s.fuel_used;
  return m;
}

LandingIC Environment::landing_ic() const {
  LandingIC ic;
  ic.r_lt = joint_.lander.r_l - r_target_;
  ic.v_l = joint_.lander.v_l;
  ic.q = joint_.lander.q;
  ic.omega = joint_.lander.omega;
  ic.mass = joint_.lander.mass;
  ic.fuel_used = joint_.lander.fuel_used;
  return ic;
}

StepResult Environment::step(const Eigen::Vector4d& action) {
  if (done_) throw std::runtime_error("Environment::step after done");

  StepResult res;
  Eigen::Vector4d cmd;
  try {
    cmd = apply_failure(clip_command(action, thrusters_), engine_);
  } catch (const std::exception&) {
    done_ = true;
    reason_ = TerminationReason::kNumericalFailure;
    res.done = true;
    res.reason = reason_;
    res.segment = segment_;
    res.obs = observe();
    return res;
  }

  if (first_step_) {
    // Actual thrust starts at the first clipped command; the only startup
    // transient is the lag itself.
    joint_.thrust = cmd;
    first_step_ = false;
  }

  StepContext ctx;
  ctx.thrust_cmd = cmd;
  ctx.tau_ctrl = config_.tau_ctrl;
  ctx.tau_seeker = config_.tau_seeker;
  ctx.platform_q0 = seeker_.q0;
  ctx.r_target = r_target_;
  ctx.seeker_frozen = segment_ == Segment::kLanding;
  ctx.inertia = inertia_;
  ctx.com = com_;
  ctx.thrusters = thrusters_;

  try {
    joint_ = step_physics(joint_, ctx, kNavDt);
  } catch (const std::exception&) {
    done_ = true;
    reason_ = TerminationReason::kNumericalFailure;
    res.done = true;
    res.reason = reason_;
    res.segment = segment_;
    res.obs = observe();
    return res;
  }
  engine_.thrust = joint_.thrust;
  seeker_.lag = joint_.seeker;
  ++step_count_;

  StepInfo info;
  info.t = joint_.lander.t;
  info.segment = segment_;
  info.thrust = joint_.thrust;

  // Divert thresholds, highest unfired first, at most one per step.
  if (segment_ == Segment::kGuidance) {
    const double range = (joint_.lander.r_l - r_target_).norm();
    for (std::size_t i = 0; i < config_.divert_thresholds.size(); ++i) {
      if (!divert_fired_[i] && range < config_.divert_thresholds[i]) {
        divert_fired_[i] = true;
        ++divert_count_;
        Eigen::Vector3d delta;
        delta << range * 0.1 * rng_.uniform(-1.0, 1.0),
            range * 0.1 * rng_.uniform(-1.0, 1.0),
            range * 0.05 * rng_.uniform(-1.0, 1.0);
        r_target_ += delta;
        info.diverted = true;
        break;
      }
    }
  }

  // Scheduled platform reset every two seconds of episode time.
  if (segment_ == Segment::kGuidance &&
      joint_.lander.t - seeker_.t_last_reset >=
          config_.platform_reset_period - 1e-9) {
    seeker_.q0 = platform_reset(r_target_ - joint_.lander.r_l, seeker_.q0);
    seeker_.t_last_reset = joint_.lander.t;
    info.platform_was_reset = true;
  }

  if (std::abs(joint_.seeker.theta_u) > deg2rad(45.0) ||
      std::abs(joint_.seeker.theta_v) > deg2rad(45.0)) {
    seeker_.field_of_regard_exceeded = true;
  }

  const LanderState& s = joint_.lander;
  const Eigen::Vector3d r_lt = s.r_l - r_target_;
  const Eigen::Vector3d v_lt = s.v_l;
  const double rel_altitude = r_lt.z();
  const Euler321 e = to_euler321(s.q);
  const bool attitude_violation =
      std::abs(rad2deg(e.pitch)) > config_.reward.attitude_limit_deg ||
      std::abs(rad2deg(e.roll)) > config_.reward.attitude_limit_deg;

  const BodyWrench wrench =
      body_wrench(joint_.thrust, com_offset(s.fuel_used, com_), thrusters_);
  info.force_inertial = quat_to_dcm(s.q).transpose() * wrench.force;

  double reward = 0.0;
  if (segment_ == Segment::kGuidance) {
    const Eigen::Vector3d verr = lagged_v_err();
    info.v_err = verr;
    const bool switching = rel_altitude < config_.segment_switch_altitude;
    const bool bonus =
        switching && r_lt.norm() < 10.0 && v_lt.norm() < 2.0;
    reward = guidance_reward(verr, wrench.force, bonus, attitude_violation,
                             config_.reward, thrusters_);
    if (attitude_violation) {
      done_ = true;
      reason_ = TerminationReason::kAttitudeLimit;
    } else if (switching) {
      if (mode_ == EpisodeMode::kGuidanceOnly) {
        done_ = true;
        reason_ = TerminationReason::kGuidanceExit;
      } else {
        enter_landing_segment();
      }
    }
  } else {
    reward = config_.reward.beta * wrench.force.norm() /
             (ThrusterConfig::kCount * thrusters_.u_max);
    if (attitude_violation) {
      reward += config_.reward.attitude_penalty;
      done_ = true;
      reason_ = TerminationReason::kAttitudeLimit;
    } else if (rel_altitude < 0.0) {
      const Eigen::Vector3d omega_deg = s.omega * 180.0 / M_PI;
      reward += landing_terminal_gaussian(v_lt, s.v_l, rad2deg(e.pitch),
                                          rad2deg(e.roll), omega_deg,
                                          config_.reward);
      if (landing_terminal_success(v_lt, rad2deg(e.pitch), rad2deg(e.roll),
                                   omega_deg)) {
        reward += config_.reward.kappa;
      }
      done_ = true;
      reason_ = TerminationReason::kGroundContact;
    }
  }

  if (!done_) {
    if (s.fuel_used >= kFuelMax) {
      done_ = true;
      reason_ = TerminationReason::kFuelExhausted;
    } else if (step_count_ >= config_.max_steps) {
      done_ = true;
      reason_ = TerminationReason::kStepCap;
    }
  }

  info.lander = joint_.lander;
  info.seeker = joint_.seeker;
  info.platform_q0 = seeker_.q0;
  info.r_target = r_target_;

  res.reward = reward;
  res.done = done_;
  res.reason = reason_;
  res.segment = segment_;
  res.obs = observe();
  res.info = info;
  return res;
}

}  // namespace lander
