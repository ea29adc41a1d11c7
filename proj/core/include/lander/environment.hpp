#ifndef LANDER_ENVIRONMENT_HPP_
#define LANDER_ENVIRONMENT_HPP_

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <random>

#include "lander/dynamics.hpp"
#include "lander/guidance_field.hpp"
#include "lander/math_core.hpp"
#include "lander/propulsion.hpp"
#include "lander/seeker.hpp"

namespace lander {

// Deterministic uniform draws decoupled from libstdc++ distribution
// internals so fixed-seed episodes replay bit-identically.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : gen_(seed) {}
  void seed(std::uint64_t s) { gen_.seed(s); }
  double uniform(double lo, double hi);
  double canonical();  // [0, 1)
  Eigen::Vector3d unit_vector();
  Eigen::Vector3d perpendicular_unit(const Eigen::Vector3d& v);
  int uniform_int(int n);  // {0, ..., n-1}

 private:
  std::mt19937_64 gen_;
};

enum class ScenarioKind { kOptim, kActuatorFailure, kMassVariation, kInertiaVariation };

struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::kOptim;
  double delta = 0.0;
};

struct RewardParams {
  double alpha = -0.5;            // shaping gain on ||v_err||
  double beta = -0.01;            // control penalty gain
  double eta = 0.01;              // alive bonus
  double kappa = 20.0;            // terminal bonus
  double attitude_penalty = -100.0;
  double attitude_limit_deg = 85.0;
  double sigma_landing = 5.0;     // width of the landing terminal gaussian
};

struct EpisodeConfig {
  double downrange_min = 1500.0, downrange_max = 2000.0;  // m
  double crossrange_min = -500.0, crossrange_max = 500.0; // m
  double altitude_min = 2000.0, altitude_max = 2200.0;    // m
  double speed_min = 40.0, speed_max = 50.0;              // m/s
  double heading_error_max_deg = 10.0;
  double attitude_error_max_deg = 10.0;
  double mass_nominal = 1950.0;                           // kg
  double mass_fraction = 50.0 / 1950.0;   // U(1900, 2000) as 1950 (1 +/- eps)
  double dj_diag_bound = 10.0;                            // kg m^2
  double dj_off_bound = 1.0;                              // kg m^2
  double tau_seeker = 0.2;                                // s
  double tau_ctrl = 0.2;                                  // s
  double com_alpha = 0.1;                                 // m
  double tau_vref = 25.0;                                 // s
  double platform_reset_period = 2.0;                     // s
  std::array<double, 4> divert_thresholds{1500.0, 1000.0, 500.0, 100.0};
  double segment_switch_altitude = 5.0;                   // m
  int max_steps = 3000;
  ScenarioSpec scenario;
  RewardParams reward;
};

enum class Segment { kGuidance, kLanding };

enum class TerminationReason {
  kNone,
  kGroundContact,
  kAttitudeLimit,
  kStepCap,
  kFuelExhausted,
  kGuidanceExit,      // guidance-only mode, segment boundary reached
  kNumericalFailure,
};

enum class EpisodeMode { kFull, kGuidanceOnly, kLandingOnly };

// Per-segment policy / value input vectors. In the guidance segment both
// are the same 18-vector; in the landing segment the value function gets
// ground truth that the policy does not.
struct Observation {
  Eigen::VectorXd policy;
  Eigen::VectorXd value;
};

constexpr int kGuidanceObsDim = 18;
constexpr int kLandingPolicyObsDim = 9;
constexpr int kLandingValueObsDim = 11;
constexpr int kActionDim = 4;

// Diagnostics for logging and replay, captured every step.
struct StepInfo {
  double t = 0.0;
  LanderState lander;
  SeekerLag seeker;
  Quaternion platform_q0;
  Eigen::Vector3d r_target = Eigen::Vector3d::Zero();
  Eigen::Vector3d v_err = Eigen::Vector3d::Zero();
  Eigen::Vector3d force_inertial = Eigen::Vector3d::Zero();
  Eigen::Vector4d thrust = Eigen::Vector4d::Zero();
  Segment segment = Segment::kGuidance;
  bool diverted = false;
  bool platform_was_reset = false;
};

struct StepResult {
  Observation obs;
  double reward = 0.0;
  bool done = false;
  Segment segment = Segment::kGuidance;
  TerminationReason reason = TerminationReason::kNone;
  StepInfo info;
};

// Terminal state of a guidance episode, used to seed landing episodes.
struct LandingIC {
  Eigen::Vector3d r_lt = Eigen::Vector3d::Zero();  // relative to DLS (m)
  Eigen::Vector3d v_l = Eigen::Vector3d::Zero();
  Quaternion q;
  Eigen::Vector3d omega = Eigen::Vector3d::Zero();
  double mass = 1950.0;
  double fuel_used = 0.0;
};

// Pure terminal metrics used by rewards, the success predicate, and the
// evaluation statistics.
struct TerminalMetrics {
  double miss = 0.0;            // ||r_LT|| at terminal (m)
  double downrange_miss = 0.0;  // r_LT[0]
  double crossrange_miss = 0.0; // r_LT[1]
  double speed = 0.0;           // ||v_LT|| (m/s)
  double pitch_deg = 0.0;
  double roll_deg = 0.0;
  Eigen::Vector3d omega_deg = Eigen::Vector3d::Zero();  // deg/s
  double glideslope_deg = 0.0;
  double fuel_used = 0.0;       // kg
};

bool success_predicate(const TerminalMetrics& m);
double glideslope_deg(const Eigen::Vector3d& v_lt);

// Eq-level reward pieces, exposed for fixture tests.
double guidance_reward(const Eigen::Vector3d& v_err,
                       const Eigen::Vector3d& force_body, bool terminal_bonus,
                       bool attitude_violation, const RewardParams& p,
                       const ThrusterConfig& cfg);
double landing_terminal_gaussian(const Eigen::Vector3d& v_lt,
                                 const Eigen::Vector3d& v_l, double pitch_deg,
                                 double roll_deg,
                                 const Eigen::Vector3d& omega_deg,
                                 const RewardParams& p);
bool landing_terminal_success(const Eigen::Vector3d& v_lt, double pitch_deg,
                              double roll_deg,
                              const Eigen::Vector3d& omega_deg);

class Environment {
 public:
  explicit Environment(EpisodeConfig config,
                       EpisodeMode mode = EpisodeMode::kFull);

  StepResult reset(std::uint64_t seed);
  StepResult reset_landing(const LandingIC& ic, std::uint64_t seed);
  StepResult step(const Eigen::Vector4d& action);

  bool done() const { return done_; }
  Segment segment() const { return segment_; }
  TerminationReason reason() const { return reason_; }
  int steps() const { return step_count_; }
  const JointState& joint() const { return joint_; }
  const SeekerState& seeker() const { return seeker_; }
  const EngineState& engine() const { return engine_; }
  const Eigen::Vector3d& dls() const { return r_target_; }
  const EpisodeConfig& config() const { return config_; }
  double v_c0() const { return field_.v_c0; }
  int divert_count() const { return divert_count_; }

  Observation observe() const;
  TerminalMetrics terminal_metrics() const;
  LandingIC landing_ic() const;

 private:
  void sample_episode_models();
  StepResult make_initial_result();
  Eigen::Vector3d lagged_v_err() const;
  void enter_landing_segment();

  EpisodeConfig config_;
  EpisodeMode mode_;
  Rng rng_;

  JointState joint_;
  SeekerState seeker_;
  EngineState engine_;
  InertiaModel inertia_;
  ComModel com_;
  ThrusterConfig thrusters_;
  VelocityFieldParams field_;
  Eigen::Vector3d r_target_ = Eigen::Vector3d::Zero();
  std::array<bool, 4> divert_fired_{};
  int divert_count_ = 0;

  Segment segment_ = Segment::kGuidance;
  bool done_ = true;
  bool first_step_ = true;
  TerminationReason reason_ = TerminationReason::kNone;
  int step_count_ = 0;
};

}  // namespace lander

#endif  // LANDER_ENVIRONMENT_HPP_
