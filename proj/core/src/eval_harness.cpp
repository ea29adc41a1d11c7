#include "lander/eval_harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace lander {

namespace {

std::uint64_t eval_mix(std::uint64_t base, std::uint64_t i) {
  std::uint64_t x = base + 0x9e3779b97f4a7c15ULL * (i + 1);
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double angle_between_deg(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  const double na = a.norm(), nb = b.norm();
  if (na < 1e-12 || nb < 1e-12) return 0.0;
  const double c = std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
  return rad2deg(std::acos(c));
}

TrajectoryRow make_row(const StepInfo& info, const Eigen::Vector4d& action,
                       double reward) {
  TrajectoryRow row;
  row.t = info.t;
  row.r_l = info.lander.r_l;
  row.v_l = info.lander.v_l;
  row.q = info.lander.q;
  row.omega = info.lander.omega;
  row.mass = info.lander.mass;
  row.theta_u = info.seeker.theta_u;
  row.theta_v = info.seeker.theta_v;
  row.range = info.seeker.range;
  row.v_c = info.seeker.v_c;
  row.v_err = info.v_err;
  row.force_n = info.force_inertial;
  row.action = action;
  row.reward = reward;
  row.segment = info.segment == Segment::kGuidance ? 0 : 1;
  row.divert = info.diverted;
  row.platform_reset = info.platform_was_reset;
  // LOS angles between the boresight (platform w axis in the inertial
  // frame), the target-relative position, and the velocity.
  const Eigen::Vector3d boresight =
      rotate(info.platform_q0, Eigen::Vector3d::UnitZ());
  const Eigen::Vector3d r_tl = info.r_target - info.lander.r_l;
  row.theta_cv_deg = angle_between_deg(boresight, info.lander.v_l);
  row.theta_rv_deg = angle_between_deg(r_tl, info.lander.v_l);
  row.theta_cr_deg = angle_between_deg(boresight, r_tl);
  return row;
}

const char* kTrajectoryHeader =
    "t,rx,ry,rz,vx,vy,vz,q0,q1,q2,q3,wx,wy,wz,mass,theta_u,theta_v,range,"
    "v_c,v_err_x,v_err_y,v_err_z,fn_x,fn_y,fn_z,theta_cv,theta_rv,theta_cr,"
    "u0,u1,u2,u3,reward,segment,divert,platform_reset";

}  // namespace

EvalScenario parse_scenario(const std::string& label, int episodes,
                            std::uint64_t seed) {
  EvalScenario s;
  s.label = label;
  s.episodes = episodes;
  s.seed = seed;
  if (label == "Optim") {
    s.spec.kind = ScenarioKind::kOptim;
    return s;
  }
  const auto open = label.find('(');
  const auto close = label.rfind(')');
  if (open == std::string::npos || close == std::string::npos ||
      close <= open + 1) {
    throw std::runtime_error("parse_scenario: bad label '" + label + "'");
  }
  const std::string name = label.substr(0, open);
  double delta = 0.0;
  try {
    delta = std::stod(label.substr(open + 1, close - open - 1));
  } catch (const std::exception&) {
    throw std::runtime_error("parse_scenario: bad delta in '" + label + "'");
  }
  if (name == "AF") {
    s.spec.kind = ScenarioKind::kActuatorFailure;
  } else if (name == "MV") {
    s.spec.kind = ScenarioKind::kMassVariation;
  } else if (name == "dJ" || name == "dJdiag") {
    s.spec.kind = ScenarioKind::kInertiaVariation;
  } else {
    throw std::runtime_error("parse_scenario: unknown scenario '" + name +
                             "'");
  }
  s.spec.delta = delta;
  return s;
}

void apply_scenario(const EvalScenario& scenario, EpisodeConfig* config) {
  config->scenario = scenario.spec;
}

Stat mean_std(const std::vector<double>& xs) {
  Stat s;
  if (xs.empty()) return s;
  const double n = static_cast<double>(xs.size());
  for (double x : xs) s.mu += x;
  s.mu /= n;
  double var = 0.0;
  for (double x : xs) var += (x - s.mu) * (x - s.mu);
  s.sigma = std::sqrt(var / n);
  return s;
}

WorstAxis summarize_worst_axis(const std::vector<std::string>& labels,
                               const std::vector<std::vector<double>>& axes) {
  if (labels.empty() || labels.size() != axes.size()) {
    throw std::runtime_error("summarize_worst_axis: label/axis mismatch");
  }
  WorstAxis best;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const Stat st = mean_std(axes[i]);
    const double score = st.mu + st.sigma;
    if (score > best_score) {  // strict: ties keep the earliest axis
      best_score = score;
      best.label = labels[i];
      best.stat = st;
    }
  }
  return best;
}

EvalReport aggregate_report(const std::string& label,
                            const std::vector<TerminalRecord>& records) {
  EvalReport rep;
  rep.label = label;
  rep.episodes = static_cast<int>(records.size());
  std::vector<double> miss, speed, pitch, roll, gs, fuel;
  std::vector<std::vector<double>> omega(3);
  int successes = 0;
  for (const auto& rec : records) {
    miss.push_back(rec.metrics.miss);
    speed.push_back(rec.metrics.speed);
    pitch.push_back(std::abs(rec.metrics.pitch_deg));
    roll.push_back(std::abs(rec.metrics.roll_deg));
    gs.push_back(std::clamp(rec.metrics.glideslope_deg, 0.0, 90.0));
    fuel.push_back(rec.metrics.fuel_used);
    for (int k = 0; k < 3; ++k) {
      omega[k].push_back(std::abs(rec.metrics.omega_deg[k]));
    }
    if (rec.success) ++successes;
  }
  rep.miss = mean_std(miss);
  rep.speed = mean_std(speed);
  rep.attitude = summarize_worst_axis({"pitch", "roll"}, {pitch, roll});
  rep.omega = summarize_worst_axis({"wx", "wy", "wz"},
                                   {omega[0], omega[1], omega[2]});
  rep.glideslope = mean_std(gs);
  rep.fuel = mean_std(fuel);
  rep.success_rate =
      records.empty() ? 0.0
                      : static_cast<double>(successes) / records.size();
  return rep;
}

PolicyPair::PolicyPair(const Checkpoint& guidance, const Checkpoint& landing)
    : guidance_(guidance.policy_spec),
      landing_(landing.policy_spec),
      guidance_norm_(guidance.policy_spec.obs_dim),
      landing_norm_(landing.policy_spec.obs_dim) {
  if (guidance.phase != "guidance" || landing.phase != "landing") {
    throw std::runtime_error("PolicyPair: checkpoint phase mismatch");
  }
  if (guidance.policy_spec.obs_dim != kGuidanceObsDim ||
      landing.policy_spec.obs_dim != kLandingPolicyObsDim) {
    throw std::runtime_error("PolicyPair: unexpected observation dimension");
  }
  guidance_.net().params() = guidance.policy_params;
  guidance_.log_std() = guidance.log_std;
  guidance_norm_.restore(guidance.policy_norm_mean, guidance.policy_norm_var,
                         guidance.policy_norm_count);
  landing_.net().params() = landing.policy_params;
  landing_.log_std() = landing.log_std;
  landing_norm_.restore(landing.policy_norm_mean, landing.policy_norm_var,
                        landing.policy_norm_count);
}

EpisodeResult run_eval_episode(const EpisodeConfig& config,
                               const PolicyPair& policies, std::uint64_t seed,
                               bool record_trajectory) {
  Environment env(config, EpisodeMode::kFull);
  StepResult sr = env.reset(seed);

  EpisodeResult out;
  if (record_trajectory) {
    out.trajectory.push_back(
        make_row(sr.info, Eigen::Vector4d::Zero(), 0.0));
  }

  Eigen::VectorXd hidden_g = policies.guidance_policy().net().initial_hidden();
  Eigen::VectorXd hidden_l = policies.landing_policy().net().initial_hidden();

  while (!env.done()) {
    Eigen::VectorXd mean;
    if (env.segment() == Segment::kGuidance) {
      mean = policies.guidance_policy().net().forward(
          policies.guidance_norm().normalize(sr.obs.policy), hidden_g);
    } else {
      mean = policies.landing_policy().net().forward(
          policies.landing_norm().normalize(sr.obs.policy), hidden_l);
    }
    const Eigen::Vector4d action(mean);
    sr = env.step(action);
    if (record_trajectory) {
      out.trajectory.push_back(make_row(sr.info, action, sr.reward));
    }
  }

  out.terminal.seed = seed;
  out.terminal.metrics = env.terminal_metrics();
  out.terminal.success = env.reason() == TerminationReason::kGroundContact &&
                         success_predicate(out.terminal.metrics);
  out.terminal.reason = env.reason();
  out.terminal.steps = env.steps();
  return out;
}

EpisodeResult replay_actions(const EpisodeConfig& config, std::uint64_t seed,
                             const std::vector<Eigen::Vector4d>& actions) {
  Environment env(config, EpisodeMode::kFull);
  StepResult sr = env.reset(seed);
  EpisodeResult out;
  out.trajectory.push_back(make_row(sr.info, Eigen::Vector4d::Zero(), 0.0));
  std::size_t i = 0;
  while (!env.done() && i < actions.size()) {
    sr = env.step(actions[i]);
    out.trajectory.push_back(make_row(sr.info, actions[i], sr.reward));
    ++i;
  }
  out.terminal.seed = seed;
  out.terminal.metrics = env.terminal_metrics();
  out.terminal.reason = env.reason();
  out.terminal.steps = env.steps();
  out.terminal.success = env.reason() == TerminationReason::kGroundContact &&
                         success_predicate(out.terminal.metrics);
  return out;
}

std::vector<TerminalRecord> run_monte_carlo(const EvalScenario& scenario,
                                            const EpisodeConfig& base_config,
                                            const PolicyPair& policies,
                                            int workers) {
  EpisodeConfig config = base_config;
  apply_scenario(scenario, &config);

  std::vector<TerminalRecord> records(scenario.episodes);
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= scenario.episodes) break;
      const std::uint64_t seed = eval_mix(scenario.seed, i);
      records[i] =
          run_eval_episode(config, policies, seed, false).terminal;
    }
  };
  const int n_threads = std::clamp(
      workers > 0 ? workers
                  : static_cast<int>(std::thread::hardware_concurrency()),
      1, std::max(1, scenario.episodes));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(n_threads);
    for (int i = 0; i < n_threads; ++i) threads.emplace_back(worker);
    for (auto& th : threads) th.join();
  }
  return records;
}

void export_trajectory(const std::vector<TrajectoryRow>& rows,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("export_trajectory: cannot open " + path);
  out << kTrajectoryHeader << '\n';
  out << std::setprecision(17);
  for (const auto& r : rows) {
    out << r.t << ',' << r.r_l.x() << ',' << r.r_l.y() << ',' << r.r_l.z()
        << ',' << r.v_l.x() << ',' << r.v_l.y() << ',' << r.v_l.z() << ','
        << r.q.q0 << ',' << r.q.q1 << ',' << r.q.q2 << ',' << r.q.q3 << ','
        << r.omega.x() << ',' << r.omega.y() << ',' << r.omega.z() << ','
        << r.mass << ',' << r.theta_u << ',' << r.theta_v << ',' << r.range
        << ',' << r.v_c << ',' << r.v_err.x() << ',' << r.v_err.y() << ','
        << r.v_err.z() << ',' << r.force_n.x() << ',' << r.force_n.y() << ','
        << r.force_n.z() << ',' << r.theta_cv_deg << ',' << r.theta_rv_deg
        << ',' << r.theta_cr_deg << ',' << r.action[0] << ',' << r.action[1]
        << ',' << r.action[2] << ',' << r.action[3] << ',' << r.reward << ','
        << r.segment << ',' << (r.divert ? 1 : 0) << ','
        << (r.platform_reset ? 1 : 0) << '\n';
  }
  if (!out) throw std::runtime_error("export_trajectory: write failed");
}

std::vector<TrajectoryRow> load_trajectory(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_trajectory: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != kTrajectoryHeader) {
    throw std::runtime_error("load_trajectory: unexpected header in " + path);
  }
  std::vector<TrajectoryRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::vector<double> f;
    std::string tok;
    while (std::getline(ss, tok, ',')) f.push_back(std::stod(tok));
    if (f.size() != 36) {
      throw std::runtime_error("load_trajectory: malformed row in " + path);
    }
    TrajectoryRow r;
    int k = 0;
    r.t = f[k++];
    for (int i = 0; i < 3; ++i) r.r_l[i] = f[k++];
    for (int i = 0; i < 3; ++i) r.v_l[i] = f[k++];
    r.q.q0 = f[k++]; r.q.q1 = f[k++]; r.q.q2 = f[k++]; r.q.q3 = f[k++];
    for (int i = 0; i < 3; ++i) r.omega[i] = f[k++];
    r.mass = f[k++];
    r.theta_u = f[k++];
    r.theta_v = f[k++];
    r.range = f[k++];
    r.v_c = f[k++];
    for (int i = 0; i < 3; ++i) r.v_err[i] = f[k++];
    for (int i = 0; i < 3; ++i) r.force_n[i] = f[k++];
    r.theta_cv_deg = f[k++];
    r.theta_rv_deg = f[k++];
    r.theta_cr_deg = f[k++];
    for (int i = 0; i < 4; ++i) r.action[i] = f[k++];
    r.reward = f[k++];
    r.segment = static_cast<int>(f[k++]);
    r.divert = f[k++] != 0.0;
    r.platform_reset = f[k++] != 0.0;
    rows.push_back(r);
  }
  return rows;
}

void export_terminal_records(const std::vector<TerminalRecord>& records,
                             const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("export_terminal_records: cannot open " + path);
  }
  out << "seed,miss,downrange_miss,crossrange_miss,speed,pitch_deg,roll_deg,"
         "wx_deg,wy_deg,wz_deg,glideslope_deg,fuel_used,success,reason,"
         "steps\n";
  out << std::setprecision(17);
  for (const auto& r : records) {
    out << r.seed << ',' << r.metrics.miss << ',' << r.metrics.downrange_miss
        << ',' << r.metrics.crossrange_miss << ',' << r.metrics.speed << ','
        << r.metrics.pitch_deg << ',' << r.metrics.roll_deg << ','
        << r.metrics.omega_deg.x() << ',' << r.metrics.omega_deg.y() << ','
        << r.metrics.omega_deg.z() << ',' << r.metrics.glideslope_deg << ','
        << r.metrics.fuel_used << ',' << (r.success ? 1 : 0) << ','
        << static_cast<int>(r.reason) << ',' << r.steps << '\n';
  }
  if (!out) throw std::runtime_error("export_terminal_records: write failed");
}

void export_miss_scatter(const std::vector<TerminalRecord>& records,
                         const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("export_miss_scatter: cannot open " + path);
  }
  out << "downrange_miss,crossrange_miss\n";
  out << std::setprecision(17);
  for (const auto& r : records) {
    out << r.metrics.downrange_miss << ',' << r.metrics.crossrange_miss
        << '\n';
  }
  if (!out) throw std::runtime_error("export_miss_scatter: write failed");
}

void export_report(const std::vector<EvalReport>& reports,
                   const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("export_report: cannot open " + path);
  out << "scenario,episodes,miss_mu,miss_sigma,speed_mu,speed_sigma,"
         "attitude_axis,attitude_mu,attitude_sigma,omega_axis,omega_mu,"
         "omega_sigma,glideslope_mu,glideslope_sigma,fuel_mu,fuel_sigma,"
         "success_rate\n";
  out << std::setprecision(17);
  for (const auto& r : reports) {
    out << r.label << ',' << r.episodes << ',' << r.miss.mu << ','
        << r.miss.sigma << ',' << r.speed.mu << ',' << r.speed.sigma << ','
        << r.attitude.label << ',' << r.attitude.stat.mu << ','
        << r.attitude.stat.sigma << ',' << r.omega.label << ','
        << r.omega.stat.mu << ',' << r.omega.stat.sigma << ','
        << r.glideslope.mu << ',' << r.glideslope.sigma << ',' << r.fuel.mu
        << ',' << r.fuel.sigma << ',' << r.success_rate << '\n';
  }
  if (!out) throw std::runtime_error("export_report: write failed");
}

std::string format_report(const EvalReport& r) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << r.label << " (" << r.episodes << " episodes)\n"
     << "  miss        " << r.miss.mu << " +/- " << r.miss.sigma << " m\n"
     << "  speed       " << r.speed.mu << " +/- " << r.speed.sigma << " m/s\n"
     << "  attitude    " << r.attitude.stat.mu << " +/- "
     << r.attitude.stat.sigma << " deg (" << r.attitude.label << ")\n"
     << "  rate        " << r.omega.stat.mu << " +/- " << r.omega.stat.sigma
     << " deg/s (" << r.omega.label << ")\n"
     << "  glideslope  " << r.glideslope.mu << " +/- " << r.glideslope.sigma
     << " deg\n"
     << "  fuel        " << r.fuel.mu << " +/- " << r.fuel.sigma << " kg\n"
     << "  success     " << 100.0 * r.success_rate << " %\n";
  return os.str();
}

void write_run_manifest(const std::string& path, const std::string& command,
                        const EpisodeConfig& config, std::uint64_t seed,
                        const std::vector<std::string>& inputs) {
  nlohmann::json j;
  j["command"] = command;
  j["seed"] = seed;
  j["inputs"] = inputs;
  nlohmann::json c;
  c["downrange"] = {config.downrange_min, config.downrange_max};
  c["crossrange"] = {config.crossrange_min, config.crossrange_max};
  c["altitude"] = {config.altitude_min, config.altitude_max};
  c["speed"] = {config.speed_min, config.speed_max};
  c["heading_error_max_deg"] = config.heading_error_max_deg;
  c["attitude_error_max_deg"] = config.attitude_error_max_deg;
  c["mass_nominal"] = config.mass_nominal;
  c["mass_fraction"] = config.mass_fraction;
  c["dj_diag_bound"] = config.dj_diag_bound;
  c["dj_off_bound"] = config.dj_off_bound;
  c["tau_seeker"] = config.tau_seeker;
  c["tau_ctrl"] = config.tau_ctrl;
  c["com_alpha"] = config.com_alpha;
  c["tau_vref"] = config.tau_vref;
  c["platform_reset_period"] = config.platform_reset_period;
  c["divert_thresholds"] = config.divert_thresholds;
  c["segment_switch_altitude"] = config.segment_switch_altitude;
  c["max_steps"] = config.max_steps;
  c["scenario_kind"] = static_cast<int>(config.scenario.kind);
  c["scenario_delta"] = config.scenario.delta;
  j["episode_config"] = c;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_run_manifest: cannot open " + path);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write_run_manifest: write failed");
}

}  // namespace lander
