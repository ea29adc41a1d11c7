#ifndef LANDER_EVAL_HARNESS_HPP_
#define LANDER_EVAL_HARNESS_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lander/environment.hpp"
#include "lander/networks.hpp"

namespace lander {

// Named evaluation scenario: the nominal dispersion set plus one optional
// stress modifier (engine failure, mass variation, inertia variation).
struct EvalScenario {
  std::string label = "Optim";  // "Optim", "AF(d)", "MV(d)", "dJ(d)"
  ScenarioSpec spec;
  int episodes = 5000;
  std::uint64_t seed = 0;
};

// Parses "Optim", "AF(0.7)", "MV(0.05)", "dJ(100)" style labels.
EvalScenario parse_scenario(const std::string& label, int episodes,
                            std::uint64_t seed);
// Applies the scenario modifier to an episode configuration.
void apply_scenario(const EvalScenario& scenario, EpisodeConfig* config);

// Terminal outcome of one evaluated episode.
struct TerminalRecord {
  std::uint64_t seed = 0;
  TerminalMetrics metrics;
  bool success = false;
  TerminationReason reason = TerminationReason::kNone;
  int steps = 0;
};

struct Stat {
  double mu = 0.0;
  double sigma = 0.0;
};
Stat mean_std(const std::vector<double>& xs);

// Axis with the largest mu + sigma; ties break toward the earliest label.
struct WorstAxis {
  std::string label;
  Stat stat;
};
WorstAxis summarize_worst_axis(const std::vector<std::string>& labels,
                               const std::vector<std::vector<double>>& axes);

// One row of summary statistics over a scenario's terminal records.
struct EvalReport {
  std::string label;
  int episodes = 0;
  Stat miss;          // m
  Stat speed;         // m/s
  WorstAxis attitude; // worst of |pitch|, |roll| (deg)
  WorstAxis omega;    // worst |omega| component (deg/s)
  Stat glideslope;    // deg, clamped to [0, 90]
  Stat fuel;          // kg
  double success_rate = 0.0;  // successes / episodes
};
EvalReport aggregate_report(const std::string& label,
                            const std::vector<TerminalRecord>& records);

// Mean-action policy pair driving a full two-segment episode.
class PolicyPair {
 public:
  PolicyPair(const Checkpoint& guidance, const Checkpoint& landing);

  const GaussianPolicy& guidance_policy() const { return guidance_; }
  const GaussianPolicy& landing_policy() const { return landing_; }
  const ObsNormalizer& guidance_norm() const { return guidance_norm_; }
  const ObsNormalizer& landing_norm() const { return landing_norm_; }

 private:
  GaussianPolicy guidance_;
  GaussianPolicy landing_;
  ObsNormalizer guidance_norm_;
  ObsNormalizer landing_norm_;
};

// Per-step trajectory record mirroring the CSV schema.
struct TrajectoryRow {
  double t = 0.0;
  Eigen::Vector3d r_l = Eigen::Vector3d::Zero();
  Eigen::Vector3d v_l = Eigen::Vector3d::Zero();
  Quaternion q;
  Eigen::Vector3d omega = Eigen::Vector3d::Zero();
  double mass = 0.0;
  double theta_u = 0.0, theta_v = 0.0;
  double range = 0.0, v_c = 0.0;
  Eigen::Vector3d v_err = Eigen::Vector3d::Zero();
  Eigen::Vector3d force_n = Eigen::Vector3d::Zero();
  double theta_cv_deg = 0.0, theta_rv_deg = 0.0, theta_cr_deg = 0.0;
  Eigen::Vector4d action = Eigen::Vector4d::Zero();
  double reward = 0.0;
  int segment = 0;
  bool divert = false;
  bool platform_reset = false;
};

struct EpisodeResult {
  TerminalRecord terminal;
  std::vector<TrajectoryRow> trajectory;  // populated when requested
};

// Runs one full (guidance + landing) episode under the mean actions.
EpisodeResult run_eval_episode(const EpisodeConfig& config,
                               const PolicyPair& policies, std::uint64_t seed,
                               bool record_trajectory);

// Re-executes a logged action sequence from the same seed. With the
// original seed and actions this regenerates the original rows exactly.
EpisodeResult replay_actions(const EpisodeConfig& config, std::uint64_t seed,
                             const std::vector<Eigen::Vector4d>& actions);

// Monte Carlo evaluation over one scenario; episode-parallel with a
// deterministic reduction order.
std::vector<TerminalRecord> run_monte_carlo(const EvalScenario& scenario,
                                            const EpisodeConfig& base_config,
                                            const PolicyPair& policies,
                                            int workers);

// CSV / manifest exporters. All throw std::runtime_error on write failure.
void export_trajectory(const std::vector<TrajectoryRow>& rows,
                       const std::string& path);
std::vector<TrajectoryRow> load_trajectory(const std::string& path);
void export_terminal_records(const std::vector<TerminalRecord>& records,
                             const std::string& path);
void export_miss_scatter(const std::vector<TerminalRecord>& records,
                         const std::string& path);
void export_report(const std::vector<EvalReport>& reports,
                   const std::string& path);
std::string format_report(const EvalReport& report);
void write_run_manifest(const std::string& path, const std::string& command,
                        const EpisodeConfig& config, std::uint64_t seed,
                        const std::vector<std::string>& inputs);

}  // namespace lander

#endif  // LANDER_EVAL_HARNESS_HPP_
