#ifndef LANDER_PPO_TRAINER_HPP_
#define LANDER_PPO_TRAINER_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lander/environment.hpp"
#include "lander/networks.hpp"

namespace lander {

enum class Phase { kGuidance, kLanding };

struct TrainerConfig {
  double gamma = 0.995;
  double clip_eps = 0.2;
  double lr_policy = 3e-4;
  double lr_value = 1e-3;
  double kl_target = 0.001;
  int policy_epochs = 3;
  int value_epochs = 10;
  int rollout_episodes = 60;     // 120 for the landing phase
  std::int64_t total_episodes = 60000;
  int workers = 0;               // 0: hardware concurrency
  bool normalize_advantages = true;
  bool use_adam = true;          // plain gradient steps when false
  double lr_min = 1e-6, lr_max = 1e-2;
  double eps_min = 0.05, eps_max = 0.5;
  std::uint64_t seed = 0;
  int checkpoint_interval = 50;  // batches
};

// One complete episode of experience under a frozen policy.
struct EpisodeRollout {
  Eigen::MatrixXd policy_obs;  // T x obs_dim, raw (un-normalized)
  Eigen::MatrixXd value_obs;   // T x value_obs_dim, raw
  Eigen::MatrixXd actions;     // T x act_dim
  Eigen::MatrixXd old_means;   // T x act_dim (for the KL estimate)
  Eigen::VectorXd rewards;
  Eigen::VectorXd old_logp;
  Eigen::VectorXd values;
  TerminationReason reason = TerminationReason::kNone;
  TerminalMetrics terminal;
  int steps = 0;
};

struct RolloutBatch {
  std::vector<EpisodeRollout> episodes;
  Eigen::VectorXd old_log_std;  // policy log-std at collection time
  int aborted_episodes = 0;     // resampled due to numerical failure
};

struct BatchStats {
  std::int64_t episodes_done = 0;
  double reward_mean = 0.0, reward_std = 0.0, reward_min = 0.0;
  double steps_mean = 0.0;
  int steps_max = 0;
  double miss_mean = 0.0, miss_std = 0.0;
  double speed_mean = 0.0, speed_std = 0.0;
  double kl = 0.0;
  double clip_eps = 0.0, lr_policy = 0.0;
};

// Discounted empirical return G_k = sum_{l>=k} gamma^{l-k} r_l.
Eigen::VectorXd discounted_returns(const Eigen::VectorXd& rewards,
                                   double gamma);

// One term of the clipped surrogate, min(p A, clip(p, 1-eps, 1+eps) A).
double clipped_surrogate_term(double ratio, double advantage, double eps);
// Whether the surrogate gradient is nonzero at this (ratio, advantage).
bool surrogate_grad_active(double ratio, double advantage, double eps);

// Adaptive servo of the clip parameter and learning rate toward kl_target.
struct ServoState {
  double clip_eps = 0.2;
  double lr = 3e-4;
};
void kl_servo(double observed_kl, const TrainerConfig& cfg, ServoState* s);

// Adam moments for one network's parameter set.
struct AdamState {
  NetParams m, v;
  Eigen::VectorXd m_logstd, v_logstd;
  std::int64_t t = 0;

  static AdamState zeros(const NetworkSpec& spec);
};
void adam_step(NetParams* params, const NetParams& grads, AdamState* state,
               double lr);
void adam_step_vector(Eigen::VectorXd* params, const Eigen::VectorXd& grads,
                      Eigen::VectorXd* m, Eigen::VectorXd* v, std::int64_t t,
                      double lr);

class PpoTrainer {
 public:
  PpoTrainer(Phase phase, EpisodeConfig env_config, TrainerConfig config);

  // Landing phase: pool of guidance-terminal states sampled uniformly with
  // replacement as initial conditions.
  void set_landing_pool(std::vector<LandingIC> pool);

  GaussianPolicy& policy() { return policy_; }
  RecurrentNetwork& value_net() { return value_; }
  ObsNormalizer& policy_normalizer() { return policy_norm_; }
  ObsNormalizer& value_normalizer() { return value_norm_; }
  std::int64_t episodes_done() const { return episodes_done_; }

  RolloutBatch collect_rollouts(int n_episodes);
  BatchStats update(const RolloutBatch& batch);

  // Alternates collect/update until the episode budget. Appends one CSV
  // row per batch to log_path; writes checkpoints to checkpoint_path.
  // Returns false if the divergence detector halted the run.
  bool train(const std::string& log_path, const std::string& checkpoint_path,
             const std::function<void(const BatchStats&)>& on_batch = {});

  Checkpoint make_checkpoint() const;
  void restore(const Checkpoint& ckpt);

  // Resumable trainer state (episode counter, servo, Adam moments).
  void save_trainer_state(const std::string& path) const;
  bool load_trainer_state(const std::string& path);

 private:
  EpisodeRollout run_episode(std::uint64_t episode_seed) const;

  Phase phase_;
  EpisodeConfig env_config_;
  TrainerConfig config_;
  GaussianPolicy policy_;
  RecurrentNetwork value_;
  ObsNormalizer policy_norm_;
  ObsNormalizer value_norm_;
  AdamState policy_adam_;
  AdamState value_adam_;
  ServoState policy_servo_;
  double lr_value_ = 1e-3;
  std::int64_t episodes_done_ = 0;
  std::vector<LandingIC> landing_pool_;
};

// Runs the guidance policy (mean action) for n episodes and returns the
// segment-boundary states, every entry satisfying r_LT[2] < 5 m.
std::vector<LandingIC> build_landing_pool(const Checkpoint& guidance,
                                          const EpisodeConfig& env_config,
                                          int n_episodes, std::uint64_t seed,
                                          int workers);

void save_landing_pool(const std::vector<LandingIC>& pool,
                       const std::string& path);
std::vector<LandingIC> load_landing_pool(const std::string& path);

}  // namespace lander

#endif  // LANDER_PPO_TRAINER_HPP_
