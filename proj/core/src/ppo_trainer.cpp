#include "lander/ppo_trainer.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace lander {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream) {
  return splitmix64(base * 0x100000001b3ULL + stream);
}

template <class F>
void zip_tensors(NetParams& a, const NetParams& b, F&& f) {
  f(a.w1, b.w1); f(a.b1, b.b1);
  f(a.wz, b.wz); f(a.uz, b.uz); f(a.bz, b.bz);
  f(a.wr, b.wr); f(a.ur, b.ur); f(a.br, b.br);
  f(a.wn, b.wn); f(a.un, b.un); f(a.bn, b.bn);
  f(a.w3, b.w3); f(a.b3, b.b3);
  f(a.wo, b.wo); f(a.bo, b.bo);
}

void accumulate(NetParams* acc, const NetParams& g) {
  zip_tensors(*acc, g, [](auto& a, const auto& b) { a += b; });
}

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

}  // namespace

Eigen::VectorXd discounted_returns(const Eigen::VectorXd& rewards,
                                   double gamma) {
  Eigen::VectorXd g(rewards.size());
  double acc = 0.0;
  for (Eigen::Index k = rewards.size() - 1; k >= 0; --k) {
    acc = rewards[k] + gamma * acc;
    g[k] = acc;
  }
  return g;
}

double clipped_surrogate_term(double ratio, double advantage, double eps) {
  const double clipped = std::clamp(ratio, 1.0 - eps, 1.0 + eps);
  return std::min(ratio * advantage, clipped * advantage);
}

bool surrogate_grad_active(double ratio, double advantage, double eps) {
  if (advantage > 0.0) return ratio <= 1.0 + eps;
  if (advantage < 0.0) return ratio >= 1.0 - eps;
  return false;
}

void kl_servo(double observed_kl, const TrainerConfig& cfg, ServoState* s) {
  if (observed_kl > 2.0 * cfg.kl_target) {
    s->lr *= 0.5;
    s->clip_eps *= 0.9;
  } else if (observed_kl < 0.5 * cfg.kl_target) {
    s->lr *= 1.5;
    s->clip_eps *= 1.1;
  }
  s->lr = std::clamp(s->lr, cfg.lr_min, cfg.lr_max);
  s->clip_eps = std::clamp(s->clip_eps, cfg.eps_min, cfg.eps_max);
}

AdamState AdamState::zeros(const NetworkSpec& spec) {
  AdamState s;
  s.m = NetParams::zeros(spec);
  s.v = NetParams::zeros(spec);
  s.m_logstd = Eigen::VectorXd::Zero(std::max(spec.act_dim, 0));
  s.v_logstd = Eigen::VectorXd::Zero(std::max(spec.act_dim, 0));
  return s;
}

void adam_step(NetParams* params, const NetParams& grads, AdamState* state,
               double lr) {
  ++state->t;
  const double bc1 = 1.0 - std::pow(kAdamBeta1, state->t);
  const double bc2 = 1.0 - std::pow(kAdamBeta2, state->t);
  auto update = [&](auto& p, const auto& g, auto& m, auto& v) {
    m = kAdamBeta1 * m + (1.0 - kAdamBeta1) * g;
    v = (kAdamBeta2 * v.array() + (1.0 - kAdamBeta2) * g.array().square())
            .matrix();
    p -= (lr * (m.array() / bc1) /
          ((v.array() / bc2).sqrt() + kAdamEps))
             .matrix();
  };
  update(params->w1, grads.w1, state->m.w1, state->v.w1);
  update(params->b1, grads.b1, state->m.b1, state->v.b1);
  update(params->wz, grads.wz, state->m.wz, state->v.wz);
  update(params->uz, grads.uz, state->m.uz, state->v.uz);
  update(params->bz, grads.bz, state->m.bz, state->v.bz);
  update(params->wr, grads.wr, state->m.wr, state->v.wr);
  update(params->ur, grads.ur, state->m.ur, state->v.ur);
  update(params->br, grads.br, state->m.br, state->v.br);
  update(params->wn, grads.wn, state->m.wn, state->v.wn);
  update(params->un, grads.un, state->m.un, state->v.un);
  update(params->bn, grads.bn, state->m.bn, state->v.bn);
  update(params->w3, grads.w3, state->m.w3, state->v.w3);
  update(params->b3, grads.b3, state->m.b3, state->v.b3);
  update(params->wo, grads.wo, state->m.wo, state->v.wo);
  update(params->bo, grads.bo, state->m.bo, state->v.bo);
}

void adam_step_vector(Eigen::VectorXd* params, const Eigen::VectorXd& grads,
                      Eigen::VectorXd* m, Eigen::VectorXd* v, std::int64_t t,
                      double lr) {
  const double bc1 = 1.0 - std::pow(kAdamBeta1, t);
  const double bc2 = 1.0 - std::pow(kAdamBeta2, t);
  *m = kAdamBeta1 * *m + (1.0 - kAdamBeta1) * grads;
  *v = (kAdamBeta2 * v->array() + (1.0 - kAdamBeta2) * grads.array().square())
           .matrix();
  *params -= (lr * (m->array() / bc1) /
              ((v->array() / bc2).sqrt() + kAdamEps))
                 .matrix();
}

PpoTrainer::PpoTrainer(Phase phase, EpisodeConfig env_config,
                       TrainerConfig config)
    : phase_(phase),
      env_config_(env_config),
      config_(config),
      policy_(phase == Phase::kGuidance
                  ? NetworkSpec::policy(kGuidanceObsDim, kActionDim)
                  : NetworkSpec::policy(kLandingPolicyObsDim, kActionDim)),
      value_(phase == Phase::kGuidance
                 ? NetworkSpec::value(kGuidanceObsDim)
                 : NetworkSpec::value(kLandingValueObsDim)),
      policy_norm_(policy_.net().spec().obs_dim),
      value_norm_(value_.spec().obs_dim),
      policy_adam_(AdamState::zeros(policy_.net().spec())),
      value_adam_(AdamState::zeros(value_.spec())),
      lr_value_(config.lr_value) {
  policy_servo_.clip_eps = config_.clip_eps;
  policy_servo_.lr = config_.lr_policy;
  Rng init_rng(mix_seed(config_.seed, 0x1217ULL));
  policy_.init_parameters(init_rng);
  value_.init_parameters(init_rng);
  if (config_.workers <= 0) {
    config_.workers =
        std::max(1u, std::thread::hardware_concurrency());
  }
}

void PpoTrainer::set_landing_pool(std::vector<LandingIC> pool) {
  landing_pool_ = std::move(pool);
}

EpisodeRollout PpoTrainer::run_episode(std::uint64_t episode_seed) const {
  const EpisodeMode mode = phase_ == Phase::kGuidance
                               ? EpisodeMode::kGuidanceOnly
                               : EpisodeMode::kLandingOnly;
  Environment env(env_config_, mode);
  Rng act_rng(mix_seed(episode_seed, 0xAC7ULL));

  StepResult sr;
  if (phase_ == Phase::kGuidance) {
    sr = env.reset(episode_seed);
  } else {
    if (landing_pool_.empty()) {
      throw std::runtime_error("PpoTrainer: landing pool not set");
    }
    Rng pool_rng(mix_seed(episode_seed, 0x9001ULL));
    const int idx =
        pool_rng.uniform_int(static_cast<int>(landing_pool_.size()));
    sr = env.reset_landing(landing_pool_[idx], episode_seed);
  }

  const int act_dim = policy_.net().spec().out_dim;
  const int max_steps = env_config_.max_steps;
  Eigen::MatrixXd pobs(max_steps, policy_.net().spec().obs_dim);
  Eigen::MatrixXd vobs(max_steps, value_.spec().obs_dim);
  Eigen::MatrixXd actions(max_steps, act_dim);
  Eigen::MatrixXd means(max_steps, act_dim);
  Eigen::VectorXd rewards(max_steps), logps(max_steps), values(max_steps);

  Eigen::VectorXd hidden_p = policy_.net().initial_hidden();
  Eigen::VectorXd hidden_v = value_.initial_hidden();

  int t = 0;
  while (!env.done() && t < max_steps) {
    const Eigen::VectorXd po = sr.obs.policy;
    const Eigen::VectorXd vo = sr.obs.value;
    const Eigen::VectorXd mean =
        policy_.net().forward(policy_norm_.normalize(po), hidden_p);
    const Eigen::VectorXd action = policy_.sample(mean, act_rng);
    const double logp = policy_.log_prob(mean, action);
    const double value =
        value_.forward(value_norm_.normalize(vo), hidden_v)[0];

    sr = env.step(Eigen::Vector4d(action));

    pobs.row(t) = po.transpose();
    vobs.row(t) = vo.transpose();
    actions.row(t) = action.transpose();
    means.row(t) = mean.transpose();
    rewards[t] = sr.reward;
    logps[t] = logp;
    values[t] = value;
    ++t;
  }

  EpisodeRollout out;
  out.steps = t;
  out.policy_obs = pobs.topRows(t);
  out.value_obs = vobs.topRows(t);
  out.actions = actions.topRows(t);
  out.old_means = means.topRows(t);
  out.rewards = rewards.head(t);
  out.old_logp = logps.head(t);
  out.values = values.head(t);
  out.reason = env.reason();
  out.terminal = env.terminal_metrics();
  return out;
}

RolloutBatch PpoTrainer::collect_rollouts(int n_episodes) {
  RolloutBatch batch;
  batch.episodes.resize(n_episodes);
  batch.old_log_std = policy_.log_std();
  std::atomic<int> next{0};
  std::atomic<int> aborted{0};

  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n_episodes) break;
      std::uint64_t seed =
          mix_seed(config_.seed, static_cast<std::uint64_t>(
                                     episodes_done_ + i));
      for (int attempt = 0;; ++attempt) {
        EpisodeRollout ep = run_episode(seed);
        if (ep.reason != TerminationReason::kNumericalFailure &&
            ep.steps > 0) {
          batch.episodes[i] = std::move(ep);
          break;
        }
        aborted.fetch_add(1);
        seed = mix_seed(seed, 0xF00DULL + attempt);
      }
    }
  };

  const int n_threads = std::min(config_.workers, n_episodes);
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(n_threads);
    for (int i = 0; i < n_threads; ++i) threads.emplace_back(worker);
    for (auto& th : threads) th.join();
  }
  batch.aborted_episodes = aborted.load();
  return batch;
}

BatchStats PpoTrainer::update(const RolloutBatch& batch) {
  const int n_eps = static_cast<int>(batch.episodes.size());
  std::int64_t total_steps = 0;
  for (const auto& ep : batch.episodes) total_steps += ep.steps;
  const double n = static_cast<double>(total_steps);

  // Returns and advantages.
  std::vector<Eigen::VectorXd> returns(n_eps), advantages(n_eps);
  double adv_mean = 0.0;
  for (int i = 0; i < n_eps; ++i) {
    returns[i] = discounted_returns(batch.episodes[i].rewards, config_.gamma);
    advantages[i] = returns[i] - batch.episodes[i].values;
    adv_mean += advantages[i].sum();
  }
  adv_mean /= n;
  if (config_.normalize_advantages) {
    double var = 0.0;
    for (const auto& a : advantages) {
      var += (a.array() - adv_mean).square().sum();
    }
    const double sd = std::sqrt(std::max(var / n, 1e-12));
    for (auto& a : advantages) {
      a = ((a.array() - adv_mean) / sd).matrix();
    }
  }

  // Pre-normalized observation matrices (normalizer frozen for the batch).
  std::vector<Eigen::MatrixXd> pxs(n_eps), vxs(n_eps);
  for (int i = 0; i < n_eps; ++i) {
    const auto& ep = batch.episodes[i];
    pxs[i].resize(ep.steps, policy_.net().spec().obs_dim);
    vxs[i].resize(ep.steps, value_.spec().obs_dim);
    for (int t = 0; t < ep.steps; ++t) {
      pxs[i].row(t) =
          policy_norm_.normalize(ep.policy_obs.row(t).transpose()).transpose();
      vxs[i].row(t) =
          value_norm_.normalize(ep.value_obs.row(t).transpose()).transpose();
    }
  }

  const double eps_clip = policy_servo_.clip_eps;
  double observed_kl = 0.0;
  bool skipped = false;

  for (int epoch = 0; epoch < config_.policy_epochs; ++epoch) {
    NetParams pgrad = NetParams::zeros(policy_.net().spec());
    Eigen::VectorXd lsgrad =
        Eigen::VectorXd::Zero(policy_.net().spec().out_dim);
    bool finite = true;
    for (int i = 0; i < n_eps && finite; ++i) {
      const auto& ep = batch.episodes[i];
      ForwardCache cache;
      const Eigen::MatrixXd means = policy_.net().forward_seq(pxs[i], &cache);
      Eigen::MatrixXd outgrad =
          Eigen::MatrixXd::Zero(ep.steps, means.cols());
      for (int t = 0; t < ep.steps; ++t) {
        const Eigen::VectorXd mean = means.row(t).transpose();
        const Eigen::VectorXd action = ep.actions.row(t).transpose();
        const double newlogp = policy_.log_prob(mean, action);
        const double ratio = std::exp(newlogp - ep.old_logp[t]);
        if (!std::isfinite(ratio)) {
          finite = false;
          break;
        }
        const double adv = advantages[i][t];
        if (!surrogate_grad_active(ratio, adv, eps_clip)) continue;
        const double coeff = ratio * adv / n;
        // Ascent on J realized as descent on -J.
        outgrad.row(t) =
            (-coeff * policy_.dlogp_dmean(mean, action)).transpose();
        lsgrad += -coeff * policy_.dlogp_dlogstd(mean, action);
      }
      if (!finite) break;
      accumulate(&pgrad, policy_.net().backward_seq(cache, outgrad));
    }
    if (!finite) {
      // Non-finite ratio: skip the update and back the learning rate off.
      policy_servo_.lr = std::max(policy_servo_.lr * 0.5, config_.lr_min);
      skipped = true;
      break;
    }
    if (config_.use_adam) {
      adam_step(&policy_.net().params(), pgrad, &policy_adam_,
                policy_servo_.lr);
      adam_step_vector(&policy_.log_std(), lsgrad, &policy_adam_.m_logstd,
                       &policy_adam_.v_logstd, policy_adam_.t,
                       policy_servo_.lr);
    } else {
      zip_tensors(policy_.net().params(), pgrad,
                  [&](auto& p, const auto& g) { p -= policy_servo_.lr * g; });
      policy_.log_std() -= policy_servo_.lr * lsgrad;
    }
    policy_.clamp_log_std();

    // Empirical KL against the collection-time policy.
    observed_kl = 0.0;
    for (int i = 0; i < n_eps; ++i) {
      const auto& ep = batch.episodes[i];
      const Eigen::MatrixXd means = policy_.net().forward_seq(pxs[i]);
      for (int t = 0; t < ep.steps; ++t) {
        observed_kl += GaussianPolicy::kl(
            ep.old_means.row(t).transpose(), batch.old_log_std,
            means.row(t).transpose(), policy_.log_std());
      }
    }
    observed_kl /= n;
    if (observed_kl > 4.0 * config_.kl_target) break;
  }
  if (!skipped) {
    kl_servo(observed_kl, config_, &policy_servo_);
  }

  // Value function: descent on the mean-squared-error cost.
  for (int epoch = 0; epoch < config_.value_epochs; ++epoch) {
    NetParams vgrad = NetParams::zeros(value_.spec());
    for (int i = 0; i < n_eps; ++i) {
      const auto& ep = batch.episodes[i];
      ForwardCache cache;
      const Eigen::MatrixXd v = value_.forward_seq(vxs[i], &cache);
      Eigen::MatrixXd outgrad(ep.steps, 1);
      for (int t = 0; t < ep.steps; ++t) {
        outgrad(t, 0) = (v(t, 0) - returns[i][t]) / n;
      }
      accumulate(&vgrad, value_.backward_seq(cache, outgrad));
    }
    if (config_.use_adam) {
      adam_step(&value_.params(), vgrad, &value_adam_, lr_value_);
    } else {
      zip_tensors(value_.params(), vgrad,
                  [&](auto& p, const auto& g) { p -= lr_value_ * g; });
    }
  }

  // Normalizer state advances only between batches.
  std::vector<Eigen::VectorXd> pobs_all, vobs_all;
  pobs_all.reserve(total_steps);
  vobs_all.reserve(total_steps);
  for (const auto& ep : batch.episodes) {
    for (int t = 0; t < ep.steps; ++t) {
      pobs_all.push_back(ep.policy_obs.row(t).transpose());
      vobs_all.push_back(ep.value_obs.row(t).transpose());
    }
  }
  policy_norm_.update(pobs_all);
  value_norm_.update(vobs_all);

  episodes_done_ += n_eps;

  // Batch statistics (per-episode total reward, steps, terminal metrics).
  BatchStats st;
  st.episodes_done = episodes_done_;
  Eigen::VectorXd ep_rewards(n_eps), ep_miss(n_eps), ep_speed(n_eps);
  st.steps_max = 0;
  for (int i = 0; i < n_eps; ++i) {
    ep_rewards[i] = batch.episodes[i].rewards.sum();
    ep_miss[i] = batch.episodes[i].terminal.miss;
    ep_speed[i] = batch.episodes[i].terminal.speed;
    st.steps_mean += batch.episodes[i].steps;
    st.steps_max = std::max(st.steps_max, batch.episodes[i].steps);
  }
  st.steps_mean /= n_eps;
  auto mean_std = [](const Eigen::VectorXd& x, double* mu, double* sd) {
    *mu = x.mean();
    *sd = std::sqrt((x.array() - *mu).square().sum() /
                    std::max<int>(1, static_cast<int>(x.size())));
  };
  mean_std(ep_rewards, &st.reward_mean, &st.reward_std);
  st.reward_min = ep_rewards.minCoeff();
  mean_std(ep_miss, &st.miss_mean, &st.miss_std);
  mean_std(ep_speed, &st.speed_mean, &st.speed_std);
  st.kl = observed_kl;
  st.clip_eps = policy_servo_.clip_eps;
  st.lr_policy = policy_servo_.lr;
  return st;
}

bool PpoTrainer::train(const std::string& log_path,
                       const std::string& checkpoint_path,
                       const std::function<void(const BatchStats&)>& on_batch) {
  std::ofstream log(log_path, std::ios::app);
  if (!log) throw std::runtime_error("PpoTrainer: cannot open " + log_path);
  if (episodes_done_ == 0) {
    log << "episodes,reward_mean,reward_std,reward_min,steps_mean,steps_max,"
           "miss_mean,miss_std,speed_mean,speed_std,kl,clip_eps,lr_policy\n";
  }

  int batches = 0;
  while (episodes_done_ < config_.total_episodes) {
    const int want = static_cast<int>(
        std::min<std::int64_t>(config_.rollout_episodes,
                               config_.total_episodes - episodes_done_));
    RolloutBatch batch = collect_rollouts(want);
    const BatchStats st = update(batch);
    log << st.episodes_done << ',' << st.reward_mean << ',' << st.reward_std
        << ',' << st.reward_min << ',' << st.steps_mean << ',' << st.steps_max
        << ',' << st.miss_mean << ',' << st.miss_std << ',' << st.speed_mean
        << ',' << st.speed_std << ',' << st.kl << ',' << st.clip_eps << ','
        << st.lr_policy << '\n';
    log.flush();
    if (on_batch) on_batch(st);
    if (!std::isfinite(st.reward_mean)) {
      return false;  // divergence detector
    }
    ++batches;
    if (!checkpoint_path.empty() &&
        (batches % config_.checkpoint_interval == 0)) {
      make_checkpoint().save(checkpoint_path);
      save_trainer_state(checkpoint_path + ".state");
    }
  }
  if (!checkpoint_path.empty()) {
    make_checkpoint().save(checkpoint_path);
    save_trainer_state(checkpoint_path + ".state");
  }
  return true;
}

Checkpoint PpoTrainer::make_checkpoint() const {
  Checkpoint c;
  c.phase = phase_ == Phase::kGuidance ? "guidance" : "landing";
  c.policy_spec = policy_.net().spec();
  c.policy_params = policy_.net().params();
  c.log_std = policy_.log_std();
  c.policy_norm_mean = policy_norm_.mean();
  c.policy_norm_var = policy_norm_.var();
  c.policy_norm_count = policy_norm_.count();
  c.value_spec = value_.spec();
  c.value_params = value_.params();
  c.value_norm_mean = value_norm_.mean();
  c.value_norm_var = value_norm_.var();
  c.value_norm_count = value_norm_.count();
  return c;
}

void PpoTrainer::restore(const Checkpoint& ckpt) {
  if (!(ckpt.policy_spec == policy_.net().spec()) ||
      !(ckpt.value_spec == value_.spec())) {
    throw std::runtime_error("PpoTrainer::restore: checkpoint spec mismatch");
  }
  policy_.net().params() = ckpt.policy_params;
  policy_.log_std() = ckpt.log_std;
  policy_norm_.restore(ckpt.policy_norm_mean, ckpt.policy_norm_var,
                       ckpt.policy_norm_count);
  value_.params() = ckpt.value_params;
  value_norm_.restore(ckpt.value_norm_mean, ckpt.value_norm_var,
                      ckpt.value_norm_count);
}

void PpoTrainer::save_trainer_state(const std::string& path) const {
  nlohmann::json j;
  j["episodes_done"] = episodes_done_;
  j["clip_eps"] = policy_servo_.clip_eps;
  j["lr_policy"] = policy_servo_.lr;
  j["lr_value"] = lr_value_;
  j["adam_t_policy"] = policy_adam_.t;
  j["adam_t_value"] = value_adam_.t;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_trainer_state: cannot open " + path);
  out << j.dump();
}

bool PpoTrainer::load_trainer_state(const std::string& path) {
  std::ifstream in(path);
  if (!in) return false;
  nlohmann::json j;
  in >> j;
  episodes_done_ = j.at("episodes_done");
  policy_servo_.clip_eps = j.at("clip_eps");
  policy_servo_.lr = j.at("lr_policy");
  lr_value_ = j.at("lr_value");
  policy_adam_.t = j.at("adam_t_policy");
  value_adam_.t = j.at("adam_t_value");
  return true;
}

std::vector<LandingIC> build_landing_pool(const Checkpoint& guidance,
                                          const EpisodeConfig& env_config,
                                          int n_episodes, std::uint64_t seed,
                                          int workers) {
  if (guidance.phase != "guidance") {
    throw std::runtime_error("build_landing_pool: not a guidance checkpoint");
  }
  GaussianPolicy policy(guidance.policy_spec);
  policy.net().params() = guidance.policy_params;
  policy.log_std() = guidance.log_std;
  ObsNormalizer norm(guidance.policy_spec.obs_dim);
  norm.restore(guidance.policy_norm_mean, guidance.policy_norm_var,
               guidance.policy_norm_count);

  const int max_attempts = 3 * n_episodes;
  std::vector<std::optional<LandingIC>> results(max_attempts);
  std::atomic<int> next{0};
  std::atomic<int> collected{0};

  auto run_one = [&](int idx) {
    Environment env(env_config, EpisodeMode::kGuidanceOnly);
    StepResult sr = env.reset(mix_seed(seed, idx));
    Eigen::VectorXd hidden = policy.net().initial_hidden();
    while (!env.done()) {
      const Eigen::VectorXd mean =
          policy.net().forward(norm.normalize(sr.obs.policy), hidden);
      sr = env.step(Eigen::Vector4d(mean));
    }
    if (env.reason() == TerminationReason::kGuidanceExit) {
      results[idx] = env.landing_ic();
      collected.fetch_add(1);
    }
  };

  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= max_attempts || collected.load() >= n_episodes) break;
      run_one(i);
    }
  };
  const int n_threads = std::max(1, workers);
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int i = 0; i < n_threads; ++i) threads.emplace_back(worker);
    for (auto& th : threads) th.join();
  }

  std::vector<LandingIC> pool;
  pool.reserve(n_episodes);
  for (const auto& r : results) {
    if (r && static_cast<int>(pool.size()) < n_episodes) pool.push_back(*r);
  }
  if (pool.empty()) {
    throw std::runtime_error(
        "build_landing_pool: no episodes reached the segment boundary");
  }
  return pool;
}

void save_landing_pool(const std::vector<LandingIC>& pool,
                       const std::string& path) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& ic : pool) {
    arr.push_back({{"r_lt", {ic.r_lt.x(), ic.r_lt.y(), ic.r_lt.z()}},
                   {"v_l", {ic.v_l.x(), ic.v_l.y(), ic.v_l.z()}},
                   {"q", {ic.q.q0, ic.q.q1, ic.q.q2, ic.q.q3}},
                   {"omega", {ic.omega.x(), ic.omega.y(), ic.omega.z()}},
                   {"mass", ic.mass},
                   {"fuel_used", ic.fuel_used}});
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_landing_pool: cannot open " + path);
  out << arr.dump();
}

std::vector<LandingIC> load_landing_pool(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_landing_pool: cannot open " + path);
  nlohmann::json arr;
  in >> arr;
  std::vector<LandingIC> pool;
  pool.reserve(arr.size());
  for (const auto& j : arr) {
    LandingIC ic;
    for (int i = 0; i < 3; ++i) {
      ic.r_lt[i] = j.at("r_lt")[i].get<double>();
      ic.v_l[i] = j.at("v_l")[i].get<double>();
      ic.omega[i] = j.at("omega")[i].get<double>();
    }
    ic.q.q0 = j.at("q")[0].get<double>();
    ic.q.q1 = j.at("q")[1].get<double>();
    ic.q.q2 = j.at("q")[2].get<double>();
    ic.q.q3 = j.at("q")[3].get<double>();
    ic.mass = j.at("mass");
    ic.fuel_used = j.at("fuel_used");
    pool.push_back(ic);
  }
  return pool;
}

}  // namespace lander
