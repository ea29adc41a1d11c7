// Command-line front end: training, evaluation, and single-episode
// simulation for the powered-descent stack.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "lander/eval_harness.hpp"
#include "lander/ppo_trainer.hpp"
#include "lander/run_config.hpp"

namespace fs = std::filesystem;
using namespace lander;

namespace {

RunConfig load_or_default(const std::string& config_path) {
  if (config_path.empty()) return default_run_config();
  return load_run_config(config_path);
}

// Untrained stand-in checkpoint so `simulate` works before any training.
Checkpoint fresh_checkpoint(Phase phase, std::uint64_t seed) {
  const NetworkSpec pspec =
      phase == Phase::kGuidance
          ? NetworkSpec::policy(kGuidanceObsDim, kActionDim)
          : NetworkSpec::policy(kLandingPolicyObsDim, kActionDim);
  const NetworkSpec vspec = phase == Phase::kGuidance
                                ? NetworkSpec::value(kGuidanceObsDim)
                                : NetworkSpec::value(kLandingValueObsDim);
  GaussianPolicy policy(pspec);
  RecurrentNetwork value(vspec);
  Rng rng(seed);
  policy.init_parameters(rng);
  value.init_parameters(rng);

  Checkpoint c;
  c.phase = phase == Phase::kGuidance ? "guidance" : "landing";
  c.policy_spec = pspec;
  c.policy_params = policy.net().params();
  c.log_std = policy.log_std();
  c.policy_norm_mean = Eigen::VectorXd::Zero(pspec.obs_dim);
  c.policy_norm_var = Eigen::VectorXd::Ones(pspec.obs_dim);
  c.policy_norm_count = 0.0;
  c.value_spec = vspec;
  c.value_params = value.params();
  c.value_norm_mean = Eigen::VectorXd::Zero(vspec.obs_dim);
  c.value_norm_var = Eigen::VectorXd::Ones(vspec.obs_dim);
  c.value_norm_count = 0.0;
  return c;
}

void require_readable(const std::string& path, const std::string& what) {
  if (!fs::exists(path)) {
    throw std::runtime_error(what + " not found: " + path);
  }
}

int run_training(Phase phase, const std::string& config_path,
                 std::uint64_t seed, std::int64_t episodes, int workers,
                 const std::string& out_dir, const std::string& pool_path,
                 bool resume) {
  RunConfig run = load_or_default(config_path);
  TrainerConfig tc =
      phase == Phase::kGuidance ? run.guidance_trainer : run.landing_trainer;
  tc.seed = seed;
  if (episodes > 0) tc.total_episodes = episodes;
  if (workers >= 0) tc.workers = workers;

  fs::create_directories(out_dir);
  const std::string tag =
      phase == Phase::kGuidance ? "guidance" : "landing";
  const std::string ckpt_path = out_dir + "/" + tag + "_checkpoint.json";
  const std::string log_path = out_dir + "/" + tag + "_learning.csv";

  PpoTrainer trainer(phase, run.episode, tc);
  if (phase == Phase::kLanding) {
    require_readable(pool_path, "landing IC pool");
    trainer.set_landing_pool(load_landing_pool(pool_path));
  }
  if (resume) {
    require_readable(ckpt_path, "checkpoint");
    trainer.restore(Checkpoint::load(ckpt_path));
    trainer.load_trainer_state(ckpt_path + ".state");
  }
  write_run_manifest(out_dir + "/" + tag + "_manifest.json",
                     "train-" + tag, run.episode, seed,
                     pool_path.empty() ? std::vector<std::string>{}
                                       : std::vector<std::string>{pool_path});

  const bool ok = trainer.train(log_path, ckpt_path, [](const BatchStats& s) {
    std::cout << "episodes " << s.episodes_done << "  reward "
              << s.reward_mean << " +/- " << s.reward_std << "  kl " << s.kl
              << "  lr " << s.lr_policy << std::endl;
  });
  if (!ok) {
    std::cerr << "training halted: non-finite batch reward" << std::endl;
    return 2;
  }
  std::cout << "checkpoint written to " << ckpt_path << std::endl;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Six-DOF powered-descent simulation, training, and "
               "evaluation"};
  app.require_subcommand(1);

  std::string config_path, out, out_dir = "runs", pool_path, ckpt_g, ckpt_l;
  std::string scenario_label = "Optim";
  std::string in_path;
  std::uint64_t seed = 0;
  std::int64_t episodes = 0;
  int workers = -1;
  bool resume = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "Run-configuration JSON file");
    cmd->add_option("--seed", seed, "Master seed");
    cmd->add_option("--workers", workers,
                    "Worker threads (0 = hardware concurrency)");
  };

  auto* tg = app.add_subcommand("train-guidance",
                                "Train the guidance-segment policy");
  add_common(tg);
  tg->add_option("--episodes", episodes, "Episode budget override");
  tg->add_option("--out", out_dir, "Output directory");
  tg->add_flag("--resume", resume, "Resume from the checkpoint in --out");

  auto* tl = app.add_subcommand("train-landing",
                                "Train the landing-segment policy");
  add_common(tl);
  tl->add_option("--episodes", episodes, "Episode budget override");
  tl->add_option("--out", out_dir, "Output directory");
  tl->add_option("--pool", pool_path, "Landing IC pool JSON")->required();
  tl->add_flag("--resume", resume, "Resume from the checkpoint in --out");

  auto* bp = app.add_subcommand(
      "build-ic-pool", "Collect guidance-exit states for landing training");
  add_common(bp);
  bp->add_option("--checkpoint", ckpt_g, "Guidance checkpoint")->required();
  bp->add_option("--episodes", episodes, "Pool size override");
  bp->add_option("--out", out, "Output pool JSON")->required();

  auto* ev = app.add_subcommand("evaluate", "Monte Carlo evaluation");
  add_common(ev);
  ev->add_option("--guidance-checkpoint", ckpt_g, "Guidance checkpoint")
      ->required();
  ev->add_option("--landing-checkpoint", ckpt_l, "Landing checkpoint")
      ->required();
  ev->add_option("--scenario", scenario_label,
                 "Scenario label: Optim, AF(d), MV(d), dJ(d)");
  ev->add_option("--episodes", episodes, "Episode count override");
  ev->add_option("--out", out_dir, "Output directory");

  auto* sim = app.add_subcommand("simulate", "Run and log a single episode");
  add_common(sim);
  sim->add_option("--guidance-checkpoint", ckpt_g,
                  "Guidance checkpoint (fresh policy when omitted)");
  sim->add_option("--landing-checkpoint", ckpt_l,
                  "Landing checkpoint (fresh policy when omitted)");
  sim->add_option("--scenario", scenario_label, "Scenario label");
  sim->add_option("--out", out, "Trajectory CSV path")->required();

  auto* rp = app.add_subcommand("replay",
                                "Re-run the logged actions of a trajectory");
  add_common(rp);
  rp->add_option("--in", in_path, "Trajectory CSV to replay")->required();
  rp->add_option("--scenario", scenario_label, "Scenario label");
  rp->add_option("--out", out, "Replayed trajectory CSV path")->required();

  auto* ic = app.add_subcommand("init-config",
                                "Write the default run configuration");
  ic->add_option("--out", out, "Destination JSON path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (tg->parsed()) {
      return run_training(Phase::kGuidance, config_path, seed, episodes,
                          workers, out_dir, "", resume);
    }
    if (tl->parsed()) {
      return run_training(Phase::kLanding, config_path, seed, episodes,
                          workers, out_dir, pool_path, resume);
    }
    if (bp->parsed()) {
      RunConfig run = load_or_default(config_path);
      require_readable(ckpt_g, "guidance checkpoint");
      const int n = episodes > 0 ? static_cast<int>(episodes)
                                 : run.landing_pool_size;
      const int w = workers >= 0 && workers > 0
                        ? workers
                        : static_cast<int>(
                              std::thread::hardware_concurrency());
      const auto pool = build_landing_pool(Checkpoint::load(ckpt_g),
                                           run.episode, n, seed, w);
      save_landing_pool(pool, out);
      std::cout << "wrote " << pool.size() << " entries to " << out
                << std::endl;
      return 0;
    }
    if (ev->parsed()) {
      RunConfig run = load_or_default(config_path);
      require_readable(ckpt_g, "guidance checkpoint");
      require_readable(ckpt_l, "landing checkpoint");
      PolicyPair policies(Checkpoint::load(ckpt_g), Checkpoint::load(ckpt_l));
      const int n = episodes > 0 ? static_cast<int>(episodes)
                                 : run.eval_episodes;
      EvalScenario scenario = parse_scenario(scenario_label, n, seed);
      const auto records =
          run_monte_carlo(scenario, run.episode, policies, workers);
      const EvalReport report = aggregate_report(scenario.label, records);
      fs::create_directories(out_dir);
      export_terminal_records(records, out_dir + "/terminal_records.csv");
      export_miss_scatter(records, out_dir + "/miss_scatter.csv");
      export_report({report}, out_dir + "/report.csv");
      EpisodeConfig cfg = run.episode;
      apply_scenario(scenario, &cfg);
      write_run_manifest(out_dir + "/manifest.json", "evaluate", cfg, seed,
                         {ckpt_g, ckpt_l});
      std::cout << format_report(report);
      return 0;
    }
    if (sim->parsed()) {
      RunConfig run = load_or_default(config_path);
      Checkpoint cg, cl;
      if (!ckpt_g.empty()) {
        require_readable(ckpt_g, "guidance checkpoint");
        cg = Checkpoint::load(ckpt_g);
      } else {
        cg = fresh_checkpoint(Phase::kGuidance, seed);
      }
      if (!ckpt_l.empty()) {
        require_readable(ckpt_l, "landing checkpoint");
        cl = Checkpoint::load(ckpt_l);
      } else {
        cl = fresh_checkpoint(Phase::kLanding, seed);
      }
      PolicyPair policies(cg, cl);
      EpisodeConfig cfg = run.episode;
      apply_scenario(parse_scenario(scenario_label, 1, seed), &cfg);
      const EpisodeResult result =
          run_eval_episode(cfg, policies, seed, true);
      export_trajectory(result.trajectory, out);
      std::cout << "steps " << result.terminal.steps << "  miss "
                << result.terminal.metrics.miss << " m  speed "
                << result.terminal.metrics.speed << " m/s  success "
                << (result.terminal.success ? "yes" : "no") << '\n'
                << "trajectory written to " << out << std::endl;
      return 0;
    }
    if (rp->parsed()) {
      RunConfig run = load_or_default(config_path);
      require_readable(in_path, "trajectory");
      const auto logged = load_trajectory(in_path);
      EpisodeConfig cfg = run.episode;
      apply_scenario(parse_scenario(scenario_label, 1, seed), &cfg);
      std::vector<Eigen::Vector4d> actions;
      for (std::size_t k = 1; k < logged.size(); ++k) {
        actions.push_back(logged[k].action);
      }
      const EpisodeResult replayed = replay_actions(cfg, seed, actions);
      export_trajectory(replayed.trajectory, out);
      std::cout << "replayed " << replayed.trajectory.size() << " rows ("
                << (replayed.trajectory.size() == logged.size()
                        ? "row count matches"
                        : "row count differs")
                << ")" << std::endl;
      return 0;
    }
    if (ic->parsed()) {
      save_run_config(default_run_config(), out);
      std::cout << "wrote " << out << std::endl;
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return 0;
}
