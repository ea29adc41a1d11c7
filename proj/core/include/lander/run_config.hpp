#ifndef LANDER_RUN_CONFIG_HPP_
#define LANDER_RUN_CONFIG_HPP_

#include <string>

#include "lander/environment.hpp"
#include "lander/ppo_trainer.hpp"

namespace lander {

// Everything a run needs from one JSON file: episode dispersions and model
// constants, reward constants, and per-phase trainer settings. Flags on the
// command line override individual fields after loading.
struct RunConfig {
  EpisodeConfig episode;
  TrainerConfig guidance_trainer;
  TrainerConfig landing_trainer;
  int eval_episodes = 5000;
  int landing_pool_size = 5000;
};

RunConfig default_run_config();

// Strict parse: any key not in the documented schema is an error, as is a
// structurally invalid value. Missing keys keep their defaults.
RunConfig load_run_config(const std::string& path);
void save_run_config(const RunConfig& config, const std::string& path);

}  // namespace lander

#endif  // LANDER_RUN_CONFIG_HPP_
