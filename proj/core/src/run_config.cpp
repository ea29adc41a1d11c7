#include "lander/run_config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

#include "json.hpp"

namespace lander {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::set<std::string>& allowed,
                const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw std::runtime_error("run config: unknown key '" + it.key() +
                               "' in " + where);
    }
  }
}

template <class T>
void get_if(const json& j, const char* key, T* out) {
  if (j.contains(key)) *out = j.at(key).get<T>();
}

void parse_reward(const json& j, RewardParams* p) {
  check_keys(j,
             {"alpha", "beta", "eta", "kappa", "attitude_penalty",
              "attitude_limit_deg", "sigma_landing"},
             "reward");
  get_if(j, "alpha", &p->alpha);
  get_if(j, "beta", &p->beta);
  get_if(j, "eta", &p->eta);
  get_if(j, "kappa", &p->kappa);
  get_if(j, "attitude_penalty", &p->attitude_penalty);
  get_if(j, "attitude_limit_deg", &p->attitude_limit_deg);
  get_if(j, "sigma_landing", &p->sigma_landing);
}

void parse_scenario_spec(const json& j, ScenarioSpec* s) {
  check_keys(j, {"kind", "delta"}, "episode.scenario");
  if (j.contains("kind")) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "optim") {
      s->kind = ScenarioKind::kOptim;
    } else if (kind == "actuator_failure") {
      s->kind = ScenarioKind::kActuatorFailure;
    } else if (kind == "mass_variation") {
      s->kind = ScenarioKind::kMassVariation;
    } else if (kind == "inertia_variation") {
      s->kind = ScenarioKind::kInertiaVariation;
    } else {
      throw std::runtime_error("run config: unknown scenario kind '" + kind +
                               "'");
    }
  }
  get_if(j, "delta", &s->delta);
}

void parse_episode(const json& j, EpisodeConfig* c) {
  check_keys(j,
             {"downrange_min", "downrange_max", "crossrange_min",
              "crossrange_max", "altitude_min", "altitude_max", "speed_min",
              "speed_max", "heading_error_max_deg", "attitude_error_max_deg",
              "mass_nominal", "mass_fraction", "dj_diag_bound",
              "dj_off_bound", "tau_seeker", "tau_ctrl", "com_alpha",
              "tau_vref", "platform_reset_period", "divert_thresholds",
              "segment_switch_altitude", "max_steps", "scenario", "reward"},
             "episode");
  get_if(j, "downrange_min", &c->downrange_min);
  get_if(j, "downrange_max", &c->downrange_max);
  get_if(j, "crossrange_min", &c->crossrange_min);
  get_if(j, "crossrange_max", &c->crossrange_max);
  get_if(j, "altitude_min", &c->altitude_min);
  get_if(j, "altitude_max", &c->altitude_max);
  get_if(j, "speed_min", &c->speed_min);
  get_if(j, "speed_max", &c->speed_max);
  get_if(j, "heading_error_max_deg", &c->heading_error_max_deg);
  get_if(j, "attitude_error_max_deg", &c->attitude_error_max_deg);
  get_if(j, "mass_nominal", &c->mass_nominal);
  get_if(j, "mass_fraction", &c->mass_fraction);
  get_if(j, "dj_diag_bound", &c->dj_diag_bound);
  get_if(j, "dj_off_bound", &c->dj_off_bound);
  get_if(j, "tau_seeker", &c->tau_seeker);
  get_if(j, "tau_ctrl", &c->tau_ctrl);
  get_if(j, "com_alpha", &c->com_alpha);
  get_if(j, "tau_vref", &c->tau_vref);
  get_if(j, "platform_reset_period", &c->platform_reset_period);
  if (j.contains("divert_thresholds")) {
    const auto& arr = j.at("divert_thresholds");
    if (!arr.is_array() || arr.size() != 4) {
      throw std::runtime_error(
          "run config: divert_thresholds must be an array of 4 numbers");
    }
    for (int i = 0; i < 4; ++i) c->divert_thresholds[i] = arr[i].get<double>();
  }
  get_if(j, "segment_switch_altitude", &c->segment_switch_altitude);
  get_if(j, "max_steps", &c->max_steps);
  if (j.contains("scenario")) parse_scenario_spec(j.at("scenario"), &c->scenario);
  if (j.contains("reward")) parse_reward(j.at("reward"), &c->reward);
}

void parse_trainer(const json& j, const std::string& where, TrainerConfig* c) {
  check_keys(j,
             {"gamma", "clip_eps", "lr_policy", "lr_value", "kl_target",
              "policy_epochs", "value_epochs", "rollout_episodes",
              "total_episodes", "workers", "normalize_advantages", "use_adam",
              "lr_min", "lr_max", "eps_min", "eps_max", "seed",
              "checkpoint_interval"},
             where);
  get_if(j, "gamma", &c->gamma);
  get_if(j, "clip_eps", &c->clip_eps);
  get_if(j, "lr_policy", &c->lr_policy);
  get_if(j, "lr_value", &c->lr_value);
  get_if(j, "kl_target", &c->kl_target);
  get_if(j, "policy_epochs", &c->policy_epochs);
  get_if(j, "value_epochs", &c->value_epochs);
  get_if(j, "rollout_episodes", &c->rollout_episodes);
  get_if(j, "total_episodes", &c->total_episodes);
  get_if(j, "workers", &c->workers);
  get_if(j, "normalize_advantages", &c->normalize_advantages);
  get_if(j, "use_adam", &c->use_adam);
  get_if(j, "lr_min", &c->lr_min);
  get_if(j, "lr_max", &c->lr_max);
  get_if(j, "eps_min", &c->eps_min);
  get_if(j, "eps_max", &c->eps_max);
  get_if(j, "seed", &c->seed);
  get_if(j, "checkpoint_interval", &c->checkpoint_interval);
}

json dump_trainer(const TrainerConfig& c) {
  return json{{"gamma", c.gamma},
              {"clip_eps", c.clip_eps},
              {"lr_policy", c.lr_policy},
              {"lr_value", c.lr_value},
              {"kl_target", c.kl_target},
              {"policy_epochs", c.policy_epochs},
              {"value_epochs", c.value_epochs},
              {"rollout_episodes", c.rollout_episodes},
              {"total_episodes", c.total_episodes},
              {"workers", c.workers},
              {"normalize_advantages", c.normalize_advantages},
              {"use_adam", c.use_adam},
              {"lr_min", c.lr_min},
              {"lr_max", c.lr_max},
              {"eps_min", c.eps_min},
              {"eps_max", c.eps_max},
              {"seed", c.seed},
              {"checkpoint_interval", c.checkpoint_interval}};
}

}  // namespace

RunConfig default_run_config() {
  RunConfig c;
  c.landing_trainer.rollout_episodes = 120;
  c.landing_trainer.total_episodes = 300000;
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("run config: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("run config: parse error in " + path + ": " +
                             e.what());
  }
  check_keys(j,
             {"episode", "guidance_trainer", "landing_trainer",
              "eval_episodes", "landing_pool_size"},
             "top level");
  RunConfig c = default_run_config();
  try {
    if (j.contains("episode")) parse_episode(j.at("episode"), &c.episode);
    if (j.contains("guidance_trainer")) {
      parse_trainer(j.at("guidance_trainer"), "guidance_trainer",
                    &c.guidance_trainer);
    }
    if (j.contains("landing_trainer")) {
      parse_trainer(j.at("landing_trainer"), "landing_trainer",
                    &c.landing_trainer);
    }
    get_if(j, "eval_episodes", &c.eval_episodes);
    get_if(j, "landing_pool_size", &c.landing_pool_size);
  } catch (const json::exception& e) {
    throw std::runtime_error("run config: invalid value in " + path + ": " +
                             e.what());
  }
  return c;
}

void save_run_config(const RunConfig& c, const std::string& path) {
  const char* kind = "optim";
  switch (c.episode.scenario.kind) {
    case ScenarioKind::kOptim: kind = "optim"; break;
    case ScenarioKind::kActuatorFailure: kind = "actuator_failure"; break;
    case ScenarioKind::kMassVariation: kind = "mass_variation"; break;
    case ScenarioKind::kInertiaVariation: kind = "inertia_variation"; break;
  }
  json j;
  j["episode"] = json{
      {"downrange_min", c.episode.downrange_min},
      {"downrange_max", c.episode.downrange_max},
      {"crossrange_min", c.episode.crossrange_min},
      {"crossrange_max", c.episode.crossrange_max},
      {"altitude_min", c.episode.altitude_min},
      {"altitude_max", c.episode.altitude_max},
      {"speed_min", c.episode.speed_min},
      {"speed_max", c.episode.speed_max},
      {"heading_error_max_deg", c.episode.heading_error_max_deg},
      {"attitude_error_max_deg", c.episode.attitude_error_max_deg},
      {"mass_nominal", c.episode.mass_nominal},
      {"mass_fraction", c.episode.mass_fraction},
      {"dj_diag_bound", c.episode.dj_diag_bound},
      {"dj_off_bound", c.episode.dj_off_bound},
      {"tau_seeker", c.episode.tau_seeker},
      {"tau_ctrl", c.episode.tau_ctrl},
      {"com_alpha", c.episode.com_alpha},
      {"tau_vref", c.episode.tau_vref},
      {"platform_reset_period", c.episode.platform_reset_period},
      {"divert_thresholds", c.episode.divert_thresholds},
      {"segment_switch_altitude", c.episode.segment_switch_altitude},
      {"max_steps", c.episode.max_steps},
      {"scenario", {{"kind", kind}, {"delta", c.episode.scenario.delta}}},
      {"reward",
       {{"alpha", c.episode.reward.alpha},
        {"beta", c.episode.reward.beta},
        {"eta", c.episode.reward.eta},
        {"kappa", c.episode.reward.kappa},
        {"attitude_penalty", c.episode.reward.attitude_penalty},
        {"attitude_limit_deg", c.episode.reward.attitude_limit_deg},
        {"sigma_landing", c.episode.reward.sigma_landing}}}};
  j["guidance_trainer"] = dump_trainer(c.guidance_trainer);
  j["landing_trainer"] = dump_trainer(c.landing_trainer);
  j["eval_episodes"] = c.eval_episodes;
  j["landing_pool_size"] = c.landing_pool_size;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("run config: cannot open " + path);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("run config: write failed");
}

}  // namespace lander
