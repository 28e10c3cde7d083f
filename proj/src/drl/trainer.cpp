#include "reacritic/drl/trainer.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "reacritic/drl/replay_buffer.hpp"
#include "reacritic/drl/updates.hpp"
#include "reacritic/errors.hpp"

namespace reacritic::drl {

void TrainerConfig::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("trainer: gamma must be in (0, 1)");
  if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError("trainer: tau must be in (0, 1]");
  if (!(critic_lr > 0.0) || !(actor_lr > 0.0) || !(alpha_lr > 0.0)) {
    throw ConfigError("trainer: learning rates must be positive");
  }
  if (batch_size < 1) throw ConfigError("trainer: batch_size must be >= 1");
  if (buffer_capacity < batch_size) throw ConfigError("trainer: buffer_capacity must be >= batch_size");
  if (update_every < 1) throw ConfigError("trainer: update_every must be >= 1");
  if (gradient_steps < 1) throw ConfigError("trainer: gradient_steps must be >= 1");
  if (!(alpha >= 0.0)) throw ConfigError("trainer: alpha must be >= 0");
  if (algo == Algo::kSac && auto_alpha && !(alpha > 0.0)) {
    throw ConfigError("trainer: automatic temperature tuning needs alpha > 0 as its starting value");
  }
  if (!(exploration_std >= 0.0)) throw ConfigError("trainer: exploration_std must be >= 0");
  if (!(reward_scale > 0.0)) throw ConfigError("trainer: reward_scale must be positive");
  if (report_window < 1) throw ConfigError("trainer: report_window must be >= 1");
}

double window_mean(const std::vector<EpisodeStats>& episodes, std::size_t window, bool from_end) {
  if (episodes.empty()) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t n = std::min(window, episodes.size());
  const std::size_t begin = from_end ? episodes.size() - n : 0;
  double total = 0.0;
  for (std::size_t i = begin; i < begin + n; ++i) total += episodes[i].episode_return;
  return total / static_cast<double>(n);
}

TrainingReport train(env::Environment& env, const TrainerConfig& config, const CriticFactory& make_critic,
                     std::uint64_t seed, const Callbacks& callbacks) {
  config.validate();
  using Clock = std::chrono::steady_clock;
  const auto started = Clock::now();
  const std::size_t ds = env.observation_dim(), da = env.action_dim();

  ActorConfig actor_config;
  actor_config.state_dim = ds;
  actor_config.action_dim = da;
  actor_config.hidden = config.actor_hidden;
  actor_config.log_std_max = config.log_std_max;
  auto critic1 = make_critic(Rng::derive_seed(seed, "critic1"));
  auto critic2 = config.twin_critic ? make_critic(Rng::derive_seed(seed, "critic2")) : nullptr;
  if (critic1->state_dim() != ds || critic1->action_dim() != da) {
    throw ConfigError("trainer: critic dimensions do not match the environment (" + std::to_string(ds) + ", " +
                      std::to_string(da) + ")");
  }
  const double alpha0 = config.algo == Algo::kSac ? config.alpha : 0.0;
  Agent agent = make_agent(std::move(critic1), std::move(critic2),
                           std::make_unique<Actor>(actor_config, config.algo, Rng::derive_seed(seed, "actor")), alpha0);

  std::vector<ad::Tensor> critic_params = agent.critic1->params().tensors();
  if (agent.critic2) {
    for (auto& t : agent.critic2->params().tensors()) critic_params.push_back(t);
  }
  ad::Adam critic_opt(critic_params, {config.critic_lr});
  ad::Adam actor_opt(agent.actor->params().tensors(), {config.actor_lr});
  const bool tune_alpha = config.algo == Algo::kSac && config.auto_alpha;
  std::unique_ptr<ad::Adam> alpha_opt;
  if (tune_alpha) alpha_opt = std::make_unique<ad::Adam>(std::vector<ad::Tensor>{agent.log_alpha}, ad::AdamConfig{config.alpha_lr});
  const double target_entropy = config.target_entropy_set ? config.target_entropy : -static_cast<double>(da);

  ReplayBuffer buffer(config.buffer_capacity, ds, da, Rng::derive_seed(seed, "replay"));
  Rng warmup_rng = Rng::stream(seed, "warmup");
  Rng rollout_rng = Rng::stream(seed, "rollout");
  Rng target_noise = Rng::stream(seed, "update/target");
  Rng actor_noise = Rng::stream(seed, "update/actor");
  Rng critic_noise = Rng::stream(seed, "critic/noise");
  const std::uint64_t env_seed = Rng::derive_seed(seed, "env");
  const TargetConfig target_config{config.gamma, config.entropy_in_target};

  TrainingReport report;
  report.seed = seed;
  std::size_t total_steps = 0;

  for (std::size_t ep = 0; ep < config.episodes; ++ep) {
    const auto ep_start = Clock::now();
    env::StepResult current = env.reset(env_seed + ep);
    EpisodeStats stats;
    stats.episode = ep;
    double loss_sum = 0.0, q_sum = 0.0;
    bool done = false;
    while (!done) {
      std::vector<double> action;
      if (total_steps < config.warmup_steps) {
        action.resize(da);
        for (auto& a : action) a = warmup_rng.uniform();
      } else {
        action = agent.actor->act(current.observation, true, rollout_rng, config.exploration_std);
      }
      env::StepResult next = env.step(action);
      ++stats.steps;
      ++total_steps;
      stats.episode_return += next.reward;
      const bool limit = config.max_episode_steps > 0 && stats.steps >= config.max_episode_steps;
      done = next.done || limit;
      const bool terminal = next.done && !next.truncated;
      buffer.push({current.observation, action, next.reward * config.reward_scale, next.observation, terminal});
      current = std::move(next);

      const bool ready = total_steps > config.warmup_steps && buffer.size() >= config.batch_size;
      if (!ready || total_steps % config.update_every != 0) continue;
      for (std::size_t g = 0; g < config.gradient_steps; ++g) {
        const Batch batch = buffer.sample(config.batch_size);
        const ad::Tensor y = bellman_target(batch, agent, target_config, &target_noise);
        const CriticStep cs = critic_update(batch, y, agent, critic_opt, &critic_noise);
        const ActorStep as = actor_update(batch, agent, actor_opt, &actor_noise, &critic_noise);
        if (tune_alpha) alpha_update(agent, *alpha_opt, -as.entropy, target_entropy);
        polyak_update(agent.critic1_target->params(), agent.critic1->params(), config.tau);
        if (agent.critic2) polyak_update(agent.critic2_target->params(), agent.critic2->params(), config.tau);
        polyak_update(agent.actor_target->params(), agent.actor->params(), config.tau);
        loss_sum += cs.loss;
        q_sum += cs.q_mean;
        ++stats.updates;
        ++report.total_updates;
        if (callbacks.on_update) {
          callbacks.on_update(total_steps, ep,
                              {{"critic_loss", cs.loss},
                               {"q_mean", cs.q_mean},
                               {"actor_objective", as.objective},
                               {"entropy", as.entropy},
                               {"alpha", agent.alpha()}});
        }
      }
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    stats.critic_loss_mean = stats.updates > 0 ? loss_sum / static_cast<double>(stats.updates) : nan;
    stats.q_mean = stats.updates > 0 ? q_sum / static_cast<double>(stats.updates) : nan;
    stats.alpha = agent.alpha();
    stats.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - ep_start).count();
    report.episodes.push_back(stats);
    if (callbacks.on_episode) callbacks.on_episode(stats);
  }

  report.total_steps = total_steps;
  report.first_window_mean = window_mean(report.episodes, config.report_window, false);
  report.final_window_mean = window_mean(report.episodes, config.report_window, true);
  report.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - started).count();
  return report;
}

}  // namespace reacritic::drl
