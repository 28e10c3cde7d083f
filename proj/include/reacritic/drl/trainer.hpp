#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "reacritic/critic/critic.hpp"
#include "reacritic/drl/actor.hpp"
#include "reacritic/env/environment.hpp"

namespace reacritic::drl {

struct TrainerConfig {
  Algo algo = Algo::kSac;
  double gamma = 0.99;
  double critic_lr = 1e-3;
  double actor_lr = 3e-4;
  double alpha_lr = 3e-4;
  double tau = 0.005;
  std::size_t batch_size = 64;
  std::size_t buffer_capacity = 100000;
  std::size_t warmup_steps = 1000;  // uniform random actions, no updates
  std::size_t update_every = 1;     // environment steps between update rounds
  std::size_t gradient_steps = 1;   // updates per round
  bool twin_critic = true;
  bool auto_alpha = true;
  double alpha = 0.2;  // initial value when auto-tuned, fixed value otherwise
  double target_entropy = 0.0;
  bool target_entropy_set = false;  // false: -action_dim
  bool entropy_in_target = true;
  double exploration_std = 0.1;  // DDPG
  double reward_scale = 1.0;     // applied to stored rewards only; reported returns are raw
  std::size_t episodes = 100;
  std::size_t max_episode_steps = 0;  // 0: the environment decides
  std::vector<std::size_t> actor_hidden{64, 64};
  double log_std_max = 1.0;
  std::size_t report_window = 20;

  void validate() const;
};

struct EpisodeStats {
  std::size_t episode = 0;
  double episode_return = 0.0;
  double critic_loss_mean = 0.0;  // NaN when the episode had no updates
  double q_mean = 0.0;            // NaN when the episode had no updates
  std::size_t steps = 0;
  std::size_t updates = 0;  // updates performed during this episode
  double alpha = 0.0;
  double wall_ms = 0.0;
};

struct Callbacks {
  std::function<void(const EpisodeStats&)> on_episode;
  // (environment step, episode, named scalars) after every update.
  std::function<void(std::size_t, std::size_t, const std::map<std::string, double>&)> on_update;
};

struct TrainingReport {
  std::uint64_t seed = 0;
  std::vector<EpisodeStats> episodes;
  std::size_t total_steps = 0;
  std::size_t total_updates = 0;
  double first_window_mean = 0.0;
  double final_window_mean = 0.0;
  double wall_ms = 0.0;
};

/// Mean return of the first / last `window` episodes (fewer if not available).
double window_mean(const std::vector<EpisodeStats>& episodes, std::size_t window, bool from_end);

using CriticFactory = std::function<std::unique_ptr<critic::Critic>(std::uint64_t seed)>;

/// Off-policy actor-critic training: rollouts into a replay buffer, then
/// update rounds of Bellman targets, critic step, actor step, temperature
/// step and polyak blending. Every random stream is derived from `seed`.
/// Throws DivergenceError when a loss becomes non-finite.
TrainingReport train(env::Environment& env, const TrainerConfig& config, const CriticFactory& make_critic,
                     std::uint64_t seed, const Callbacks& callbacks = {});

}  // namespace reacritic::drl
