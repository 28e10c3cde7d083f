#pragma once

#include <memory>
#include <vector>

#include "reacritic/autodiff/adam.hpp"
#include "reacritic/critic/critic.hpp"
#include "reacritic/drl/actor.hpp"
#include "reacritic/drl/replay_buffer.hpp"

namespace reacritic::drl {

/// Online and target networks of one actor-critic learner. `critic2` and
/// `critic2_target` are null in single-critic mode. Target networks never
/// require gradients; only polyak_update() changes them.
struct Agent {
  std::unique_ptr<critic::Critic> critic1, critic2;
  std::unique_ptr<critic::Critic> critic1_target, critic2_target;
  std::unique_ptr<Actor> actor, actor_target;
  ad::Tensor log_alpha;  // SAC temperature, log scale; undefined means alpha = 0

  bool twin() const { return critic2 != nullptr; }
  double alpha() const;
};

/// Builds targets as deep copies of the online networks.
Agent make_agent(std::unique_ptr<critic::Critic> critic1, std::unique_ptr<critic::Critic> critic2,
                 std::unique_ptr<Actor> actor, double initial_alpha);

struct TargetConfig {
  double gamma = 0.99;
  // SAC only: subtract alpha * log pi(a'|s') inside the bootstrap.
  bool entropy_in_target = true;
};

/// y = r + gamma (1 - done) [Q_target(s', a') - alpha log pi(a'|s')], a' from
/// the target actor, Q_target the min over target critics in twin mode.
/// Returns [B] without gradient.
ad::Tensor bellman_target(const Batch& batch, const Agent& agent, const TargetConfig& config, Rng* policy_noise);

/// Q-learning branch over a finite candidate set:
/// y = r + gamma (1 - done) max_c Q_target(s', c).
ad::Tensor max_q_target(const Batch& batch, const critic::Critic& target, const std::vector<std::vector<double>>& candidates,
                        double gamma);

struct CriticStep {
  double loss = 0.0;    // summed over critics in twin mode
  double q_mean = 0.0;  // mean of critic1's Q over the batch
};

/// Mean squared Bellman residual against fixed targets `y`; one Adam step on
/// the critics. Throws DivergenceError on a non-finite loss.
CriticStep critic_update(const Batch& batch, const ad::Tensor& y, Agent& agent, ad::Adam& optimizer,
                         Rng* critic_noise);

/// Actor loss to minimize: mean(alpha log pi(a~|s) - Q(s, a~)) for SAC,
/// -mean(Q(s, mu(s))) for DDPG. Q is min over critics in twin mode for SAC
/// and critic1 for DDPG.
ad::Tensor actor_loss(ad::Tape& tape, const ad::Tensor& states, const Agent& agent, double alpha, Rng* policy_noise,
                      Rng* critic_noise, ad::Tensor* log_prob = nullptr);

struct ActorStep {
  double objective = 0.0;  // mean(Q - alpha log pi), the maximized quantity
  double entropy = 0.0;    // -mean(log pi), SAC only
};

/// One actor Adam step with the critics frozen.
ActorStep actor_update(const Batch& batch, Agent& agent, ad::Adam& optimizer, Rng* policy_noise, Rng* critic_noise);

/// Temperature step on log alpha toward entropy `target_entropy`, given the
/// batch mean of log pi from the latest actor step.
void alpha_update(Agent& agent, ad::Adam& optimizer, double mean_log_prob, double target_entropy);

/// target <- tau * online + (1 - tau) * target. Throws ContractError on a
/// layout mismatch.
void polyak_update(ad::ParameterSet& target, const ad::ParameterSet& online, double tau);

}  // namespace reacritic::drl
