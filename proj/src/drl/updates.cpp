#include "reacritic/drl/updates.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "reacritic/autodiff/ops.hpp"
#include "reacritic/errors.hpp"

namespace reacritic::drl {

using ad::Tape;
using ad::Tensor;

namespace {

// Freezes a set of critics for the duration of a scope.
class FrozenCritics {
 public:
  explicit FrozenCritics(const Agent& agent) : agent_(agent) { set(false); }
  ~FrozenCritics() { set(true); }
  FrozenCritics(const FrozenCritics&) = delete;
  FrozenCritics& operator=(const FrozenCritics&) = delete;

 private:
  void set(bool flag) {
    agent_.critic1->params().set_requires_grad(flag);
    if (agent_.critic2) agent_.critic2->params().set_requires_grad(flag);
  }
  const Agent& agent_;
};

Tensor critic_min(Tape& tape, const critic::Critic& c1, const critic::Critic* c2, const Tensor& s, const Tensor& a,
                  bool training, Rng* noise) {
  const Tensor q1 = c1.forward(tape, s, a, training, noise);
  if (c2 == nullptr) return q1;
  return ad::minimum(tape, q1, c2->forward(tape, s, a, training, noise));
}

}  // namespace

double Agent::alpha() const { return log_alpha.defined() ? std::exp(log_alpha.item()) : 0.0; }

Agent make_agent(std::unique_ptr<critic::Critic> critic1, std::unique_ptr<critic::Critic> critic2,
                 std::unique_ptr<Actor> actor, double initial_alpha) {
  if (!critic1 || !actor) throw ContractError("make_agent: critic1 and actor are required");
  Agent agent;
  agent.critic1_target = critic1->clone();
  agent.critic1_target->params().set_requires_grad(false);
  if (critic2) {
    agent.critic2_target = critic2->clone();
    agent.critic2_target->params().set_requires_grad(false);
  }
  agent.actor_target = actor->clone();
  agent.actor_target->params().set_requires_grad(false);
  agent.critic1 = std::move(critic1);
  agent.critic2 = std::move(critic2);
  agent.actor = std::move(actor);
  if (!(initial_alpha >= 0.0)) throw ConfigError("initial alpha must be >= 0");
  // alpha = 0 leaves log_alpha undefined: a pure max-Q actor.
  if (initial_alpha > 0.0) agent.log_alpha = Tensor::scalar(std::log(initial_alpha), true);
  return agent;
}

Tensor bellman_target(const Batch& batch, const Agent& agent, const TargetConfig& config, Rng* policy_noise) {
  Tape tape;
  const auto next = agent.actor_target->sample(tape, batch.next_state, policy_noise);
  const Tensor q = critic_min(tape, *agent.critic1_target, agent.critic2_target.get(), batch.next_state, next.action,
                              false, nullptr);
  const bool entropy = agent.actor->algo() == Algo::kSac && config.entropy_in_target;
  const double alpha = entropy ? agent.alpha() : 0.0;
  const std::size_t B = batch.size();
  std::vector<double> y(B);
  for (std::size_t i = 0; i < B; ++i) {
    double bootstrap = q.at(i);
    if (alpha > 0.0) bootstrap -= alpha * next.log_prob.at(i);
    y[i] = batch.reward.at(i) + config.gamma * (1.0 - batch.done.at(i)) * bootstrap;
  }
  return Tensor::from({B}, std::move(y));
}

Tensor max_q_target(const Batch& batch, const critic::Critic& target, const std::vector<std::vector<double>>& candidates,
                    double gamma) {
  if (candidates.empty()) throw ContractError("max_q_target: empty candidate set");
  const std::size_t B = batch.size(), da = target.action_dim();
  std::vector<double> best(B, -std::numeric_limits<double>::infinity());
  for (const auto& c : candidates) {
    if (c.size() != da) throw DimensionError("max_q_target: candidate action has the wrong size");
    std::vector<double> tiled;
    tiled.reserve(B * da);
    for (std::size_t i = 0; i < B; ++i) tiled.insert(tiled.end(), c.begin(), c.end());
    Tape tape;
    const Tensor q = target.forward(tape, batch.next_state, Tensor::from({B, da}, std::move(tiled)), false, nullptr);
    for (std::size_t i = 0; i < B; ++i) best[i] = std::max(best[i], q.at(i));
  }
  std::vector<double> y(B);
  for (std::size_t i = 0; i < B; ++i) y[i] = batch.reward.at(i) + gamma * (1.0 - batch.done.at(i)) * best[i];
  return Tensor::from({B}, std::move(y));
}

CriticStep critic_update(const Batch& batch, const Tensor& y, Agent& agent, ad::Adam& optimizer, Rng* critic_noise) {
  CriticStep out;
  optimizer.zero_grad();
  try {
    Tape tape;
    const Tensor q1 = agent.critic1->forward(tape, batch.state, batch.action, true, critic_noise);
    Tensor loss = ad::mean(tape, ad::square(tape, ad::sub(tape, q1, y)));
    if (agent.critic2) {
      const Tensor q2 = agent.critic2->forward(tape, batch.state, batch.action, true, critic_noise);
      loss = ad::add(tape, loss, ad::mean(tape, ad::square(tape, ad::sub(tape, q2, y))));
    }
    out.loss = loss.item();
    double total = 0.0;
    for (double v : q1.data()) total += v;
    out.q_mean = total / static_cast<double>(q1.size());
    tape.backward(loss);
  } catch (const NumericError& e) {
    throw DivergenceError(std::string("critic update diverged: ") + e.what());
  }
  if (!std::isfinite(out.loss)) throw DivergenceError("critic update diverged: non-finite loss");
  optimizer.step();
  return out;
}

Tensor actor_loss(Tape& tape, const Tensor& states, const Agent& agent, double alpha, Rng* policy_noise,
                  Rng* critic_noise, Tensor* log_prob) {
  const auto p = agent.actor->sample(tape, states, policy_noise);
  if (log_prob != nullptr) *log_prob = p.log_prob;
  if (agent.actor->algo() == Algo::kDdpg) {
    const Tensor q = agent.critic1->forward(tape, states, p.action, true, critic_noise);
    return ad::mul_scalar(tape, ad::mean(tape, q), -1.0);
  }
  const Tensor q = critic_min(tape, *agent.critic1, agent.critic2.get(), states, p.action, true, critic_noise);
  return ad::mean(tape, ad::sub(tape, ad::mul_scalar(tape, p.log_prob, alpha), q));
}

ActorStep actor_update(const Batch& batch, Agent& agent, ad::Adam& optimizer, Rng* policy_noise, Rng* critic_noise) {
  ActorStep out;
  optimizer.zero_grad();
  FrozenCritics frozen(agent);
  try {
    Tape tape;
    Tensor log_prob;
    const double alpha = agent.actor->algo() == Algo::kSac ? agent.alpha() : 0.0;
    const Tensor loss = actor_loss(tape, batch.state, agent, alpha, policy_noise, critic_noise, &log_prob);
    out.objective = -loss.item();
    if (agent.actor->algo() == Algo::kSac) {
      double total = 0.0;
      for (double v : log_prob.data()) total += v;
      out.entropy = -total / static_cast<double>(log_prob.size());
    }
    tape.backward(loss);
  } catch (const NumericError& e) {
    throw DivergenceError(std::string("actor update diverged: ") + e.what());
  }
  if (!std::isfinite(out.objective)) throw DivergenceError("actor update diverged: non-finite objective");
  optimizer.step();
  return out;
}

void alpha_update(Agent& agent, ad::Adam& optimizer, double mean_log_prob, double target_entropy) {
  if (!agent.log_alpha.defined()) throw ContractError("alpha_update: agent has no temperature parameter");
  // L(log a) = -log a * (mean log pi + target), so dL/d(log a) = -(mean log pi + target).
  agent.log_alpha.zero_grad();
  agent.log_alpha.mutable_grad()[0] = -(mean_log_prob + target_entropy);
  optimizer.step();
}

void polyak_update(ad::ParameterSet& target, const ad::ParameterSet& online, double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw ConfigError("polyak tau must be in [0, 1]");
  target.require_same_layout(online);
  for (std::size_t i = 0; i < target.entries().size(); ++i) {
    Tensor t = target.entries()[i].tensor;
    const auto src = online.entries()[i].tensor.data();
    auto dst = t.mutable_data();
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] = tau * src[k] + (1.0 - tau) * dst[k];
  }
}

}  // namespace reacritic::drl
