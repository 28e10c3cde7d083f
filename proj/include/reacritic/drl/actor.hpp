#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "reacritic/autodiff/parameters.hpp"
#include "reacritic/autodiff/tape.hpp"
#include "reacritic/rng.hpp"

namespace reacritic::drl {

enum class Algo { kSac, kDdpg };

struct ActorConfig {
  std::size_t state_dim = 0;
  std::size_t action_dim = 0;
  std::vector<std::size_t> hidden{64, 64};
  // Bounds for the Gaussian log-std before squashing (SAC only).
  double log_std_min = -5.0;
  double log_std_max = 1.0;

  void validate() const;
};

struct PolicySample {
  ad::Tensor action;    // [B, d_a] in [0,1]
  ad::Tensor log_prob;  // [B]; zeros for the deterministic head
};

/// ReLU MLP policy with a squashed output: a = (tanh(u) + 1) / 2.
///
/// SAC: u ~ N(mu(s), sigma(s)^2), sampled by reparameterization, and the
/// log-density carries the change of variables through the squashing.
/// DDPG: u = mu(s).
class Actor {
 public:
  Actor(ActorConfig config, Algo algo, std::uint64_t seed);

  /// Reparameterized sample. With `noise` null the Gaussian draw is zero, so
  /// the result is the deterministic head (log-prob still evaluated at it).
  PolicySample sample(ad::Tape& tape, const ad::Tensor& state, Rng* noise) const;
  ad::Tensor deterministic(ad::Tape& tape, const ad::Tensor& state) const;

  /// One environment action for rollouts. SAC samples when `explore`; DDPG
  /// adds clipped Gaussian noise of std `exploration_std`.
  std::vector<double> act(std::span<const double> observation, bool explore, Rng& rng,
                          double exploration_std = 0.1) const;

  std::unique_ptr<Actor> clone() const;

  Algo algo() const { return algo_; }
  const ActorConfig& config() const { return config_; }
  ad::ParameterSet& params() { return params_; }
  const ad::ParameterSet& params() const { return params_; }

 private:
  ad::Tensor trunk(ad::Tape& tape, const ad::Tensor& state) const;

  ActorConfig config_;
  Algo algo_;
  ad::ParameterSet params_;
  std::vector<ad::Tensor> weights_;
  std::vector<ad::Tensor> biases_;
  ad::Tensor mean_w_, mean_b_;
  ad::Tensor log_std_w_, log_std_b_;
};

}  // namespace reacritic::drl
