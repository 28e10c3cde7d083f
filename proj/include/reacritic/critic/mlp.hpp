#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "reacritic/critic/critic.hpp"

namespace reacritic::critic {

struct MlpConfig {
  std::size_t state_dim = 0;
  std::size_t action_dim = 0;
  std::vector<std::size_t> hidden{256, 256};

  void validate() const;
};

/// Plain feed-forward critic: [s || a] -> GELU hidden layers -> Q.
class MlpCritic final : public Critic {
 public:
  MlpCritic(MlpConfig config, std::uint64_t seed);

  std::string kind() const override { return "mlp"; }
  std::size_t state_dim() const override { return config_.state_dim; }
  std::size_t action_dim() const override { return config_.action_dim; }
  const MlpConfig& config() const { return config_; }

  ad::Tensor forward(ad::Tape& tape, const ad::Tensor& state, const ad::Tensor& action, bool training,
                     Rng* noise) const override;
  std::unique_ptr<Critic> clone() const override;

 private:
  MlpConfig config_;
  std::vector<ad::Tensor> weights_;
  std::vector<ad::Tensor> biases_;
};

std::size_t mlp_parameter_count(std::size_t inputs, const std::vector<std::size_t>& hidden);

/// Width w of a two-hidden-layer MLP whose parameter count is closest to
/// `budget` for the given input size.
std::size_t matched_mlp_width(std::size_t budget, std::size_t inputs);

}  // namespace reacritic::critic
