#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "reacritic/critic/critic.hpp"

namespace reacritic::critic {

struct CriticConfig {
  std::size_t state_dim = 0;
  std::size_t action_dim = 0;
  std::size_t hidden_dim = 64;  // d_h
  std::size_t horizontal = 4;   // H, reasoning tokens
  std::size_t vertical = 2;     // V, stacked blocks
  std::size_t heads = 4;
  std::size_t ffn_dim = 0;      // 0 selects 4 * hidden_dim
  double noise_std = 0.0;
  bool noise_in_eval = false;

  void validate() const;
  std::size_t ffn_width() const { return ffn_dim > 0 ? ffn_dim : 4 * hidden_dim; }
};

/// Leading-term multiply-accumulate counts of one forward pass at batch B.
/// These are exactly the MACs the matmul kernels perform.
struct FlopCount {
  std::uint64_t embedding = 0;             // B (d_s + d_a) d_h
  std::uint64_t attention_projection = 0;  // 4 B H V d_h^2
  std::uint64_t attention_scores = 0;      // 2 B H^2 V d_h (scores and context)
  std::uint64_t feed_forward = 0;          // 2 B H V d_h d_ff
  std::uint64_t aggregation = 0;           // 2 B H d_h
  std::uint64_t head = 0;                  // B d_h

  std::uint64_t attention() const { return attention_projection + attention_scores; }
  std::uint64_t total() const {
    return embedding + attention_projection + attention_scores + feed_forward + aggregation + head;
  }
};

FlopCount flop_count(const CriticConfig& config, std::size_t batch);

/// Intermediates of one forward pass, filled when a trace is passed in.
struct ReaCriticTrace {
  ad::Tensor embedding;                       // z0 [B, d_h]
  ad::Tensor expanded;                        // Z0 [B, H, d_h]
  std::vector<ad::Tensor> block_outputs;      // V x [B, H, d_h]
  std::vector<ad::Tensor> attention_weights;  // V x [B, heads, H, H]
  ad::Tensor aggregation_weights;             // [B, H, 1]
  ad::Tensor aggregated;                      // z_hat [B, d_h]
};

/// Reasoning-expanded transformer critic.
///
/// [s || a] is projected and normalized into one embedding, copied into H
/// tokens with learned positional offsets (plus optional Gaussian noise),
/// refined by V pre-norm transformer blocks that attend across the tokens,
/// pooled by a learned attention over tokens, and read out through a final
/// LayerNorm and a projection vector.
class ReaCritic final : public Critic {
 public:
  ReaCritic(CriticConfig config, std::uint64_t seed);

  std::string kind() const override { return "reacritic"; }
  std::size_t state_dim() const override { return config_.state_dim; }
  std::size_t action_dim() const override { return config_.action_dim; }
  const CriticConfig& config() const { return config_; }

  ad::Tensor forward(ad::Tape& tape, const ad::Tensor& state, const ad::Tensor& action, bool training,
                     Rng* noise) const override;
  ad::Tensor forward(ad::Tape& tape, const ad::Tensor& state, const ad::Tensor& action, bool training, Rng* noise,
                     ReaCriticTrace* trace) const;
  std::unique_ptr<Critic> clone() const override;

  // Pipeline stages, exposed for testing and probing.
  ad::Tensor embed(ad::Tape& tape, const ad::Tensor& state, const ad::Tensor& action) const;
  ad::Tensor expand(ad::Tape& tape, const ad::Tensor& z0, bool training, Rng* noise) const;
  ad::Tensor block(ad::Tape& tape, const ad::Tensor& tokens, std::size_t index,
                   ad::Tensor* attention_weights = nullptr) const;
  ad::Tensor aggregate(ad::Tape& tape, const ad::Tensor& tokens, ad::Tensor* weights = nullptr) const;
  ad::Tensor head(ad::Tape& tape, const ad::Tensor& pooled) const;

  struct Block {
    ad::Tensor ln1_gain, ln1_bias;
    ad::Tensor wq, bq, wk, bk, wv, bv, wo, bo;
    ad::Tensor ln2_gain, ln2_bias;
    ad::Tensor w1, b1, w2, b2;
  };
  const Block& block_params(std::size_t index) const { return blocks_.at(index); }
  const ad::Tensor& positional() const { return positional_; }

 private:
  void build(Rng* init);

  CriticConfig config_;
  ad::Tensor w_embed_, embed_gain_, embed_bias_;
  ad::Tensor positional_;
  std::vector<Block> blocks_;
  ad::Tensor w_agg_;
  ad::Tensor final_gain_, final_bias_;
  ad::Tensor w_q_;
};

/// Number of trainable scalars a ReaCritic with `config` has.
std::size_t reacritic_parameter_count(const CriticConfig& config);

}  // namespace reacritic::critic
