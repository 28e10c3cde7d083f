#include "reacritic/critic/reacritic.hpp"

#include <cmath>
#include <string>

#include "reacritic/autodiff/mac_counter.hpp"
#include "reacritic/autodiff/ops.hpp"
#include "reacritic/errors.hpp"

namespace reacritic::critic {

using ad::MacCategory;
using ad::MacScope;
using ad::Tape;
using ad::Tensor;

void CriticConfig::validate() const {
  if (state_dim < 1) throw ConfigError("critic: state_dim must be >= 1");
  if (action_dim < 1) throw ConfigError("critic: action_dim must be >= 1");
  if (hidden_dim < 1) throw ConfigError("critic: hidden_dim must be >= 1");
  if (horizontal < 1) throw ConfigError("critic: horizontal (H) must be >= 1");
  if (vertical < 1) throw ConfigError("critic: vertical (V) must be >= 1");
  if (heads < 1 || hidden_dim % heads != 0) {
    throw ConfigError("critic: heads (" + std::to_string(heads) + ") must divide hidden_dim (" +
                      std::to_string(hidden_dim) + ")");
  }
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) throw ConfigError("critic: noise_std must be >= 0");
}

FlopCount flop_count(const CriticConfig& c, std::size_t batch) {
  c.validate();
  const std::uint64_t B = batch, H = c.horizontal, V = c.vertical, d = c.hidden_dim, f = c.ffn_width();
  FlopCount out;
  out.embedding = B * (c.state_dim + c.action_dim) * d;
  out.attention_projection = 4 * B * H * V * d * d;
  out.attention_scores = 2 * B * H * H * V * d;
  out.feed_forward = 2 * B * H * V * d * f;
  out.aggregation = 2 * B * H * d;
  out.head = B * d;
  return out;
}

std::size_t reacritic_parameter_count(const CriticConfig& c) {
  c.validate();
  const std::size_t d = c.hidden_dim, f = c.ffn_width();
  const std::size_t embed = (c.state_dim + c.action_dim) * d + 2 * d;
  const std::size_t positional = c.horizontal * d;
  const std::size_t block = 2 * d + 4 * (d * d + d) + 2 * d + (d * f + f) + (f * d + d);
  return embed + positional + c.vertical * block + d + 2 * d + d;
}

namespace {

Tensor gaussian(Rng& rng, ad::Shape shape, double std) {
  std::vector<double> v(ad::numel(shape));
  for (auto& x : v) x = rng.normal(0.0, std);
  return Tensor::from(std::move(shape), std::move(v));
}

Tensor projection(Rng* rng, std::size_t in, std::size_t out) {
  if (rng == nullptr) return Tensor::zeros({in, out});
  return gaussian(*rng, {in, out}, 1.0 / std::sqrt(static_cast<double>(in)));
}

}  // namespace

ReaCritic::ReaCritic(CriticConfig config, std::uint64_t seed) : config_(config) {
  config_.validate();
  Rng init = Rng::stream(seed, "critic/init");
  build(&init);
}

void ReaCritic::build(Rng* init) {
  const std::size_t d = config_.hidden_dim, f = config_.ffn_width();
  const std::size_t in = config_.state_dim + config_.action_dim;
  auto& p = params_;
  w_embed_ = p.add("embed.w", projection(init, in, d));
  embed_gain_ = p.add("embed.ln.gain", Tensor::full({d}, 1.0));
  embed_bias_ = p.add("embed.ln.bias", Tensor::zeros({d}));
  positional_ = p.add("positional", init ? gaussian(*init, {config_.horizontal, d}, 0.02)
                                         : Tensor::zeros({config_.horizontal, d}));
  blocks_.clear();
  for (std::size_t v = 0; v < config_.vertical; ++v) {
    const std::string n = "block" + std::to_string(v) + ".";
    Block b;
    b.ln1_gain = p.add(n + "ln1.gain", Tensor::full({d}, 1.0));
    b.ln1_bias = p.add(n + "ln1.bias", Tensor::zeros({d}));
    b.wq = p.add(n + "attn.wq", projection(init, d, d));
    b.bq = p.add(n + "attn.bq", Tensor::zeros({d}));
    b.wk = p.add(n + "attn.wk", projection(init, d, d));
    b.bk = p.add(n + "attn.bk", Tensor::zeros({d}));
    b.wv = p.add(n + "attn.wv", projection(init, d, d));
    b.bv = p.add(n + "attn.bv", Tensor::zeros({d}));
    b.wo = p.add(n + "attn.wo", projection(init, d, d));
    b.bo = p.add(n + "attn.bo", Tensor::zeros({d}));
    b.ln2_gain = p.add(n + "ln2.gain", Tensor::full({d}, 1.0));
    b.ln2_bias = p.add(n + "ln2.bias", Tensor::zeros({d}));
    b.w1 = p.add(n + "ffn.w1", projection(init, d, f));
    b.b1 = p.add(n + "ffn.b1", Tensor::zeros({f}));
    b.w2 = p.add(n + "ffn.w2", projection(init, f, d));
    b.b2 = p.add(n + "ffn.b2", Tensor::zeros({d}));
    blocks_.push_back(std::move(b));
  }
  w_agg_ = p.add("aggregate.w", projection(init, d, 1));
  final_gain_ = p.add("final.ln.gain", Tensor::full({d}, 1.0));
  final_bias_ = p.add("final.ln.bias", Tensor::zeros({d}));
  w_q_ = p.add("head.w", projection(init, d, 1));
}

std::unique_ptr<Critic> ReaCritic::clone() const {
  auto copy = std::make_unique<ReaCritic>(config_, 0);
  copy->params_.copy_values_from(params_);
  return copy;
}

Tensor ReaCritic::embed(Tape& tape, const Tensor& state, const Tensor& action) const {
  if (state.rank() != 2 || state.dim(1) != config_.state_dim || action.rank() != 2 ||
      action.dim(1) != config_.action_dim || state.dim(0) != action.dim(0)) {
    throw DimensionError("critic: expected state [B," + std::to_string(config_.state_dim) + "] and action [B," +
                         std::to_string(config_.action_dim) + "], got " + ad::to_string(state.shape()) + " and " +
                         ad::to_string(action.shape()));
  }
  MacScope scope(MacCategory::kEmbedding);
  const Tensor x = ad::concat_last(tape, state, action);
  return ad::layer_norm(tape, ad::matmul(tape, x, w_embed_), embed_gain_, embed_bias_);
}

Tensor ReaCritic::expand(Tape& tape, const Tensor& z0, bool training, Rng* noise) const {
  Tensor tokens = ad::add(tape, ad::repeat_tokens(tape, z0, config_.horizontal), positional_);
  const bool noisy = config_.noise_std > 0.0 && (training || config_.noise_in_eval);
  if (noisy) {
    if (noise == nullptr) throw ContractError("critic: expansion noise is enabled but no noise stream was supplied");
    tokens = ad::add(tape, tokens, gaussian(*noise, tokens.shape(), config_.noise_std));
  }
  return tokens;
}

Tensor ReaCritic::block(Tape& tape, const Tensor& tokens, std::size_t index, Tensor* attention_weights) const {
  const Block& b = blocks_.at(index);
  const std::size_t B = tokens.dim(0), H = tokens.dim(1), d = config_.hidden_dim;
  const std::size_t nh = config_.heads, dk = d / nh;

  Tensor attended;
  {
    const Tensor x = ad::layer_norm(tape, tokens, b.ln1_gain, b.ln1_bias);
    Tensor q, k, v;
    {
      MacScope scope(MacCategory::kAttentionProjection);
      q = ad::add(tape, ad::matmul(tape, x, b.wq), b.bq);
      k = ad::add(tape, ad::matmul(tape, x, b.wk), b.bk);
      v = ad::add(tape, ad::matmul(tape, x, b.wv), b.bv);
    }
    // [B, H, d] -> [B, heads, H, dk]; keys go to [B, heads, dk, H].
    const Tensor qh = ad::permute(tape, ad::reshape(tape, q, {B, H, nh, dk}), {0, 2, 1, 3});
    const Tensor kt = ad::permute(tape, ad::reshape(tape, k, {B, H, nh, dk}), {0, 2, 3, 1});
    const Tensor vh = ad::permute(tape, ad::reshape(tape, v, {B, H, nh, dk}), {0, 2, 1, 3});
    Tensor context;
    {
      MacScope scope(MacCategory::kAttentionScores);
      const Tensor scores = ad::mul_scalar(tape, ad::matmul(tape, qh, kt), 1.0 / std::sqrt(static_cast<double>(dk)));
      const Tensor weights = ad::softmax(tape, scores, -1);
      if (attention_weights != nullptr) *attention_weights = weights;
      context = ad::matmul(tape, weights, vh);
    }
    const Tensor merged = ad::reshape(tape, ad::permute(tape, context, {0, 2, 1, 3}), {B, H, d});
    MacScope scope(MacCategory::kAttentionProjection);
    attended = ad::add(tape, ad::matmul(tape, merged, b.wo), b.bo);
  }
  const Tensor mid = ad::add(tape, tokens, attended);

  MacScope scope(MacCategory::kFeedForward);
  const Tensor y = ad::layer_norm(tape, mid, b.ln2_gain, b.ln2_bias);
  const Tensor hidden = ad::gelu(tape, ad::add(tape, ad::matmul(tape, y, b.w1), b.b1));
  const Tensor out = ad::add(tape, ad::matmul(tape, hidden, b.w2), b.b2);
  return ad::add(tape, mid, out);
}

Tensor ReaCritic::aggregate(Tape& tape, const Tensor& tokens, Tensor* weights) const {
  MacScope scope(MacCategory::kAggregation);
  const std::size_t B = tokens.dim(0), H = tokens.dim(1), d = tokens.dim(2);
  const Tensor scores = ad::matmul(tape, tokens, w_agg_);  // [B, H, 1]
  const Tensor w = ad::softmax(tape, scores, 1);
  if (weights != nullptr) *weights = w;
  const Tensor pooled = ad::matmul(tape, ad::reshape(tape, w, {B, 1, H}), tokens);  // [B, 1, d]
  return ad::reshape(tape, pooled, {B, d});
}

Tensor ReaCritic::head(Tape& tape, const Tensor& pooled) const {
  MacScope scope(MacCategory::kHead);
  const Tensor normed = ad::layer_norm(tape, pooled, final_gain_, final_bias_);
  return ad::reshape(tape, ad::matmul(tape, normed, w_q_), {pooled.dim(0)});
}

Tensor ReaCritic::forward(Tape& tape, const Tensor& state, const Tensor& action, bool training, Rng* noise) const {
  return forward(tape, state, action, training, noise, nullptr);
}

Tensor ReaCritic::forward(Tape& tape, const Tensor& state, const Tensor& action, bool training, Rng* noise,
                          ReaCriticTrace* trace) const {
  const Tensor z0 = embed(tape, state, action);
  Tensor tokens = expand(tape, z0, training, noise);
  if (trace != nullptr) {
    *trace = ReaCriticTrace{};
    trace->embedding = z0;
    trace->expanded = tokens;
  }
  for (std::size_t v = 0; v < blocks_.size(); ++v) {
    Tensor weights;
    tokens = block(tape, tokens, v, trace ? &weights : nullptr);
    if (trace != nullptr) {
      trace->block_outputs.push_back(tokens);
      trace->attention_weights.push_back(weights);
    }
  }
  const Tensor pooled = aggregate(tape, tokens, trace ? &trace->aggregation_weights : nullptr);
  if (trace != nullptr) trace->aggregated = pooled;
  return head(tape, pooled);
}

}  // namespace reacritic::critic
