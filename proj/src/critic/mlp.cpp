#include "reacritic/critic/mlp.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "reacritic/autodiff/ops.hpp"
#include "reacritic/errors.hpp"

namespace reacritic::critic {

using ad::Tape;
using ad::Tensor;

void MlpConfig::validate() const {
  if (state_dim < 1 || action_dim < 1) throw ConfigError("mlp critic: state_dim and action_dim must be >= 1");
  for (std::size_t w : hidden) {
    if (w < 1) throw ConfigError("mlp critic: hidden widths must be >= 1");
  }
}

std::size_t mlp_parameter_count(std::size_t inputs, const std::vector<std::size_t>& hidden) {
  std::size_t count = 0, prev = inputs;
  for (std::size_t w : hidden) {
    count += prev * w + w;
    prev = w;
  }
  return count + prev + 1;
}

std::size_t matched_mlp_width(std::size_t budget, std::size_t inputs) {
  std::size_t best = 1;
  std::size_t best_gap = std::numeric_limits<std::size_t>::max();
  for (std::size_t w = 1; w <= 4096; ++w) {
    const std::size_t n = mlp_parameter_count(inputs, {w, w});
    const std::size_t gap = n > budget ? n - budget : budget - n;
    if (gap < best_gap) {
      best = w;
      best_gap = gap;
    }
    if (n > budget) break;
  }
  return best;
}

MlpCritic::MlpCritic(MlpConfig config, std::uint64_t seed) : config_(std::move(config)) {
  config_.validate();
  Rng init = Rng::stream(seed, "critic/init");
  std::size_t prev = config_.state_dim + config_.action_dim;
  std::vector<std::size_t> widths = config_.hidden;
  widths.push_back(1);
  for (std::size_t i = 0; i < widths.size(); ++i) {
    const std::size_t w = widths[i];
    std::vector<double> v(prev * w);
    const double std = 1.0 / std::sqrt(static_cast<double>(prev));
    for (auto& x : v) x = init.normal(0.0, std);
    weights_.push_back(params_.add("layer" + std::to_string(i) + ".w", Tensor::from({prev, w}, std::move(v))));
    biases_.push_back(params_.add("layer" + std::to_string(i) + ".b", Tensor::zeros({w})));
    prev = w;
  }
}

std::unique_ptr<Critic> MlpCritic::clone() const {
  auto copy = std::make_unique<MlpCritic>(config_, 0);
  copy->params_.copy_values_from(params_);
  return copy;
}

Tensor MlpCritic::forward(Tape& tape, const Tensor& state, const Tensor& action, bool, Rng*) const {
  if (state.rank() != 2 || state.dim(1) != config_.state_dim || action.rank() != 2 ||
      action.dim(1) != config_.action_dim || state.dim(0) != action.dim(0)) {
    throw DimensionError("mlp critic: bad input shapes " + ad::to_string(state.shape()) + " and " +
                         ad::to_string(action.shape()));
  }
  Tensor x = ad::concat_last(tape, state, action);
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    x = ad::add(tape, ad::matmul(tape, x, weights_[i]), biases_[i]);
    if (i + 1 < weights_.size()) x = ad::gelu(tape, x);
  }
  return ad::reshape(tape, x, {state.dim(0)});
}

}  // namespace reacritic::critic
