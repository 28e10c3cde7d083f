#include "reacritic/drl/actor.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "reacritic/autodiff/ops.hpp"
#include "reacritic/errors.hpp"

namespace reacritic::drl {

using ad::Tape;
using ad::Tensor;

namespace {

// Keeps log(da/du) finite when tanh saturates.
constexpr double kSquashEps = 1e-6;

Tensor gaussian_matrix(Rng& rng, std::size_t in, std::size_t out, double scale) {
  std::vector<double> v(in * out);
  const double std = scale / std::sqrt(static_cast<double>(in));
  for (auto& x : v) x = rng.normal(0.0, std);
  return Tensor::from({in, out}, std::move(v));
}

}  // namespace

void ActorConfig::validate() const {
  if (state_dim < 1 || action_dim < 1) throw ConfigError("actor: state_dim and action_dim must be >= 1");
  for (std::size_t w : hidden) {
    if (w < 1) throw ConfigError("actor: hidden widths must be >= 1");
  }
  if (!(log_std_min < log_std_max)) throw ConfigError("actor: log_std_min must be below log_std_max");
}

Actor::Actor(ActorConfig config, Algo algo, std::uint64_t seed) : config_(std::move(config)), algo_(algo) {
  config_.validate();
  Rng init = Rng::stream(seed, "actor/init");
  std::size_t prev = config_.state_dim;
  for (std::size_t i = 0; i < config_.hidden.size(); ++i) {
    const std::size_t w = config_.hidden[i];
    weights_.push_back(params_.add("layer" + std::to_string(i) + ".w", gaussian_matrix(init, prev, w, 1.0)));
    biases_.push_back(params_.add("layer" + std::to_string(i) + ".b", Tensor::zeros({w})));
    prev = w;
  }
  // Small output heads start the policy near the centre of the action box.
  mean_w_ = params_.add("mean.w", gaussian_matrix(init, prev, config_.action_dim, 0.1));
  mean_b_ = params_.add("mean.b", Tensor::zeros({config_.action_dim}));
  if (algo_ == Algo::kSac) {
    log_std_w_ = params_.add("log_std.w", gaussian_matrix(init, prev, config_.action_dim, 0.1));
    log_std_b_ = params_.add("log_std.b", Tensor::zeros({config_.action_dim}));
  }
}

std::unique_ptr<Actor> Actor::clone() const {
  auto copy = std::make_unique<Actor>(config_, algo_, 0);
  copy->params_.copy_values_from(params_);
  return copy;
}

Tensor Actor::trunk(Tape& tape, const Tensor& state) const {
  if (state.rank() != 2 || state.dim(1) != config_.state_dim) {
    throw DimensionError("actor: expected state [B," + std::to_string(config_.state_dim) + "], got " +
                         ad::to_string(state.shape()));
  }
  Tensor x = state;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    x = ad::relu(tape, ad::add(tape, ad::matmul(tape, x, weights_[i]), biases_[i]));
  }
  return x;
}

Tensor Actor::deterministic(Tape& tape, const Tensor& state) const {
  const Tensor mu = ad::add(tape, ad::matmul(tape, trunk(tape, state), mean_w_), mean_b_);
  return ad::mul_scalar(tape, ad::add_scalar(tape, ad::tanh(tape, mu), 1.0), 0.5);
}

PolicySample Actor::sample(Tape& tape, const Tensor& state, Rng* noise) const {
  const std::size_t B = state.dim(0), da = config_.action_dim;
  if (algo_ == Algo::kDdpg) return {deterministic(tape, state), Tensor::zeros({B})};

  const Tensor h = trunk(tape, state);
  const Tensor mu = ad::add(tape, ad::matmul(tape, h, mean_w_), mean_b_);
  const Tensor raw = ad::add(tape, ad::matmul(tape, h, log_std_w_), log_std_b_);
  const double lo = config_.log_std_min, hi = config_.log_std_max;
  const Tensor log_std = ad::add_scalar(tape, ad::mul_scalar(tape, ad::add_scalar(tape, ad::tanh(tape, raw), 1.0), 0.5 * (hi - lo)), lo);

  std::vector<double> eps(B * da, 0.0);
  if (noise != nullptr) {
    for (auto& e : eps) e = noise->normal();
  }
  // Constant part of log N(u; mu, sigma): -eps^2/2 - log(2 pi)/2.
  std::vector<double> base(B * da);
  for (std::size_t i = 0; i < eps.size(); ++i) base[i] = -0.5 * eps[i] * eps[i] - 0.5 * std::log(2.0 * std::numbers::pi);
  const Tensor eps_t = Tensor::from({B, da}, std::move(eps));

  const Tensor u = ad::add(tape, mu, ad::hadamard(tape, ad::exp(tape, log_std), eps_t));
  const Tensor y = ad::tanh(tape, u);
  const Tensor action = ad::mul_scalar(tape, ad::add_scalar(tape, y, 1.0), 0.5);
  // log |da/du| = log(0.5 (1 - y^2)).
  const Tensor log_jac = ad::log(tape, ad::add_scalar(tape, ad::mul_scalar(tape, ad::square(tape, y), -0.5), 0.5 + kSquashEps));
  const Tensor per_dim = ad::sub(tape, ad::sub(tape, Tensor::from({B, da}, std::move(base)), log_std), log_jac);
  return {action, ad::sum_last(tape, per_dim)};
}

std::vector<double> Actor::act(std::span<const double> observation, bool explore, Rng& rng,
                               double exploration_std) const {
  Tape tape;
  const Tensor s = Tensor::from({1, observation.size()}, std::vector<double>(observation.begin(), observation.end()));
  if (algo_ == Algo::kSac) {
    const auto p = sample(tape, s, explore ? &rng : nullptr);
    return {p.action.data().begin(), p.action.data().end()};
  }
  const Tensor a = deterministic(tape, s);
  std::vector<double> out(a.data().begin(), a.data().end());
  if (explore && exploration_std > 0.0) {
    for (auto& x : out) x = std::clamp(x + rng.normal(0.0, exploration_std), 0.0, 1.0);
  }
  return out;
}

}  // namespace reacritic::drl
