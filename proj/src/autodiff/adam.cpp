#include "reacritic/autodiff/adam.hpp"

#include <cmath>
#include <string>

#include "reacritic/errors.hpp"

namespace reacritic::ad {

void AdamConfig::validate() const {
  if (!(lr > 0.0)) throw ConfigError("adam: learning rate must be positive, got " + std::to_string(lr));
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("adam: betas must lie in [0, 1)");
  }
  if (!(eps > 0.0)) throw ConfigError("adam: eps must be positive");
}

void adam_step(std::span<double> param, std::span<const double> grad, std::span<double> first_moment,
               std::span<double> second_moment, const AdamConfig& config, std::int64_t step) {
  config.validate();
  if (grad.size() != param.size() || first_moment.size() != param.size() || second_moment.size() != param.size()) {
    throw DimensionError("adam_step: parameter, gradient and moment buffers differ in length");
  }
  if (step < 1) throw ContractError("adam_step: step index is 1-based");
  const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
  for (std::size_t i = 0; i < param.size(); ++i) {
    first_moment[i] = config.beta1 * first_moment[i] + (1.0 - config.beta1) * grad[i];
    second_moment[i] = config.beta2 * second_moment[i] + (1.0 - config.beta2) * grad[i] * grad[i];
    const double m_hat = first_moment[i] / c1;
    const double v_hat = second_moment[i] / c2;
    param[i] -= config.lr * m_hat / (std::sqrt(v_hat) + config.eps);
  }
}

Adam::Adam(std::vector<Tensor> params, AdamConfig config) : params_(std::move(params)), config_(config) {
  config_.validate();
  for (const auto& p : params_) {
    first_.emplace_back(p.size(), 0.0);
    second_.emplace_back(p.size(), 0.0);
  }
}

void Adam::zero_grad() {
  for (auto& p : params_) p.clear_grad();
}

void Adam::step() {
  ++step_;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& p = params_[i];
    if (!p.has_grad()) continue;
    adam_step(p.mutable_data(), p.grad(), first_[i], second_[i], config_, step_);
  }
}

}  // namespace reacritic::ad
