#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "reacritic/autodiff/tensor.hpp"

namespace reacritic::ad {

struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void validate() const;
};

/// One bias-corrected Adam update of `param` in place. `step` is 1-based.
void adam_step(std::span<double> param, std::span<const double> grad, std::span<double> first_moment,
               std::span<double> second_moment, const AdamConfig& config, std::int64_t step);

/// Adam over a fixed list of parameter tensors, owning their moment buffers.
/// Parameters without an allocated gradient are skipped for that step.
class Adam {
 public:
  Adam(std::vector<Tensor> params, AdamConfig config);

  void zero_grad();
  void step();

  std::int64_t steps() const { return step_; }
  const AdamConfig& config() const { return config_; }

 private:
  std::vector<Tensor> params_;
  std::vector<std::vector<double>> first_;
  std::vector<std::vector<double>> second_;
  AdamConfig config_;
  std::int64_t step_ = 0;
};

}  // namespace reacritic::ad
