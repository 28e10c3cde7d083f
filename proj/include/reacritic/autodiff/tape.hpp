#pragma once

#include <functional>
#include <vector>

#include "reacritic/autodiff/tensor.hpp"

namespace reacritic::ad {

/// Records differentiable operations in execution order for one backward pass.
///
/// Operations only record a node when at least one input requires a gradient,
/// so forward passes over frozen networks leave the tape empty. A tape is
/// single use: create one per update, call backward() once, drop it.
class Tape {
 public:
  /// Propagates d(output) into the inputs' gradients.
  using BackwardFn = std::function<void(const Tensor& output)>;

  struct Node {
    std::vector<Tensor> inputs;
    Tensor output;
    BackwardFn backward;
  };

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  void record(std::vector<Tensor> inputs, Tensor output, BackwardFn backward);

  /// Seeds d(loss)/d(loss) = 1 and walks the recorded nodes in reverse.
  /// Nodes whose output never received a gradient are skipped, so tensors
  /// not reachable from `loss` are left untouched.
  void backward(const Tensor& loss);

  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  const std::vector<Node>& nodes() const { return nodes_; }

 private:
  std::vector<Node> nodes_;
  bool consumed_ = false;
};

}  // namespace reacritic::ad
