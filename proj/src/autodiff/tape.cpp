#include "reacritic/autodiff/tape.hpp"

#include <vector>

#include "reacritic/errors.hpp"

namespace reacritic::ad {

void Tape::record(std::vector<Tensor> inputs, Tensor output, BackwardFn backward) {
  if (consumed_) throw StateError("recording onto a tape that already ran backward");
  nodes_.push_back(Node{std::move(inputs), std::move(output), std::move(backward)});
}

void Tape::backward(const Tensor& loss) {
  if (loss.size() != 1) {
    throw ContractError("backward() needs a scalar loss, got shape " + to_string(loss.shape()));
  }
  if (nodes_.empty()) throw ContractError("backward() on an empty tape");
  if (consumed_) throw StateError("backward() already ran on this tape");
  consumed_ = true;

  Tensor seed = loss;
  const std::vector<double> one{1.0};
  seed.accumulate_grad(one);
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    if (!it->output.has_grad()) continue;
    it->backward(it->output);
  }
}

}  // namespace reacritic::ad
