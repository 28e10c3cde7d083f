#pragma once

#include <cstdint>
#include <vector>

#include "reacritic/autodiff/tensor.hpp"
#include "reacritic/rng.hpp"

namespace reacritic::drl {

struct Transition {
  std::vector<double> state;
  std::vector<double> action;
  double reward = 0.0;
  std::vector<double> next_state;
  bool done = false;  // terminal: no bootstrap from next_state
};

/// Mini-batch as tensors: state [B, d_s], action [B, d_a], reward [B],
/// next_state [B, d_s], done [B] with 1 for terminal rows.
struct Batch {
  ad::Tensor state;
  ad::Tensor action;
  ad::Tensor reward;
  ad::Tensor next_state;
  ad::Tensor done;

  std::size_t size() const { return reward.size(); }
};

Batch make_batch(const std::vector<Transition>& rows);

/// Fixed-capacity FIFO ring of transitions with uniform sampling (with
/// replacement) driven by its own random stream.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, std::size_t state_dim, std::size_t action_dim, std::uint64_t seed);

  void push(Transition t);
  /// Throws UnderflowError when fewer than `batch_size` transitions are stored.
  Batch sample(std::size_t batch_size);
  std::vector<std::size_t> sample_indices(std::size_t batch_size);

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  /// Stored transition by age: 0 is the oldest.
  const Transition& at(std::size_t index) const;

 private:
  std::size_t capacity_;
  std::size_t state_dim_;
  std::size_t action_dim_;
  std::vector<Transition> storage_;
  std::size_t head_ = 0;  // next write slot
  std::size_t size_ = 0;
  Rng rng_;
};

}  // namespace reacritic::drl
