#include "reacritic/drl/replay_buffer.hpp"

#include <cmath>
#include <string>

#include "reacritic/errors.hpp"

namespace reacritic::drl {

Batch make_batch(const std::vector<Transition>& rows) {
  if (rows.empty()) throw ContractError("make_batch: no rows");
  const std::size_t B = rows.size(), ds = rows[0].state.size(), da = rows[0].action.size();
  std::vector<double> s, a, r, s2, d;
  s.reserve(B * ds);
  a.reserve(B * da);
  s2.reserve(B * ds);
  for (const auto& t : rows) {
    s.insert(s.end(), t.state.begin(), t.state.end());
    a.insert(a.end(), t.action.begin(), t.action.end());
    s2.insert(s2.end(), t.next_state.begin(), t.next_state.end());
    r.push_back(t.reward);
    d.push_back(t.done ? 1.0 : 0.0);
  }
  Batch b;
  b.state = ad::Tensor::from({B, ds}, std::move(s));
  b.action = ad::Tensor::from({B, da}, std::move(a));
  b.reward = ad::Tensor::from({B}, std::move(r));
  b.next_state = ad::Tensor::from({B, ds}, std::move(s2));
  b.done = ad::Tensor::from({B}, std::move(d));
  return b;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::size_t state_dim, std::size_t action_dim, std::uint64_t seed)
    : capacity_(capacity), state_dim_(state_dim), action_dim_(action_dim), rng_(seed) {
  if (capacity_ < 1) throw ConfigError("replay buffer capacity must be >= 1");
  storage_.reserve(std::min<std::size_t>(capacity_, 1 << 16));
}

void ReplayBuffer::push(Transition t) {
  if (t.state.size() != state_dim_ || t.next_state.size() != state_dim_ || t.action.size() != action_dim_) {
    throw DimensionError("replay buffer: transition dimensions do not match (state " + std::to_string(state_dim_) +
                         ", action " + std::to_string(action_dim_) + ")");
  }
  if (!std::isfinite(t.reward)) throw NumericError("replay buffer: non-finite reward");
  if (storage_.size() < capacity_) {
    storage_.push_back(std::move(t));
  } else {
    storage_[head_] = std::move(t);
  }
  head_ = (head_ + 1) % capacity_;
  size_ = std::min(size_ + 1, capacity_);
}

const Transition& ReplayBuffer::at(std::size_t index) const {
  if (index >= size_) throw ContractError("replay buffer: index out of range");
  const std::size_t oldest = size_ < capacity_ ? 0 : head_;
  return storage_[(oldest + index) % capacity_];
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t batch_size) {
  if (batch_size < 1) throw ContractError("replay buffer: batch size must be >= 1");
  if (size_ < batch_size) {
    throw UnderflowError("replay buffer holds " + std::to_string(size_) + " transitions, batch needs " +
                         std::to_string(batch_size));
  }
  std::vector<std::size_t> idx(batch_size);
  for (auto& i : idx) i = static_cast<std::size_t>(rng_.index(size_));
  return idx;
}

Batch ReplayBuffer::sample(std::size_t batch_size) {
  std::vector<Transition> rows;
  rows.reserve(batch_size);
  for (std::size_t i : sample_indices(batch_size)) rows.push_back(at(i));
  return make_batch(rows);
}

}  // namespace reacritic::drl
