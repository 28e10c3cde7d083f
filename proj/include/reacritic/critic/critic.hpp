#pragma once

#include <iosfwd>
#include <memory>
#include <string>

#include "reacritic/autodiff/parameters.hpp"
#include "reacritic/autodiff/tape.hpp"
#include "reacritic/autodiff/tensor.hpp"
#include "reacritic/rng.hpp"

namespace reacritic::critic {

/// State-action value network Q(s, a) as seen by the trainers.
///
/// forward() maps state [B, d_s] and action [B, d_a] to Q values [B].
/// `training` selects train-time behaviour (stochastic expansion noise for
/// ReaCritic); `noise` is the stream any such randomness is drawn from and may
/// be null when the network is deterministic in that mode.
class Critic {
 public:
  virtual ~Critic() = default;

  virtual std::string kind() const = 0;
  virtual std::size_t state_dim() const = 0;
  virtual std::size_t action_dim() const = 0;

  virtual ad::Tensor forward(ad::Tape& tape, const ad::Tensor& state, const ad::Tensor& action, bool training,
                             Rng* noise) const = 0;

  /// Independent deep copy (target networks).
  virtual std::unique_ptr<Critic> clone() const = 0;

  ad::ParameterSet& params() { return params_; }
  const ad::ParameterSet& params() const { return params_; }

  void save(std::ostream& out) const { ad::save_parameters(out, params_); }
  void load(std::istream& in) { ad::load_parameters(in, params_); }

 protected:
  ad::ParameterSet params_;
};

}  // namespace reacritic::critic
