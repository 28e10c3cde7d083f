#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace reacritic::env {

struct StepResult {
  std::vector<double> observation;
  double reward = 0.0;
  std::vector<double> per_user_rewards;
  bool done = false;
  // Episode ended by the step limit rather than a terminal state; trainers
  // keep bootstrapping through it.
  bool truncated = false;
  std::map<std::string, double> info;
};

/// Episodic continuous-control task as seen by the trainers.
///
/// Actions handed to step() are in [0,1]^action_dim(); each environment maps
/// that box onto its own action semantics.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string name() const = 0;
  virtual std::size_t observation_dim() const = 0;
  virtual std::size_t action_dim() const = 0;

  virtual StepResult reset(std::uint64_t seed) = 0;
  virtual StepResult step(std::span<const double> action) = 0;
};

}  // namespace reacritic::env
