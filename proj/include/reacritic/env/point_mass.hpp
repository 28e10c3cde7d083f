#pragma once

// Point mass on the unit square that must reach a fixed target.
//
// Observation (6 values): position x, y; velocity vx, vy; target x, y.
// Generic step() takes actions in [0,1]^2 and maps them to forces 2u - 1;
// step_force() takes forces in [-1,1]^2 directly. Out-of-box inputs are
// clipped and reported as info["clipped"] = 1.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>

#include "reacritic/config_file.hpp"
#include "reacritic/env/environment.hpp"

namespace reacritic::env {

struct PointMassConfig {
  double mass = 1.0;
  double dt = 0.05;
  double friction = 0.1;
  std::size_t max_steps = 200;
  double goal_radius = 0.05;
  double action_cost = 0.01;

  void validate() const;
};

PointMassConfig load_point_mass_config(std::istream& in);
/// Reads the `[pointmass]` section of an already parsed file.
PointMassConfig point_mass_config_from(const ConfigFile& file);

struct PointMassState {
  std::array<double, 2> position{};
  std::array<double, 2> velocity{};
  std::array<double, 2> target{};
  std::size_t step = 0;
};

class PointMassEnv final : public Environment {
 public:
  explicit PointMassEnv(PointMassConfig config = {});

  std::string name() const override { return "pointmass"; }
  std::size_t observation_dim() const override { return 6; }
  std::size_t action_dim() const override { return 2; }

  StepResult reset(std::uint64_t seed) override;
  StepResult step(std::span<const double> action) override;
  StepResult step_force(std::span<const double> force);

  const PointMassState& state() const { return state_; }
  PointMassState& mutable_state() { return state_; }
  const PointMassConfig& config() const { return config_; }
  double distance() const;

 private:
  std::vector<double> observation() const;

  PointMassConfig config_;
  PointMassState state_;
  bool initialized_ = false;
  bool done_ = false;
};

}  // namespace reacritic::env
