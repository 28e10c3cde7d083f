#include "reacritic/env/point_mass.hpp"

#include <algorithm>
#include <cmath>
#include <istream>

#include "reacritic/config_file.hpp"
#include "reacritic/errors.hpp"
#include "reacritic/rng.hpp"

namespace reacritic::env {

void PointMassConfig::validate() const {
  if (!(mass > 0.0)) throw ConfigError("pointmass: mass must be positive");
  if (!(dt > 0.0)) throw ConfigError("pointmass: dt must be positive");
  if (!(friction >= 0.0)) throw ConfigError("pointmass: friction must be >= 0");
  if (max_steps < 1) throw ConfigError("pointmass: max_steps must be >= 1");
  if (!(goal_radius >= 0.0)) throw ConfigError("pointmass: goal_radius must be >= 0");
  if (!(action_cost >= 0.0)) throw ConfigError("pointmass: action_cost must be >= 0");
}

PointMassConfig load_point_mass_config(std::istream& in) {
  return point_mass_config_from(ConfigFile::parse(in, "<pointmass config>"));
}

PointMassConfig point_mass_config_from(const ConfigFile& file) {
  file.reject_unknown("pointmass", {"mass", "dt", "friction", "max_steps", "goal_radius", "action_cost"});
  PointMassConfig c;
  c.mass = file.get_double("pointmass.mass", c.mass);
  c.dt = file.get_double("pointmass.dt", c.dt);
  c.friction = file.get_double("pointmass.friction", c.friction);
  c.max_steps = file.get_size("pointmass.max_steps", c.max_steps);
  c.goal_radius = file.get_double("pointmass.goal_radius", c.goal_radius);
  c.action_cost = file.get_double("pointmass.action_cost", c.action_cost);
  c.validate();
  return c;
}

PointMassEnv::PointMassEnv(PointMassConfig config) : config_(config) { config_.validate(); }

double PointMassEnv::distance() const {
  return std::hypot(state_.position[0] - state_.target[0], state_.position[1] - state_.target[1]);
}

std::vector<double> PointMassEnv::observation() const {
  return {state_.position[0], state_.position[1], state_.velocity[0],
          state_.velocity[1], state_.target[0],   state_.target[1]};
}

StepResult PointMassEnv::reset(std::uint64_t seed) {
  Rng rng = Rng::stream(seed, "pointmass/init");
  state_ = PointMassState{};
  // Start and target are kept apart so no episode begins solved.
  do {
    for (int i = 0; i < 2; ++i) {
      state_.position[i] = rng.uniform(0.1, 0.9);
      state_.target[i] = rng.uniform(0.1, 0.9);
    }
  } while (distance() < 0.3);
  initialized_ = true;
  done_ = false;
  StepResult r;
  r.observation = observation();
  return r;
}

StepResult PointMassEnv::step(std::span<const double> action) {
  if (action.size() != 2) throw DimensionError("pointmass: action must have 2 entries");
  const std::array<double, 2> force{2.0 * action[0] - 1.0, 2.0 * action[1] - 1.0};
  return step_force(force);
}

StepResult PointMassEnv::step_force(std::span<const double> force) {
  if (!initialized_) throw StateError("pointmass: step before reset");
  if (done_) throw StateError("pointmass: step on a finished episode; call reset()");
  if (force.size() != 2) throw DimensionError("pointmass: force must have 2 entries");

  StepResult r;
  bool clipped = false;
  std::array<double, 2> f{};
  for (int i = 0; i < 2; ++i) {
    const double raw = std::isnan(force[i]) ? 0.0 : force[i];
    f[i] = std::clamp(raw, -1.0, 1.0);
    clipped = clipped || f[i] != force[i];
  }

  for (int i = 0; i < 2; ++i) {
    auto& v = state_.velocity[i];
    auto& p = state_.position[i];
    v += config_.dt * (f[i] / config_.mass - config_.friction * v);
    p += config_.dt * v;
    // Inelastic walls.
    if (p < 0.0 || p > 1.0) {
      p = std::clamp(p, 0.0, 1.0);
      v = 0.0;
    }
  }
  ++state_.step;

  const double dist = distance();
  r.reward = -dist - config_.action_cost * (f[0] * f[0] + f[1] * f[1]);
  const bool reached = dist < config_.goal_radius;
  r.done = state_.step >= config_.max_steps || reached;
  r.truncated = r.done && !reached;
  done_ = r.done;
  r.info["clipped"] = clipped ? 1.0 : 0.0;
  r.info["distance"] = dist;
  r.observation = observation();
  return r;
}

}  // namespace reacritic::env
