#include "reacritic/env/hetnet.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>

#include "reacritic/config_file.hpp"
#include "reacritic/errors.hpp"

namespace reacritic::env {
namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string("env: ") + name + " must be positive and finite");
}

void require_range(double lo, double hi, const char* name) {
  if (!(lo <= hi)) throw ConfigError(std::string("env: ") + name + " range is empty (min > max)");
}

}  // namespace

void EnvConfig::validate() const {
  if (users < 1) throw ConfigError("env: users must be >= 1");
  if (!(mobility_std >= 0.0)) throw ConfigError("env: mobility_std must be >= 0");
  require_positive(path_loss_exponent, "path_loss_exponent");
  if (!(rician_k >= 0.0)) throw ConfigError("env: rician_k must be >= 0");
  require_positive(uplink_power_max, "uplink_power_max");
  require_positive(downlink_power_max, "downlink_power_max");
  require_positive(uplink_bandwidth, "uplink_bandwidth");
  require_positive(downlink_bandwidth, "downlink_bandwidth");
  require_positive(uplink_noise, "uplink_noise");
  require_positive(downlink_noise, "downlink_noise");
  require_positive(compute_capacity, "compute_capacity");
  require_positive(distance_min, "distance_min");
  require_range(distance_min, distance_max, "distance");
  if (episode_length < 1) throw ConfigError("env: episode_length must be >= 1");
  require_positive(latency_threshold_min, "latency_threshold_min");
  require_range(latency_threshold_min, latency_threshold_max, "latency_threshold");
  require_positive(demand_min, "demand_min");
  require_range(demand_min, demand_max, "demand");
  if (type_count < 1 || type_count > kMaxUserTypes) {
    throw ConfigError("env: type_count must be in [1, " + std::to_string(kMaxUserTypes) + "]");
  }
  require_positive(cpu_freq_min, "cpu_freq_min");
  require_range(cpu_freq_min, cpu_freq_max, "cpu_freq");
  require_positive(capacitance_min, "capacitance_min");
  require_range(capacitance_min, capacitance_max, "capacitance");
  require_positive(latency_cap, "latency_cap");
}

EnvConfig load_env_config(std::istream& in) {
  const ConfigFile file = ConfigFile::parse(in, "<env config>");
  const bool sectioned = std::any_of(file.entries().begin(), file.entries().end(),
                                     [](const auto& kv) { return kv.first.rfind("env.", 0) == 0; });
  return env_config_from(file, sectioned ? "env" : "");
}

EnvConfig env_config_from(const ConfigFile& file, const std::string& section) {
  const std::string p = section.empty() ? "" : section + ".";
  file.reject_unknown(section,
                      {"users", "mobility_std", "path_loss_exponent", "rician_k", "uplink_power_max",
                       "downlink_power_max", "uplink_bandwidth", "downlink_bandwidth", "uplink_noise",
                       "downlink_noise", "compute_capacity", "distance_min", "distance_max", "episode_length",
                       "latency_threshold_min", "latency_threshold_max", "demand_min", "demand_max", "type_count",
                       "cpu_freq_min", "cpu_freq_max", "capacitance_min", "capacitance_max", "latency_cap",
                       "uplink_rate_ref", "downlink_rate_ref", "seed"});
  EnvConfig c;
  c.users = file.get_size(p + "users", c.users);
  c.mobility_std = file.get_double(p + "mobility_std", c.mobility_std);
  c.path_loss_exponent = file.get_double(p + "path_loss_exponent", c.path_loss_exponent);
  c.rician_k = file.get_double(p + "rician_k", c.rician_k);
  c.uplink_power_max = file.get_double(p + "uplink_power_max", c.uplink_power_max);
  c.downlink_power_max = file.get_double(p + "downlink_power_max", c.downlink_power_max);
  c.uplink_bandwidth = file.get_double(p + "uplink_bandwidth", c.uplink_bandwidth);
  c.downlink_bandwidth = file.get_double(p + "downlink_bandwidth", c.downlink_bandwidth);
  c.uplink_noise = file.get_double(p + "uplink_noise", c.uplink_noise);
  c.downlink_noise = file.get_double(p + "downlink_noise", c.downlink_noise);
  c.compute_capacity = file.get_double(p + "compute_capacity", c.compute_capacity);
  c.distance_min = file.get_double(p + "distance_min", c.distance_min);
  c.distance_max = file.get_double(p + "distance_max", c.distance_max);
  c.episode_length = file.get_size(p + "episode_length", c.episode_length);
  c.latency_threshold_min = file.get_double(p + "latency_threshold_min", c.latency_threshold_min);
  c.latency_threshold_max = file.get_double(p + "latency_threshold_max", c.latency_threshold_max);
  c.demand_min = file.get_double(p + "demand_min", c.demand_min);
  c.demand_max = file.get_double(p + "demand_max", c.demand_max);
  c.type_count = file.get_size(p + "type_count", c.type_count);
  c.cpu_freq_min = file.get_double(p + "cpu_freq_min", c.cpu_freq_min);
  c.cpu_freq_max = file.get_double(p + "cpu_freq_max", c.cpu_freq_max);
  c.capacitance_min = file.get_double(p + "capacitance_min", c.capacitance_min);
  c.capacitance_max = file.get_double(p + "capacitance_max", c.capacitance_max);
  c.latency_cap = file.get_double(p + "latency_cap", c.latency_cap);
  c.uplink_rate_ref = file.get_double(p + "uplink_rate_ref", c.uplink_rate_ref);
  c.downlink_rate_ref = file.get_double(p + "downlink_rate_ref", c.downlink_rate_ref);
  c.seed = file.get_u64(p + "seed", c.seed);
  c.validate();
  return c;
}

const std::array<TypeProfile, kMaxUserTypes>& type_profiles() {
  // Throughput-, latency-, energy-oriented and balanced users.
  static const std::array<TypeProfile, kMaxUserTypes> table{{
      {{1.0, 1.0, 0.1, 0.1, 0.5}, {4.0, 4.0, 0.2, 0.2, 0.2, 0.2, 0.5}},
      {{0.5, 0.5, 0.1, 0.1, 2.0}, {2.0, 2.0, 0.2, 0.2, 0.2, 0.2, 1.5}},
      {{0.5, 0.5, 1.0, 1.0, 0.5}, {2.0, 2.0, 0.2, 0.2, 1.0, 1.0, 0.5}},
      {{1.0, 1.0, 0.5, 0.5, 1.0}, {3.0, 3.0, 0.3, 0.3, 0.5, 0.5, 1.0}},
  }};
  return table;
}

GlobalAction::GlobalAction(std::size_t users, std::vector<double> values) : users_(users), values_(std::move(values)) {
  if (values_.size() != users_ * kActionsPerUser) {
    throw DimensionError("global action needs " + std::to_string(users_ * kActionsPerUser) + " values, got " +
                         std::to_string(values_.size()));
  }
}

double GlobalAction::column_sum(Resource r) const {
  double s = 0.0;
  for (std::size_t m = 0; m < users_; ++m) s += get(m, r);
  return s;
}

GlobalAction project_action(std::span<const double> raw, std::size_t users) {
  if (raw.size() != users * kActionsPerUser) {
    throw DimensionError("project_action: expected " + std::to_string(users * kActionsPerUser) + " values, got " +
                         std::to_string(raw.size()));
  }
  std::vector<double> v(raw.begin(), raw.end());
  for (double& x : v) x = std::isnan(x) ? 0.0 : std::clamp(x, 0.0, 1.0);
  for (Resource r : {Resource::kDownlinkPower, Resource::kUplinkBandwidth, Resource::kDownlinkBandwidth,
                     Resource::kCompute}) {
    const auto col = static_cast<std::size_t>(r);
    double total = 0.0;
    for (std::size_t m = 0; m < users; ++m) total += v[m * kActionsPerUser + col];
    // Division by the sum can land one ulp above 1; shrink until it does not,
    // so projecting a projected action is a no-op.
    while (total > 1.0) {
      double next = 0.0;
      for (std::size_t m = 0; m < users; ++m) {
        double& x = v[m * kActionsPerUser + col];
        x /= total;
        next += x;
      }
      total = next > 1.0 ? next * (1.0 + std::numeric_limits<double>::epsilon()) : next;
    }
  }
  return GlobalAction(users, std::move(v));
}

double path_loss(double distance, double exponent) {
  if (!(distance > 0.0)) throw DomainError("path_loss: distance must be positive");
  return std::pow(distance, -exponent);
}

double sample_rician(double k, Rng& rng) {
  if (!(k >= 0.0)) throw DomainError("sample_rician: K-factor must be >= 0");
  if (std::isinf(k)) return 1.0;
  // h = sqrt(K/(K+1)) + sqrt(1/(K+1)) * CN(0,1); E|h|^2 = 1.
  const double los = std::sqrt(k / (k + 1.0));
  const double scatter = std::sqrt(1.0 / (2.0 * (k + 1.0)));
  const double re = los + scatter * rng.normal();
  const double im = scatter * rng.normal();
  return re * re + im * im;
}

double sinr_uplink(std::size_t m, const GlobalAction& action, std::span<const UserState> users, double noise_power) {
  // Own term uses the user's P_u,m; interferers transmit at their maximum
  // uplink power scaled by their allocation factor.
  double interference = 0.0;
  for (std::size_t j = 0; j < users.size(); ++j) {
    if (j == m) continue;
    interference += action.p_u(j) * users[j].uplink_power * users[j].uplink_fading * users[j].path_loss;
  }
  const auto& u = users[m];
  return action.p_u(m) * u.uplink_power * u.uplink_fading * u.path_loss / (interference + noise_power);
}

double sinr_downlink(std::size_t m, const GlobalAction& action, std::span<const UserState> users, double noise_power) {
  double interference = 0.0;
  for (std::size_t j = 0; j < users.size(); ++j) {
    if (j == m) continue;
    interference += action.p_d(j) * users[j].downlink_power * users[j].downlink_fading * users[j].path_loss;
  }
  const auto& u = users[m];
  return action.p_d(m) * u.downlink_power * u.downlink_fading * u.path_loss / (interference + noise_power);
}

double shannon_rate(double share, double bandwidth, double sinr) { return share * bandwidth * std::log2(1.0 + sinr); }

double energy_efficiency(double rate, double share, double power_max) {
  const double power = share * power_max;
  return power > 0.0 ? rate / power : 0.0;
}

double service_latency(double demand, double rate_u, double share, double capacity, double efficiency, double cap) {
  if (!(rate_u > 0.0) || !(share > 0.0)) return cap;
  const double value = demand / rate_u + demand / (share * capacity * efficiency);
  return std::min(value, cap);
}

double utility(const UserMetrics& metrics, const std::array<double, 5>& w) {
  return w[0] * metrics.rate_u + w[1] * metrics.rate_d + w[2] * metrics.ee_u + w[3] * metrics.ee_d -
         w[4] * metrics.latency;
}

double user_reward(const UserMetrics& metrics, const GlobalAction& action, std::size_t m,
                   const std::array<double, 7>& w, double latency_threshold, double uplink_ref, double downlink_ref) {
  const double violation = metrics.latency > latency_threshold ? 1.0 : 0.0;
  return w[0] * metrics.rate_u / uplink_ref + w[1] * metrics.rate_d / downlink_ref - w[2] * action.b_u(m) -
         w[3] * action.b_d(m) - w[4] * action.p_u(m) * action.p_u(m) - w[5] * action.p_d(m) * action.p_d(m) -
         w[6] * violation;
}

HetNetEnv::HetNetEnv(EnvConfig config) : config_(std::move(config)) { config_.validate(); }

void HetNetEnv::refresh_path_loss(UserState& u) const { u.path_loss = path_loss(u.distance, config_.path_loss_exponent); }

StepResult HetNetEnv::reset(std::uint64_t seed) {
  Rng init = Rng::stream(seed, "hetnet/init");
  mobility_rng_ = Rng::stream(seed, "hetnet/mobility");
  fading_rng_ = Rng::stream(seed, "hetnet/fading");
  const auto& profiles = type_profiles();

  users_.assign(config_.users, UserState{});
  for (auto& u : users_) {
    u.demand = init.uniform(config_.demand_min, config_.demand_max);
    u.latency = 0.0;
    u.position = init.uniform();
    u.cpu_freq = init.uniform(config_.cpu_freq_min, config_.cpu_freq_max);
    u.type = static_cast<std::size_t>(init.index(config_.type_count));
    u.uplink_power = config_.uplink_power_max;
    u.distance = init.uniform(config_.distance_min, config_.distance_max);
    refresh_path_loss(u);
    u.uplink_noise_std = std::sqrt(config_.uplink_noise);
    u.downlink_noise_std = std::sqrt(config_.downlink_noise);
    u.downlink_power = config_.downlink_power_max;
    u.compute_capacity = config_.compute_capacity;
    u.capacitance = init.uniform(config_.capacitance_min, config_.capacitance_max);
    u.efficiency = 1.0 / (u.capacitance * u.cpu_freq);
    u.latency_threshold = init.uniform(config_.latency_threshold_min, config_.latency_threshold_max);
    u.weights = profiles[u.type];
  }
  resample_fading();
  step_index_ = 0;
  initialized_ = true;

  StepResult r;
  r.observation = observation();
  r.per_user_rewards.assign(config_.users, 0.0);
  return r;
}

void HetNetEnv::step_mobility() {
  if (!initialized_) throw StateError("hetnet: step_mobility before reset");
  const double span = config_.distance_max - config_.distance_min;
  for (auto& u : users_) {
    const double next = std::clamp(u.position + mobility_rng_.normal(0.0, config_.mobility_std), 0.0, 1.0);
    const double moved = next - u.position;
    u.position = next;
    if (moved != 0.0) {
      u.distance = std::clamp(u.distance + span * moved, config_.distance_min, config_.distance_max);
      refresh_path_loss(u);
    }
  }
}

void HetNetEnv::resample_fading() {
  for (auto& u : users_) {
    u.uplink_fading = sample_rician(config_.rician_k, fading_rng_);
    u.downlink_fading = sample_rician(config_.rician_k, fading_rng_);
  }
}

std::vector<UserMetrics> HetNetEnv::evaluate(const GlobalAction& action) const {
  if (action.users() != users_.size()) throw DimensionError("hetnet: action user count does not match environment");
  std::vector<UserMetrics> out(users_.size());
  for (std::size_t m = 0; m < users_.size(); ++m) {
    auto& x = out[m];
    const auto& u = users_[m];
    x.sinr_u = sinr_uplink(m, action, users_, config_.uplink_noise);
    x.sinr_d = sinr_downlink(m, action, users_, config_.downlink_noise);
    x.rate_u = shannon_rate(action.b_u(m), config_.uplink_bandwidth, x.sinr_u);
    x.rate_d = shannon_rate(action.b_d(m), config_.downlink_bandwidth, x.sinr_d);
    x.ee_u = energy_efficiency(x.rate_u, action.p_u(m), u.uplink_power);
    x.ee_d = energy_efficiency(x.rate_d, action.p_d(m), u.downlink_power);
    x.latency = service_latency(u.demand, x.rate_u, action.c(m), u.compute_capacity, u.efficiency, config_.latency_cap);
  }
  return out;
}

StepResult HetNetEnv::step(std::span<const double> raw) {
  if (!initialized_) throw StateError("hetnet: step before reset");
  if (terminal()) throw StateError("hetnet: step on a finished episode; call reset()");
  const GlobalAction action = project_action(raw, config_.users);
  const auto metrics = evaluate(action);

  StepResult r;
  r.per_user_rewards.resize(users_.size());
  double total = 0.0;
  double violations = 0.0;
  for (std::size_t m = 0; m < users_.size(); ++m) {
    const auto& u = users_[m];
    const auto& x = metrics[m];
    const double rm = user_reward(x, action, m, u.weights.reward, u.latency_threshold, config_.uplink_reference(),
                                  config_.downlink_reference());
    r.per_user_rewards[m] = rm;
    total += rm;
    if (x.latency > u.latency_threshold) violations += 1.0;
    const std::string k = std::to_string(m);
    r.info["rate_u_" + k] = x.rate_u;
    r.info["rate_d_" + k] = x.rate_d;
    r.info["ee_u_" + k] = x.ee_u;
    r.info["ee_d_" + k] = x.ee_d;
    r.info["latency_" + k] = x.latency;
    r.info["sinr_u_" + k] = x.sinr_u;
    r.info["sinr_d_" + k] = x.sinr_d;
    r.info["utility_" + k] = utility(x, u.weights.utility);
  }
  r.info["violations"] = violations;
  r.reward = total / static_cast<double>(users_.size());

  for (std::size_t m = 0; m < users_.size(); ++m) users_[m].latency = metrics[m].latency;
  step_mobility();
  resample_fading();
  ++step_index_;
  r.done = terminal();
  r.truncated = r.done;
  r.observation = observation();
  return r;
}

std::vector<double> HetNetEnv::observation() const {
  const double pl_ref = path_loss(config_.distance_min, config_.path_loss_exponent);
  const double rho_ref = 1.0 / (config_.capacitance_min * config_.cpu_freq_min);
  const double type_scale = static_cast<double>(std::max<std::size_t>(1, config_.type_count - 1));
  std::vector<double> obs;
  obs.reserve(observation_dim());
  for (const auto& u : users_) {
    obs.push_back(u.demand / config_.demand_max);
    obs.push_back(u.latency / config_.latency_cap);
    obs.push_back(u.position);
    obs.push_back(u.cpu_freq / config_.cpu_freq_max);
    obs.push_back(static_cast<double>(u.type) / type_scale);
    obs.push_back(u.uplink_power / config_.uplink_power_max);
    obs.push_back(u.uplink_fading);
    obs.push_back(u.path_loss / pl_ref);
    obs.push_back(u.uplink_noise_std / std::sqrt(config_.uplink_noise));
    obs.push_back(u.downlink_power / config_.downlink_power_max);
    obs.push_back(u.downlink_fading);
    obs.push_back(u.downlink_noise_std / std::sqrt(config_.downlink_noise));
    obs.push_back(u.compute_capacity / config_.compute_capacity);
    obs.push_back(u.efficiency / rho_ref);
  }
  return obs;
}

}  // namespace reacritic::env
