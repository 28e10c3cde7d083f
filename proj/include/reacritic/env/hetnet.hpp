#pragma once

// Single-cell heterogeneous network with M mobile users sharing uplink and
// downlink power, bandwidth and edge compute.
//
// Observation layout: M consecutive blocks of kUserFeatures values, one per
// user, each in this order (all dimensionless):
//
//   0  demand d_m / demand_max
//   1  last latency L_m / latency_cap
//   2  normalized position x_m
//   3  CPU frequency f_m / cpu_freq_max
//   4  type index tau_m / max(1, type_count - 1)
//   5  max uplink power P_u,m / uplink_power_max
//   6  uplink fading gain q_u,m
//   7  path loss zeta_m / distance_min^-gamma
//   8  uplink noise std / sqrt(uplink_noise)
//   9  BS power P_d,max / downlink_power_max
//  10  downlink fading gain q_d,m
//  11  downlink noise std / sqrt(downlink_noise)
//  12  compute capacity C_max / compute_capacity
//  13  compute efficiency rho_m / rho_ref, rho_ref = 1 / (capacitance_min * cpu_freq_min)
//
// Info map keys after step(), for each user index m (0-based):
//   rate_u_<m>, rate_d_<m> [bit/s], ee_u_<m>, ee_d_<m> [bit/J], latency_<m> [s],
//   sinr_u_<m>, sinr_d_<m>, utility_<m>
// plus "violations" (users over their latency threshold).

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "reacritic/config_file.hpp"
#include "reacritic/env/environment.hpp"
#include "reacritic/rng.hpp"

namespace reacritic::env {

inline constexpr std::size_t kUserFeatures = 14;
inline constexpr std::size_t kActionsPerUser = 5;
inline constexpr std::size_t kMaxUserTypes = 4;

struct EnvConfig {
  std::size_t users = 5;
  double mobility_std = 0.01;
  double path_loss_exponent = 3.0;
  double rician_k = 3.0;
  double uplink_power_max = 0.2;     // W, per user
  double downlink_power_max = 10.0;  // W, BS total
  double uplink_bandwidth = 1e6;     // Hz
  double downlink_bandwidth = 1e6;   // Hz
  double uplink_noise = 1e-6;        // W
  double downlink_noise = 1e-5;      // W
  double compute_capacity = 1e6;     // cycles/s
  double distance_min = 5.0;         // m
  double distance_max = 10.0;        // m
  std::size_t episode_length = 200;
  double latency_threshold_min = 0.3;  // s
  double latency_threshold_max = 1.5;  // s
  double demand_min = 1e4;             // cycles
  double demand_max = 5e4;             // cycles
  std::size_t type_count = 3;
  double cpu_freq_min = 1e9;  // Hz
  double cpu_freq_max = 2e9;  // Hz
  double capacitance_min = 0.5e-9;
  double capacitance_max = 1.0e-9;
  double latency_cap = 10.0;  // s, used when latency is unbounded
  // Reward rate normalizers; <= 0 selects the full-band rate at SINR 1 (= bandwidth).
  double uplink_rate_ref = 0.0;
  double downlink_rate_ref = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
  double uplink_reference() const { return uplink_rate_ref > 0.0 ? uplink_rate_ref : uplink_bandwidth; }
  double downlink_reference() const { return downlink_rate_ref > 0.0 ? downlink_rate_ref : downlink_bandwidth; }
};

/// Reads `key = value` lines (optionally under an `[env]` section) into a config.
/// Unknown keys and malformed values raise ConfigError naming the key.
EnvConfig load_env_config(std::istream& in);
/// Same keys read from `section` of an already parsed file ("" for top level).
EnvConfig env_config_from(const ConfigFile& file, const std::string& section);

/// Preference weights for one user type.
struct TypeProfile {
  // Utility: uplink rate, downlink rate, uplink EE, downlink EE, latency.
  std::array<double, 5> utility{};
  // Reward: uplink rate, downlink rate, uplink band, downlink band, uplink power^2,
  // downlink power^2, latency violation.
  std::array<double, 7> reward{};
};

/// Fixed profile table indexed by user type.
const std::array<TypeProfile, kMaxUserTypes>& type_profiles();

struct UserState {
  double demand = 0.0;             // d_m, cycles
  double latency = 0.0;            // L_m, last computed, s
  double position = 0.0;           // x_m in [0,1]
  double cpu_freq = 0.0;           // f_m, Hz
  std::size_t type = 0;            // tau_m
  double uplink_power = 0.0;       // P_u,m, W
  double uplink_fading = 1.0;      // q_u,m
  double downlink_fading = 1.0;    // q_d,m
  double distance = 0.0;           // D_m, m
  double path_loss = 0.0;          // zeta_m
  double uplink_noise_std = 0.0;   // sigma_u
  double downlink_noise_std = 0.0; // sigma_d
  double downlink_power = 0.0;     // P_d,max, W
  double compute_capacity = 0.0;   // C_max
  double capacitance = 0.0;        // kappa_m
  double efficiency = 0.0;         // rho_m = 1 / (kappa_m f_m)
  double latency_threshold = 0.0;  // l_th,m, s
  TypeProfile weights;             // hidden from the observation
};

enum class Resource : std::size_t {
  kUplinkPower = 0,
  kDownlinkPower = 1,
  kUplinkBandwidth = 2,
  kDownlinkBandwidth = 3,
  kCompute = 4,
};

/// M x 5 allocation factors, user-major, columns ordered as Resource.
class GlobalAction {
 public:
  GlobalAction() = default;
  GlobalAction(std::size_t users, std::vector<double> values);

  std::size_t users() const { return users_; }
  double get(std::size_t user, Resource r) const { return values_[user * kActionsPerUser + static_cast<std::size_t>(r)]; }
  double p_u(std::size_t m) const { return get(m, Resource::kUplinkPower); }
  double p_d(std::size_t m) const { return get(m, Resource::kDownlinkPower); }
  double b_u(std::size_t m) const { return get(m, Resource::kUplinkBandwidth); }
  double b_d(std::size_t m) const { return get(m, Resource::kDownlinkBandwidth); }
  double c(std::size_t m) const { return get(m, Resource::kCompute); }
  double column_sum(Resource r) const;
  const std::vector<double>& values() const { return values_; }

 private:
  std::size_t users_ = 0;
  std::vector<double> values_;
};

/// Clips every entry to [0,1], then rescales each shared column (p_d, b_u,
/// b_d, c) whose sum exceeds 1. The p_u column is only clipped.
GlobalAction project_action(std::span<const double> raw, std::size_t users);

/// D^-gamma. Throws DomainError for D <= 0.
double path_loss(double distance, double exponent);

/// Power gain of a unit-mean Rician channel with linear K-factor `k`
/// (k = +inf gives the deterministic line-of-sight gain 1).
double sample_rician(double k, Rng& rng);

double sinr_uplink(std::size_t m, const GlobalAction& action, std::span<const UserState> users, double noise_power);
double sinr_downlink(std::size_t m, const GlobalAction& action, std::span<const UserState> users, double noise_power);

/// share * bandwidth * log2(1 + sinr).
double shannon_rate(double share, double bandwidth, double sinr);

/// rate / (share * power_max); 0 when the allocated power is 0.
double energy_efficiency(double rate, double share, double power_max);

/// demand/rate_u + demand/(share * capacity * efficiency), capped at `cap`.
/// Returns `cap` when rate_u or share is 0.
double service_latency(double demand, double rate_u, double share, double capacity, double efficiency, double cap);

struct UserMetrics {
  double sinr_u = 0.0;
  double sinr_d = 0.0;
  double rate_u = 0.0;
  double rate_d = 0.0;
  double ee_u = 0.0;
  double ee_d = 0.0;
  double latency = 0.0;
};

/// Weighted preference utility (raw units); diagnostic only.
double utility(const UserMetrics& metrics, const std::array<double, 5>& weights);

/// Per-user training reward with rates normalized by the reference rates.
double user_reward(const UserMetrics& metrics, const GlobalAction& action, std::size_t m,
                   const std::array<double, 7>& weights, double latency_threshold, double uplink_ref,
                   double downlink_ref);

class HetNetEnv final : public Environment {
 public:
  explicit HetNetEnv(EnvConfig config);

  std::string name() const override { return "hetnet"; }
  std::size_t observation_dim() const override { return config_.users * kUserFeatures; }
  std::size_t action_dim() const override { return config_.users * kActionsPerUser; }

  StepResult reset(std::uint64_t seed) override;
  /// Raw M x 5 action (any reals); projected before use.
  StepResult step(std::span<const double> action) override;

  /// Gaussian position update, clipped to [0,1]; distances and path loss follow.
  void step_mobility();
  void resample_fading();

  std::vector<UserMetrics> evaluate(const GlobalAction& action) const;
  std::vector<double> observation() const;

  const EnvConfig& config() const { return config_; }
  const std::vector<UserState>& users() const { return users_; }
  std::vector<UserState>& mutable_users() { return users_; }
  std::size_t step_index() const { return step_index_; }
  bool terminal() const { return step_index_ >= config_.episode_length; }

 private:
  void refresh_path_loss(UserState& u) const;

  EnvConfig config_;
  std::vector<UserState> users_;
  std::size_t step_index_ = 0;
  bool initialized_ = false;
  Rng mobility_rng_;
  Rng fading_rng_;
};

}  // namespace reacritic::env
