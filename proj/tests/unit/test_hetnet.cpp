#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "reacritic/env/hetnet.hpp"
#include "reacritic/errors.hpp"
#include "reacritic/rng.hpp"

using namespace reacritic;
using namespace reacritic::env;

namespace {

bool rel_close(double a, double b, double tol = 1e-9) {
  return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), 1e-300});
}

UserState flat_user(double power, double fading, double zeta) {
  UserState u;
  u.uplink_power = power;
  u.downlink_power = power;
  u.uplink_fading = fading;
  u.downlink_fading = fading;
  u.path_loss = zeta;
  return u;
}

GlobalAction uniform_action(std::size_t users, double value) {
  return GlobalAction(users, std::vector<double>(users * kActionsPerUser, value));
}

std::vector<double> random_raw(Rng& rng, std::size_t users, double lo, double hi) {
  std::vector<double> raw(users * kActionsPerUser);
  for (auto& x : raw) x = rng.uniform(lo, hi);
  return raw;
}

}  // namespace

TEST_CASE("path loss closed forms") {
  CHECK(path_loss(1.0, 2.7) == 1.0);
  CHECK(rel_close(path_loss(10.0, 2.0), 0.01));
  CHECK(rel_close(path_loss(5.0, 3.0), 0.008));
  CHECK_THROWS_AS(path_loss(0.0, 3.0), DomainError);
  CHECK_THROWS_AS(path_loss(-1.0, 3.0), DomainError);
}

TEST_CASE("rician gain has unit mean") {
  Rng rng(11);
  CHECK(sample_rician(std::numeric_limits<double>::infinity(), rng) == 1.0);
  for (double k : {0.0, 3.0}) {
    double total = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
      const double g = sample_rician(k, rng);
      REQUIRE(g >= 0.0);
      total += g;
    }
    CHECK(std::abs(total / n - 1.0) < 0.02);
  }
  CHECK_THROWS_AS(sample_rician(-1.0, rng), DomainError);
}

TEST_CASE("sinr closed forms") {
  std::vector<UserState> one{flat_user(1.0, 1.0, 0.01)};
  CHECK(rel_close(sinr_uplink(0, uniform_action(1, 1.0), one, 0.001), 10.0));
  CHECK(rel_close(sinr_downlink(0, uniform_action(1, 1.0), one, 0.001), 10.0));

  std::vector<double> v(kActionsPerUser, 1.0);
  v[0] = 0.0;
  v[1] = 0.0;
  CHECK(sinr_uplink(0, GlobalAction(1, v), one, 0.001) == 0.0);
  CHECK(sinr_downlink(0, GlobalAction(1, v), one, 0.001) == 0.0);

  // Three symmetric users: Pqz / (2Pqz + s2).
  const double P = 0.7, q = 1.3, z = 0.02, s2 = 1e-3, p = 0.3;
  std::vector<UserState> three(3, flat_user(P, q, z));
  const double signal = p * P * q * z;
  const double expected = signal / (2.0 * signal + s2);
  for (std::size_t m = 0; m < 3; ++m) {
    CHECK(rel_close(sinr_uplink(m, uniform_action(3, p), three, s2), expected));
    CHECK(rel_close(sinr_downlink(m, uniform_action(3, p), three, s2), expected));
  }
}

TEST_CASE("interference never raises sinr") {
  Rng rng(5);
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t users = 2 + rng.index(4);
    std::vector<UserState> states;
    for (std::size_t m = 0; m < users; ++m) {
      states.push_back(flat_user(rng.uniform(0.1, 1.0), rng.uniform(0.1, 3.0), rng.uniform(1e-3, 1e-2)));
    }
    std::vector<double> raw = random_raw(rng, users, 0.0, 1.0);
    const GlobalAction base = project_action(raw, users);
    const std::size_t m = rng.index(users);
    std::size_t j = rng.index(users - 1);
    if (j >= m) ++j;
    std::vector<double> bumped = base.values();
    double& pj = bumped[j * kActionsPerUser];
    pj = std::min(1.0, pj + rng.uniform(0.0, 0.5));
    const GlobalAction more(users, bumped);
    REQUIRE(sinr_uplink(m, more, states, 1e-6) <= sinr_uplink(m, base, states, 1e-6));
  }
}

TEST_CASE("rate, efficiency and latency closed forms") {
  CHECK(rel_close(shannon_rate(1.0, 1e6, 1.0), 1e6));
  CHECK(shannon_rate(0.0, 1e6, 5.0) == 0.0);
  CHECK(rel_close(shannon_rate(0.5, 2e6, 3.0), 2e6));

  CHECK(rel_close(energy_efficiency(1e6, 0.5, 2.0), 1e6));
  CHECK(energy_efficiency(1e6, 0.0, 2.0) == 0.0);
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const double rate = rng.uniform(0.0, 1e7), p = rng.uniform(0.01, 1.0), pmax = rng.uniform(0.1, 10.0);
    CHECK(rel_close(energy_efficiency(rate, p, pmax) * (p * pmax), rate, 1e-15));
  }

  CHECK(rel_close(service_latency(1e6, 1e6, 1.0, 1e9, 1.0, 10.0), 1.001));
  CHECK(service_latency(1e6, 1e6, 0.0, 1e9, 1.0, 10.0) == 10.0);
  CHECK(service_latency(1e6, 0.0, 1.0, 1e9, 1.0, 10.0) == 10.0);
  CHECK(service_latency(1e9, 1.0, 1.0, 1e9, 1.0, 10.0) == 10.0);

  for (int i = 0; i < 1000; ++i) {
    const double d = rng.uniform(1e3, 1e5), rate = rng.uniform(1e5, 1e7), c = rng.uniform(0.01, 0.5);
    const double cap = 1e9;
    const double transmit = d / rate;
    const double once = service_latency(d, rate, c, 1e6, 1.0, cap) - transmit;
    const double twice = service_latency(d, rate, 2.0 * c, 1e6, 1.0, cap) - transmit;
    CHECK(twice < once);
  }
}

TEST_CASE("projection") {
  std::vector<double> feasible{0.3, 0.2, 0.1, 0.4, 0.5, 0.9, 0.3, 0.6, 0.2, 0.4};
  CHECK(project_action(feasible, 2).values() == feasible);

  std::vector<double> raw{0.9, 0.8, 0.1, 0.1, 0.1, 0.9, 0.8, 0.1, 0.1, 0.1};
  const GlobalAction a = project_action(raw, 2);
  CHECK(rel_close(a.p_d(0), 0.5));
  CHECK(rel_close(a.p_d(1), 0.5));
  CHECK(a.p_u(0) == 0.9);
  CHECK(a.p_u(1) == 0.9);

  Rng rng(9);
  for (int i = 0; i < 100000; ++i) {
    const std::size_t users = 1 + rng.index(8);
    const GlobalAction g = project_action(random_raw(rng, users, -1.0, 2.0), users);
    for (double x : g.values()) REQUIRE((x >= 0.0 && x <= 1.0));
    for (Resource r : {Resource::kDownlinkPower, Resource::kUplinkBandwidth, Resource::kDownlinkBandwidth,
                       Resource::kCompute}) {
      REQUIRE(g.column_sum(r) <= 1.0 + 1e-12);
    }
    if (i < 1000) CHECK(project_action(g.values(), users).values() == g.values());
  }
  CHECK_THROWS_AS(project_action(raw, 3), DimensionError);
}

TEST_CASE("utility and reward") {
  UserMetrics x{2.0, 3.0, 1.5e6, 2.5e6, 4e6, 6e6, 0.8};
  CHECK(utility(x, {0, 0, 0, 0, 0}) == 0.0);
  CHECK(utility(x, {1, 0, 0, 0, 0}) == x.rate_u);
  const std::array<double, 5> w5{0.3, 0.7, 0.2, 0.1, 5.0};
  CHECK(rel_close(utility(x, w5), 0.3 * 1.5e6 + 0.7 * 2.5e6 + 0.2 * 4e6 + 0.1 * 6e6 - 5.0 * 0.8));

  const GlobalAction a(1, {0.4, 0.6, 0.5, 0.3, 0.2});
  CHECK(user_reward(x, a, 0, {0, 0, 0, 0, 0, 0, 0}, 0.5, 1e6, 1e6) == 0.0);
  // Under threshold: the indicator weight has no effect.
  CHECK(user_reward(x, a, 0, {0, 0, 0, 0, 0, 0, 9}, 1.0, 1e6, 1e6) == 0.0);
  CHECK(user_reward(x, a, 0, {0, 0, 0, 0, 0, 0, 9}, 0.5, 1e6, 1e6) == -9.0);
  const std::array<double, 7> w7{2, 1, 0.5, 0.25, 3, 4, 1};
  const double expected = 2 * 1.5 + 1 * 2.5 - 0.5 * 0.5 - 0.25 * 0.3 - 3 * 0.16 - 4 * 0.36 - 1;
  CHECK(rel_close(user_reward(x, a, 0, w7, 0.5, 1e6, 1e6), expected));
}

TEST_CASE("reset is deterministic and well formed") {
  EnvConfig cfg;
  cfg.users = 2;
  HetNetEnv a(cfg), b(cfg);
  const auto ra = a.reset(42);
  const auto rb = b.reset(42);
  CHECK(ra.observation.size() == 28);
  CHECK(ra.observation == rb.observation);
  CHECK(a.reset(43).observation != ra.observation);

  cfg.users = 50;
  HetNetEnv big(cfg);
  big.reset(7);
  for (const auto& u : big.users()) {
    CHECK(u.distance >= 5.0);
    CHECK(u.distance <= 10.0);
    CHECK(u.path_loss > 0.0);
    CHECK(u.uplink_fading > 0.0);
    CHECK(u.type < cfg.type_count);
    CHECK(u.efficiency * u.capacitance * u.cpu_freq == doctest::Approx(1.0).epsilon(1e-15));
    for (double w : u.weights.reward) CHECK(w >= 0.0);
  }
}

TEST_CASE("mobility") {
  EnvConfig cfg;
  cfg.users = 4;
  cfg.mobility_std = 0.0;
  HetNetEnv still(cfg);
  still.reset(1);
  const auto before = still.users();
  for (int i = 0; i < 10; ++i) still.step_mobility();
  for (std::size_t m = 0; m < before.size(); ++m) {
    CHECK(still.users()[m].position == before[m].position);
    CHECK(still.users()[m].distance == before[m].distance);
  }

  // Empirical std of the raw increment, measured away from the walls.
  cfg.users = 1;
  cfg.mobility_std = 0.01;
  HetNetEnv env(cfg);
  env.reset(2);
  double sum = 0.0, sq = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    env.mutable_users()[0].position = 0.5;
    env.step_mobility();
    const double dx = env.users()[0].position - 0.5;
    REQUIRE(env.users()[0].position >= 0.0);
    REQUIRE(env.users()[0].position <= 1.0);
    sum += dx;
    sq += dx * dx;
  }
  const double mean = sum / n;
  const double sd = std::sqrt(sq / n - mean * mean);
  CHECK(std::abs(sd - 0.01) / 0.01 < 0.02);

  cfg.mobility_std = 5.0;
  HetNetEnv wild(cfg);
  wild.reset(3);
  for (int i = 0; i < 100; ++i) {
    wild.step_mobility();
    REQUIRE(wild.users()[0].position >= 0.0);
    REQUIRE(wild.users()[0].position <= 1.0);
    REQUIRE(wild.users()[0].distance >= cfg.distance_min);
    REQUIRE(wild.users()[0].distance <= cfg.distance_max);
  }
}

TEST_CASE("step contract") {
  EnvConfig cfg;
  cfg.users = 3;
  cfg.episode_length = 5;
  HetNetEnv env(cfg), twin(cfg);
  CHECK_THROWS_AS(env.step(std::vector<double>(15, 0.2)), StateError);
  env.reset(17);
  twin.reset(17);
  Rng rng(4);
  for (std::size_t t = 0; t < cfg.episode_length; ++t) {
    const auto raw = random_raw(rng, cfg.users, -0.2, 1.2);
    const GlobalAction action = project_action(raw, cfg.users);
    const auto expected = env.evaluate(action);
    const auto r = env.step(raw);
    const auto r2 = twin.step(raw);
    CHECK(r.observation.size() == cfg.users * kUserFeatures);
    CHECK(r.observation == r2.observation);
    CHECK(r.reward == r2.reward);
    CHECK(r.done == (t + 1 == cfg.episode_length));
    double total = 0.0;
    for (std::size_t m = 0; m < cfg.users; ++m) {
      const std::string k = std::to_string(m);
      CHECK(r.info.at("rate_u_" + k) == expected[m].rate_u);
      CHECK(r.info.at("rate_d_" + k) == expected[m].rate_d);
      CHECK(r.info.at("latency_" + k) == expected[m].latency);
      CHECK(env.users()[m].latency == expected[m].latency);
      total += r.per_user_rewards[m];
    }
    CHECK(rel_close(r.reward, total / cfg.users, 1e-12));
  }
  CHECK(env.terminal());
  CHECK_THROWS_AS(env.step(std::vector<double>(15, 0.2)), StateError);
  CHECK_NOTHROW(env.reset(1));
}

TEST_CASE("config loading") {
  std::istringstream good("[env]\nusers = 4\nmobility_std = 0.02\nepisode_length = 30\n");
  const EnvConfig c = load_env_config(good);
  CHECK(c.users == 4);
  CHECK(c.mobility_std == 0.02);
  CHECK(c.episode_length == 30);

  std::istringstream flat("users = 2\nrician_k = 0\n");
  CHECK(load_env_config(flat).users == 2);

  std::istringstream unknown("[env]\nuserz = 4\n");
  CHECK_THROWS_AS(load_env_config(unknown), ConfigError);
  std::istringstream bad("[env]\nusers = four\n");
  CHECK_THROWS_WITH_AS(load_env_config(bad), doctest::Contains("env.users"), ConfigError);
  std::istringstream zero("[env]\nusers = 0\n");
  CHECK_THROWS_AS(load_env_config(zero), ConfigError);
  std::istringstream dmin("[env]\ndistance_min = 0\n");
  CHECK_THROWS_AS(load_env_config(dmin), ConfigError);
}
