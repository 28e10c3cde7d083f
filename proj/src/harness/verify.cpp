#include "reacritic/harness/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "reacritic/autodiff/mac_counter.hpp"
#include "reacritic/autodiff/ops.hpp"
#include "reacritic/critic/mlp.hpp"
#include "reacritic/critic/reacritic.hpp"
#include "reacritic/drl/updates.hpp"
#include "reacritic/env/hetnet.hpp"
#include "reacritic/env/point_mass.hpp"
#include "reacritic/errors.hpp"
#include "reacritic/rng.hpp"
#include "reacritic/verify/finite_difference.hpp"

namespace reacritic::harness {

using ad::Tape;
using ad::Tensor;

namespace {

constexpr double kGradTolerance = 1e-4;
constexpr double kNormTolerance = 1e-9;
constexpr double kLayerNormVarTolerance = 1e-5;
constexpr double kClosedFormTolerance = 1e-9;
constexpr double kFeasibilityTolerance = 1e-12;

// Toy environment shapes: the grad suite checks the critic the toy runs train.
constexpr std::size_t kToyStateDim = 6;
constexpr std::size_t kToyActionDim = 2;

CheckResult check(std::string suite, std::string name, double measured, double tolerance) {
  return {std::move(suite), std::move(name), measured, tolerance, measured <= tolerance};
}

Tensor random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(rows * cols);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return Tensor::from({rows, cols}, std::move(v));
}

double rel_diff(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

// Max relative FD error of every parameter of `critic` on sum_i w_i Q_i.
void critic_gradients(const std::string& prefix, critic::Critic& critic, std::size_t batch, std::uint64_t seed,
                      std::vector<CheckResult>& out) {
  Rng rng(seed);
  const Tensor s = random_matrix(rng, batch, critic.state_dim());
  const Tensor a = random_matrix(rng, batch, critic.action_dim());
  std::vector<double> w(batch);
  for (auto& x : w) x = rng.uniform(0.5, 1.5);
  const Tensor wt = Tensor::from({batch}, w);
  auto value = [&] {
    Tape tape;
    const Tensor q = critic.forward(tape, s, a, false, nullptr);
    double total = 0.0;
    for (std::size_t i = 0; i < batch; ++i) total += w[i] * q.at(i);
    return total;
  };
  critic.params().clear_grad();
  {
    Tape tape;
    tape.backward(ad::sum(tape, ad::hadamard(tape, critic.forward(tape, s, a, false, nullptr), wt)));
  }
  for (const auto& entry : critic.params().entries()) {
    const auto r = verify::check_gradient(entry.tensor, value);
    out.push_back(check("grad", prefix + "." + entry.name, r.max_rel_error, kGradTolerance));
  }
}

}  // namespace

std::vector<CheckResult> grad_suite() {
  std::vector<CheckResult> out;

  critic::CriticConfig c;
  c.state_dim = kToyStateDim;
  c.action_dim = kToyActionDim;
  c.hidden_dim = 16;
  c.horizontal = 4;
  c.vertical = 2;
  c.heads = 2;
  critic::ReaCritic rea(c, 3);
  critic_gradients("reacritic", rea, 3, 8, out);

  critic::MlpConfig mc;
  mc.state_dim = kToyStateDim;
  mc.action_dim = kToyActionDim;
  mc.hidden = {16, 16};
  critic::MlpCritic mlp(mc, 4);
  critic_gradients("mlp", mlp, 3, 9, out);

  // SAC actor objective through a frozen twin ReaCritic.
  drl::ActorConfig ac;
  ac.state_dim = kToyStateDim;
  ac.action_dim = kToyActionDim;
  ac.hidden = {8, 8};
  drl::Agent agent = drl::make_agent(std::make_unique<critic::ReaCritic>(c, 5), std::make_unique<critic::ReaCritic>(c, 6),
                                     std::make_unique<drl::Actor>(ac, drl::Algo::kSac, 7), 0.2);
  agent.critic1->params().set_requires_grad(false);
  agent.critic2->params().set_requires_grad(false);
  Rng rng(10);
  const Tensor states = random_matrix(rng, 3, kToyStateDim);
  auto loss = [&] {
    Tape tape;
    Rng noise(77);
    return drl::actor_loss(tape, states, agent, 0.2, &noise, nullptr).item();
  };
  agent.actor->params().clear_grad();
  {
    Tape tape;
    Rng noise(77);
    tape.backward(drl::actor_loss(tape, states, agent, 0.2, &noise, nullptr));
  }
  for (const auto& entry : agent.actor->params().entries()) {
    const auto r = verify::check_gradient(entry.tensor, loss);
    out.push_back(check("grad", "actor." + entry.name, r.max_rel_error, kGradTolerance));
  }
  return out;
}

std::vector<CheckResult> norm_suite() {
  std::vector<CheckResult> out;
  critic::CriticConfig c;
  c.state_dim = kToyStateDim;
  c.action_dim = kToyActionDim;
  c.hidden_dim = 16;
  c.horizontal = 4;
  c.vertical = 2;
  c.heads = 2;
  critic::ReaCritic critic(c, 11);
  Rng rng(12);

  // 1000 random (s, a) inputs in batches of 10.
  double mhsa = 0.0, pooling = 0.0;
  const std::size_t H = c.horizontal;
  for (int pass = 0; pass < 100; ++pass) {
    Tape tape;
    critic::ReaCriticTrace trace;
    critic.forward(tape, random_matrix(rng, 10, c.state_dim, -3.0, 3.0), random_matrix(rng, 10, c.action_dim, 0.0, 1.0),
                   false, nullptr, &trace);
    for (const auto& w : trace.attention_weights) {
      for (std::size_t row = 0; row < w.size() / H; ++row) {
        double s = 0.0;
        for (std::size_t j = 0; j < H; ++j) s += w.at(row * H + j);
        mhsa = std::max(mhsa, std::abs(s - 1.0));
      }
    }
    const Tensor& agg = trace.aggregation_weights;
    for (std::size_t b = 0; b < agg.size() / H; ++b) {
      double s = 0.0;
      for (std::size_t i = 0; i < H; ++i) s += agg.at(b * H + i);
      pooling = std::max(pooling, std::abs(s - 1.0));
    }
  }
  out.push_back(check("norm", "mhsa_rows_sum_to_one", mhsa, kNormTolerance));
  out.push_back(check("norm", "pooling_weights_sum_to_one", pooling, kNormTolerance));

  // Layer norm with unit gain and zero bias. The output variance is
  // var / (var + eps), so inputs are drawn with variance well above one.
  const std::size_t d = 16;
  double worst_mean = 0.0, worst_var = 0.0;
  Tape tape;
  const Tensor y = ad::layer_norm(tape, random_matrix(rng, 1000, d, -10.0, 10.0), Tensor::full({d}, 1.0),
                                  Tensor::zeros({d}));
  for (std::size_t r = 0; r < 1000; ++r) {
    double mu = 0.0, var = 0.0;
    for (std::size_t j = 0; j < d; ++j) mu += y.at(r * d + j) / static_cast<double>(d);
    for (std::size_t j = 0; j < d; ++j) var += (y.at(r * d + j) - mu) * (y.at(r * d + j) - mu) / static_cast<double>(d);
    worst_mean = std::max(worst_mean, std::abs(mu));
    worst_var = std::max(worst_var, std::abs(var - 1.0));
  }
  out.push_back(check("norm", "layer_norm_row_mean", worst_mean, kNormTolerance));
  out.push_back(check("norm", "layer_norm_row_variance", worst_var, kLayerNormVarTolerance));
  return out;
}

std::vector<CheckResult> env_suite() {
  using namespace env;
  std::vector<CheckResult> out;
  auto closed = [&](const std::string& name, double got, double want) {
    out.push_back(check("env", name, rel_diff(got, want), kClosedFormTolerance));
  };

  UserState u;
  u.uplink_power = u.downlink_power = 1.0;
  u.uplink_fading = u.downlink_fading = 1.0;
  u.path_loss = 0.01;
  const std::vector<UserState> one{u};
  const GlobalAction full(1, std::vector<double>(kActionsPerUser, 1.0));
  closed("sinr_uplink_single_user", sinr_uplink(0, full, one, 0.001), 10.0);
  closed("sinr_downlink_single_user", sinr_downlink(0, full, one, 0.001), 10.0);
  std::vector<double> silent(kActionsPerUser, 1.0);
  silent[static_cast<std::size_t>(Resource::kUplinkPower)] = 0.0;
  out.push_back(check("env", "sinr_zero_power", std::abs(sinr_uplink(0, GlobalAction(1, silent), one, 0.001)), 0.0));
  closed("rate_sinr1_full_band", shannon_rate(1.0, 1e6, 1.0), 1e6);
  closed("rate_sinr3_half_band", shannon_rate(0.5, 2e6, 3.0), 2e6);
  closed("energy_efficiency", energy_efficiency(1e6, 0.5, 2.0), 1e6);
  out.push_back(check("env", "energy_efficiency_zero_power", std::abs(energy_efficiency(1e6, 0.0, 2.0)), 0.0));
  closed("latency", service_latency(1e6, 1e6, 1.0, 1e9, 1.0, 10.0), 1.001);
  closed("latency_zero_compute_is_cap", service_latency(1e6, 1e6, 0.0, 1e9, 1.0, 10.0), 10.0);

  // Raising another user's power share never raises a user's SINR.
  Rng rng(5);
  std::size_t violations = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t users = 2 + rng.index(4);
    std::vector<UserState> states(users);
    for (auto& s : states) {
      s.uplink_power = s.downlink_power = rng.uniform(0.1, 1.0);
      s.uplink_fading = s.downlink_fading = rng.uniform(0.1, 3.0);
      s.path_loss = rng.uniform(1e-3, 1e-2);
    }
    std::vector<double> raw(users * kActionsPerUser);
    for (auto& x : raw) x = rng.uniform();
    const GlobalAction base = project_action(raw, users);
    const std::size_t m = rng.index(users);
    std::size_t j = rng.index(users - 1);
    if (j >= m) ++j;
    std::vector<double> up = base.values(), down = base.values();
    double& pu = up[j * kActionsPerUser + static_cast<std::size_t>(Resource::kUplinkPower)];
    double& pd = down[j * kActionsPerUser + static_cast<std::size_t>(Resource::kDownlinkPower)];
    pu = std::min(1.0, pu + rng.uniform(0.0, 0.5));
    pd = pd + rng.uniform(0.0, 0.5);
    if (sinr_uplink(m, GlobalAction(users, up), states, 1e-6) > sinr_uplink(m, base, states, 1e-6)) ++violations;
    if (sinr_downlink(m, GlobalAction(users, down), states, 1e-6) > sinr_downlink(m, base, states, 1e-6)) ++violations;
  }
  out.push_back(check("env", "interference_monotonicity_violations", static_cast<double>(violations), 0.0));

  // Projection feasibility over 1e5 raw actions, well outside the box.
  double overshoot = 0.0;
  std::size_t out_of_box = 0;
  for (int trial = 0; trial < 100000; ++trial) {
    const std::size_t users = 5;
    std::vector<double> raw(users * kActionsPerUser);
    for (auto& x : raw) x = rng.uniform(-1.0, 2.0);
    const GlobalAction g = project_action(raw, users);
    for (double x : g.values()) out_of_box += (x >= 0.0 && x <= 1.0) ? 0 : 1;
    for (Resource r : {Resource::kDownlinkPower, Resource::kUplinkBandwidth, Resource::kDownlinkBandwidth,
                       Resource::kCompute}) {
      overshoot = std::max(overshoot, g.column_sum(r) - 1.0);
    }
  }
  out.push_back(check("env", "projection_column_sum_excess", overshoot, kFeasibilityTolerance));
  out.push_back(check("env", "projection_entries_outside_unit_box", static_cast<double>(out_of_box), 0.0));

  // Same seed and action sequence, same trajectory.
  auto trajectory = [](Environment& e) {
    std::vector<double> trace;
    Rng actions(99);
    StepResult r = e.reset(42);
    trace.insert(trace.end(), r.observation.begin(), r.observation.end());
    while (!r.done) {
      std::vector<double> a(e.action_dim());
      for (auto& x : a) x = actions.uniform();
      r = e.step(a);
      trace.insert(trace.end(), r.observation.begin(), r.observation.end());
      trace.push_back(r.reward);
    }
    return trace;
  };
  EnvConfig hc;
  hc.users = 5;
  hc.episode_length = 50;
  HetNetEnv h1(hc), h2(hc);
  const auto t1 = trajectory(h1), t2 = trajectory(h2);
  std::size_t diff = t1.size() == t2.size() ? 0 : 1;
  for (std::size_t i = 0; diff == 0 && i < t1.size(); ++i) diff += t1[i] != t2[i];
  out.push_back(check("env", "hetnet_trajectory_determinism_mismatches", static_cast<double>(diff), 0.0));
  PointMassEnv p1, p2;
  const auto q1 = trajectory(p1), q2 = trajectory(p2);
  diff = q1.size() == q2.size() ? 0 : 1;
  for (std::size_t i = 0; diff == 0 && i < q1.size(); ++i) diff += q1[i] != q2[i];
  out.push_back(check("env", "pointmass_trajectory_determinism_mismatches", static_cast<double>(diff), 0.0));
  return out;
}

std::vector<CheckResult> flops_suite() {
  using ad::MacCategory;
  using ad::MacCounter;
  std::vector<CheckResult> out;
  Rng rng(15);
  for (int trial = 0; trial < 12; ++trial) {
    critic::CriticConfig c;
    c.state_dim = 1 + rng.index(10);
    c.action_dim = 1 + rng.index(5);
    c.heads = 1 + rng.index(4);
    c.hidden_dim = c.heads * (1 + rng.index(6));
    c.horizontal = 1 + rng.index(8);
    c.vertical = 1 + rng.index(4);
    c.ffn_dim = rng.index(3) == 0 ? 0 : 1 + rng.index(40);
    const std::size_t B = 1 + rng.index(6);
    critic::ReaCritic critic(c, static_cast<std::uint64_t>(trial));
    MacCounter::reset();
    Tape tape;
    critic.forward(tape, random_matrix(rng, B, c.state_dim), random_matrix(rng, B, c.action_dim), false, nullptr);
    const critic::FlopCount f = critic::flop_count(c, B);
    // Sum of absolute per-category differences; an exact audit needs 0.
    auto gap = [](std::uint64_t a, std::uint64_t b) { return static_cast<double>(a > b ? a - b : b - a); };
    const double mismatch = gap(MacCounter::get(MacCategory::kEmbedding), f.embedding) +
                            gap(MacCounter::get(MacCategory::kAttentionProjection), f.attention_projection) +
                            gap(MacCounter::get(MacCategory::kAttentionScores), f.attention_scores) +
                            gap(MacCounter::get(MacCategory::kFeedForward), f.feed_forward) +
                            gap(MacCounter::get(MacCategory::kAggregation), f.aggregation) +
                            gap(MacCounter::get(MacCategory::kHead), f.head) +
                            static_cast<double>(MacCounter::get(MacCategory::kOther));
    char name[128];
    std::snprintf(name, sizeof name, "tally_B%zu_H%zu_V%zu_d%zu_heads%zu", B, c.horizontal, c.vertical, c.hidden_dim,
                  c.heads);
    out.push_back(check("flops", name, mismatch, 0.0));
  }

  critic::CriticConfig c;
  c.state_dim = 5;
  c.action_dim = 3;
  c.hidden_dim = 16;
  c.horizontal = 4;
  c.vertical = 2;
  c.heads = 2;
  const critic::FlopCount base = critic::flop_count(c, 3);
  auto ratio_error = [](std::uint64_t num, std::uint64_t den, double want) {
    return std::abs(static_cast<double>(num) / static_cast<double>(den) - want);
  };
  critic::CriticConfig v2 = c;
  v2.vertical *= 2;
  const critic::FlopCount fv = critic::flop_count(v2, 3);
  const std::uint64_t block_base = base.attention() + base.feed_forward;
  out.push_back(check("flops", "blocks_linear_in_V", ratio_error(fv.attention() + fv.feed_forward, block_base, 2.0), 0.0));
  out.push_back(check("flops", "total_linear_in_B", ratio_error(critic::flop_count(c, 6).total(), base.total(), 2.0), 0.0));
  critic::CriticConfig h2 = c;
  h2.horizontal *= 2;
  const critic::FlopCount fh = critic::flop_count(h2, 3);
  out.push_back(check("flops", "scores_quadratic_in_H", ratio_error(fh.attention_scores, base.attention_scores, 4.0), 0.0));
  out.push_back(check("flops", "projection_linear_in_H",
                      ratio_error(fh.attention_projection, base.attention_projection, 2.0), 0.0));
  return out;
}

std::vector<CheckResult> run_suite(const std::string& suite) {
  if (suite == "grad") return grad_suite();
  if (suite == "norm") return norm_suite();
  if (suite == "env") return env_suite();
  if (suite == "flops") return flops_suite();
  if (suite == "all") {
    std::vector<CheckResult> out;
    for (auto* fn : {&grad_suite, &norm_suite, &env_suite, &flops_suite}) {
      auto part = fn();
      out.insert(out.end(), part.begin(), part.end());
    }
    return out;
  }
  throw ConfigError("unknown verification suite '" + suite + "' (expected grad, norm, env, flops or all)");
}

void print_checks(std::ostream& out, const std::vector<CheckResult>& checks) {
  char line[256];
  for (const auto& c : checks) {
    std::snprintf(line, sizeof line, "%s  %-6s %-48s measured %.3e  tolerance %.1e\n", c.passed ? "PASS" : "FAIL",
                  c.suite.c_str(), c.name.c_str(), c.measured, c.tolerance);
    out << line;
  }
}

bool all_passed(const std::vector<CheckResult>& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

}  // namespace reacritic::harness
