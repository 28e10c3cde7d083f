#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <memory>
#include <vector>

#include "reacritic/autodiff/ops.hpp"
#include "reacritic/critic/mlp.hpp"
#include "reacritic/drl/trainer.hpp"
#include "reacritic/drl/updates.hpp"
#include "reacritic/env/point_mass.hpp"
#include "reacritic/errors.hpp"
#include "reacritic/verify/finite_difference.hpp"

using namespace reacritic;
using namespace reacritic::drl;
using ad::Tape;
using ad::Tensor;

namespace {

// Q(s, a) = s . ws + a . wa, simple enough to evaluate by hand.
class LinearCritic final : public critic::Critic {
 public:
  LinearCritic(std::vector<double> ws, std::vector<double> wa) : ds_(ws.size()), da_(wa.size()) {
    ws_ = params_.add("ws", Tensor::from({ds_}, std::move(ws)));
    wa_ = params_.add("wa", Tensor::from({da_}, std::move(wa)));
  }
  std::string kind() const override { return "linear"; }
  std::size_t state_dim() const override { return ds_; }
  std::size_t action_dim() const override { return da_; }
  Tensor forward(Tape& tape, const Tensor& s, const Tensor& a, bool, Rng*) const override {
    return ad::add(tape, ad::sum_last(tape, ad::hadamard(tape, s, ws_)), ad::sum_last(tape, ad::hadamard(tape, a, wa_)));
  }
  std::unique_ptr<critic::Critic> clone() const override {
    auto c = std::make_unique<LinearCritic>(std::vector<double>(ds_), std::vector<double>(da_));
    c->params_.copy_values_from(params_);
    return c;
  }
  double eval(std::span<const double> s, std::span<const double> a) const {
    double q = 0.0;
    for (std::size_t i = 0; i < ds_; ++i) q += s[i] * ws_.data()[i];
    for (std::size_t i = 0; i < da_; ++i) q += a[i] * wa_.data()[i];
    return q;
  }

 private:
  std::size_t ds_, da_;
  Tensor ws_, wa_;
};

std::vector<double> random_vec(Rng& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

Transition random_transition(Rng& rng, std::size_t ds, std::size_t da, bool done = false) {
  return {random_vec(rng, ds), random_vec(rng, da, 0.0, 1.0), rng.uniform(-1.0, 1.0), random_vec(rng, ds), done};
}

Batch random_batch(Rng& rng, std::size_t B, std::size_t ds, std::size_t da) {
  std::vector<Transition> rows;
  for (std::size_t i = 0; i < B; ++i) rows.push_back(random_transition(rng, ds, da, i % 3 == 0));
  return make_batch(rows);
}

std::unique_ptr<Actor> small_actor(std::size_t ds, std::size_t da, Algo algo, std::uint64_t seed = 3) {
  ActorConfig c;
  c.state_dim = ds;
  c.action_dim = da;
  c.hidden = {8, 8};
  return std::make_unique<Actor>(c, algo, seed);
}

std::unique_ptr<critic::Critic> linear_critic(Rng& rng, std::size_t ds, std::size_t da) {
  return std::make_unique<LinearCritic>(random_vec(rng, ds), random_vec(rng, da));
}

std::unique_ptr<critic::Critic> small_mlp(std::size_t ds, std::size_t da, std::uint64_t seed) {
  critic::MlpConfig c;
  c.state_dim = ds;
  c.action_dim = da;
  c.hidden = {8, 8};
  return std::make_unique<critic::MlpCritic>(c, seed);
}

std::vector<double> flat_values(const ad::ParameterSet& p) {
  std::vector<double> out;
  for (const auto& e : p.entries()) out.insert(out.end(), e.tensor.data().begin(), e.tensor.data().end());
  return out;
}

}  // namespace

TEST_CASE("replay buffer keeps the newest transitions in FIFO order") {
  ReplayBuffer buf(3, 1, 1, 7);
  for (int i = 0; i < 5; ++i) buf.push({{double(i)}, {0.5}, double(i), {double(i + 1)}, false});
  CHECK(buf.size() == 3);
  CHECK(buf.at(0).reward == 2.0);
  CHECK(buf.at(2).reward == 4.0);
  CHECK_THROWS_AS(buf.at(3), ContractError);
  CHECK_THROWS_AS(buf.push({{1.0, 2.0}, {0.5}, 0.0, {1.0}, false}), DimensionError);
  CHECK_THROWS_AS(buf.push({{1.0}, {0.5}, std::numeric_limits<double>::quiet_NaN(), {1.0}, false}), NumericError);
}

TEST_CASE("replay buffer sampling is seeded, uniform and refuses underfilled batches") {
  ReplayBuffer a(10, 1, 1, 11), b(10, 1, 1, 11);
  CHECK_THROWS_AS(a.sample(1), UnderflowError);
  for (int i = 0; i < 10; ++i) {
    a.push({{double(i)}, {0.0}, double(i), {0.0}, false});
    b.push({{double(i)}, {0.0}, double(i), {0.0}, false});
  }
  CHECK_THROWS_AS(a.sample(11), UnderflowError);
  const Batch x = a.sample(10), y = b.sample(10);
  CHECK(std::equal(x.reward.data().begin(), x.reward.data().end(), y.reward.data().begin()));

  const std::size_t draws = 100000;
  std::vector<std::size_t> counts(10, 0);
  for (std::size_t k = 0; k < draws / 10; ++k) {
    for (std::size_t i : a.sample_indices(10)) ++counts[i];
  }
  const double expected = draws / 10.0, sigma = std::sqrt(draws * 0.1 * 0.9);
  for (std::size_t c : counts) CHECK(std::abs(double(c) - expected) < 4.0 * sigma);
}

TEST_CASE("bellman target reduces to the reward when done or gamma is zero") {
  Rng rng(1);
  const std::size_t ds = 3, da = 2, B = 6;
  Agent agent = make_agent(linear_critic(rng, ds, da), nullptr, small_actor(ds, da, Algo::kSac), 0.2);
  std::vector<Transition> rows;
  for (std::size_t i = 0; i < B; ++i) rows.push_back(random_transition(rng, ds, da, true));
  const Batch done = make_batch(rows);
  Rng noise(5);
  const Tensor y = bellman_target(done, agent, {0.99, true}, &noise);
  for (std::size_t i = 0; i < B; ++i) CHECK(y.at(i) == doctest::Approx(done.reward.at(i)).epsilon(1e-15));

  const Batch live = random_batch(rng, B, ds, da);
  const Tensor y0 = bellman_target(live, agent, {1e-300, true}, &noise);
  for (std::size_t i = 0; i < B; ++i) CHECK(y0.at(i) == doctest::Approx(live.reward.at(i)).epsilon(1e-12));
}

TEST_CASE("bellman target matches a hand-composed evaluation of the target networks") {
  Rng rng(2);
  const std::size_t ds = 4, da = 2, B = 5;
  Agent agent = make_agent(linear_critic(rng, ds, da), linear_critic(rng, ds, da), small_actor(ds, da, Algo::kSac), 0.3);
  const Batch batch = random_batch(rng, B, ds, da);
  const double gamma = 0.9, alpha = agent.alpha();

  Rng noise_a(9), noise_b(9);
  const Tensor y = bellman_target(batch, agent, {gamma, true}, &noise_a);
  Tape tape;
  const auto next = agent.actor_target->sample(tape, batch.next_state, &noise_b);
  const auto& c1 = static_cast<const LinearCritic&>(*agent.critic1_target);
  const auto& c2 = static_cast<const LinearCritic&>(*agent.critic2_target);
  for (std::size_t i = 0; i < B; ++i) {
    const auto s2 = batch.next_state.data().subspan(i * ds, ds);
    const auto a2 = next.action.data().subspan(i * da, da);
    const double q = std::min(c1.eval(s2, a2), c2.eval(s2, a2));
    const double expect = batch.reward.at(i) + gamma * (1.0 - batch.done.at(i)) * (q - alpha * next.log_prob.at(i));
    CHECK(y.at(i) == doctest::Approx(expect).epsilon(1e-12));
  }

  // Without the entropy term the bootstrap is the plain min-Q.
  Rng noise_c(9);
  const Tensor y_plain = bellman_target(batch, agent, {gamma, false}, &noise_c);
  for (std::size_t i = 0; i < B; ++i) {
    const auto s2 = batch.next_state.data().subspan(i * ds, ds);
    const auto a2 = next.action.data().subspan(i * da, da);
    const double q = std::min(c1.eval(s2, a2), c2.eval(s2, a2));
    CHECK(y_plain.at(i) == doctest::Approx(batch.reward.at(i) + gamma * (1.0 - batch.done.at(i)) * q).epsilon(1e-12));
  }
}

TEST_CASE("max-Q target picks the best candidate per row") {
  LinearCritic target({1.0, 0.0}, {2.0});
  std::vector<Transition> rows{{{0, 0}, {0}, 1.0, {1.0, 5.0}, false}, {{0, 0}, {0}, -1.0, {0.5, 0.0}, true}};
  const Batch b = make_batch(rows);
  const Tensor y = max_q_target(b, target, {{0.0}, {0.25}, {1.0}}, 0.5);
  CHECK(y.at(0) == doctest::Approx(1.0 + 0.5 * (1.0 + 2.0)));
  CHECK(y.at(1) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(max_q_target(b, target, {}, 0.5), ContractError);
  CHECK_THROWS_AS(max_q_target(b, target, {{0.0, 1.0}}, 0.5), DimensionError);
}

TEST_CASE("critic update: zero loss at the fixed point, hand value for one transition") {
  Rng rng(4);
  const std::size_t ds = 3, da = 2;
  Agent agent = make_agent(linear_critic(rng, ds, da), nullptr, small_actor(ds, da, Algo::kSac), 0.2);
  ad::Adam opt(agent.critic1->params().tensors(), {1e-2});
  const Batch batch = random_batch(rng, 4, ds, da);

  const auto& c1 = static_cast<const LinearCritic&>(*agent.critic1);
  Tape probe;
  const Tensor q = c1.forward(probe, batch.state, batch.action, false, nullptr);
  const auto before = flat_values(agent.critic1->params());
  const CriticStep fixed = critic_update(batch, Tensor::from({4}, std::vector<double>(q.data().begin(), q.data().end())), agent, opt, nullptr);
  CHECK(fixed.loss == 0.0);
  for (const auto& t : agent.critic1->params().tensors()) {
    for (double g : t.grad()) CHECK(g == 0.0);
  }
  CHECK(flat_values(agent.critic1->params()) == before);

  std::vector<Transition> one{random_transition(rng, ds, da)};
  const Batch single = make_batch(one);
  const double q1 = c1.eval(one[0].state, one[0].action);
  const CriticStep s = critic_update(single, Tensor::from({1}, {q1 - 0.75}), agent, opt, nullptr);
  CHECK(s.loss == doctest::Approx(0.75 * 0.75).epsilon(1e-12));
  CHECK(s.q_mean == doctest::Approx(q1).epsilon(1e-12));

  for (int i = 0; i < 20; ++i) {
    const Batch b = random_batch(rng, 8, ds, da);
    CHECK(critic_update(b, Tensor::from({8}, random_vec(rng, 8)), agent, opt, nullptr).loss >= 0.0);
  }
}

TEST_CASE("critic update sums both losses in twin mode and raises DivergenceError on overflow") {
  Rng rng(6);
  const std::size_t ds = 2, da = 1;
  Agent agent = make_agent(linear_critic(rng, ds, da), linear_critic(rng, ds, da), small_actor(ds, da, Algo::kSac), 0.2);
  std::vector<Tensor> params = agent.critic1->params().tensors();
  for (auto& t : agent.critic2->params().tensors()) params.push_back(t);
  ad::Adam opt(params, {1e-3});
  std::vector<Transition> one{random_transition(rng, ds, da)};
  const Batch b = make_batch(one);
  const double q1 = static_cast<const LinearCritic&>(*agent.critic1).eval(one[0].state, one[0].action);
  const double q2 = static_cast<const LinearCritic&>(*agent.critic2).eval(one[0].state, one[0].action);
  const CriticStep s = critic_update(b, Tensor::from({1}, {0.5}), agent, opt, nullptr);
  CHECK(s.loss == doctest::Approx((q1 - 0.5) * (q1 - 0.5) + (q2 - 0.5) * (q2 - 0.5)).epsilon(1e-12));

  CHECK_THROWS_AS(critic_update(b, Tensor::from({1}, {1e300}), agent, opt, nullptr), DivergenceError);
}

TEST_CASE("actor gradient vanishes when Q does not depend on the action") {
  Rng rng(8);
  const std::size_t ds = 3, da = 2;
  for (Algo algo : {Algo::kSac, Algo::kDdpg}) {
    auto critic = std::make_unique<LinearCritic>(random_vec(rng, ds), std::vector<double>(da, 0.0));
    Agent agent = make_agent(std::move(critic), nullptr, small_actor(ds, da, algo), 0.0);
    ad::Adam opt(agent.actor->params().tensors(), {1e-3});
    actor_update(random_batch(rng, 6, ds, da), agent, opt, nullptr, nullptr);
    for (const auto& t : agent.actor->params().tensors()) {
      for (double g : t.grad()) CHECK(g == 0.0);
    }
    // Critics were frozen for the step and are trainable again afterwards.
    for (const auto& t : agent.critic1->params().tensors()) CHECK(t.requires_grad());
  }
}

TEST_CASE("SAC without entropy and without noise gives the DDPG objective") {
  Rng rng(10);
  const std::size_t ds = 4, da = 3;
  auto critic = linear_critic(rng, ds, da);
  auto critic_copy = critic->clone();
  Agent sac = make_agent(std::move(critic), nullptr, small_actor(ds, da, Algo::kSac, 21), 0.0);
  Agent ddpg = make_agent(std::move(critic_copy), nullptr, small_actor(ds, da, Algo::kDdpg, 21), 0.0);
  const Batch b = random_batch(rng, 7, ds, da);
  Tape t1, t2;
  const double l_sac = actor_loss(t1, b.state, sac, 0.0, nullptr, nullptr).item();
  const double l_ddpg = actor_loss(t2, b.state, ddpg, 0.0, nullptr, nullptr).item();
  CHECK(l_sac == doctest::Approx(l_ddpg).epsilon(1e-14));
}

TEST_CASE("SAC actor loss gradient matches finite differences") {
  const std::size_t ds = 3, da = 2;
  Agent agent = make_agent(small_mlp(ds, da, 1), small_mlp(ds, da, 2), small_actor(ds, da, Algo::kSac), 0.2);
  Rng rng(12);
  const Batch b = random_batch(rng, 4, ds, da);
  agent.critic1->params().set_requires_grad(false);
  agent.critic2->params().set_requires_grad(false);
  auto loss = [&] {
    Tape tape;
    Rng noise(77);
    return actor_loss(tape, b.state, agent, 0.2, &noise, nullptr).item();
  };
  agent.actor->params().clear_grad();
  {
    Tape tape;
    Rng noise(77);
    tape.backward(actor_loss(tape, b.state, agent, 0.2, &noise, nullptr));
  }
  for (const auto& e : agent.actor->params().entries()) {
    const auto check = verify::check_gradient(e.tensor, loss);
    INFO(e.name);
    CHECK(check.max_rel_error < 1e-4);
  }
}

TEST_CASE("temperature step moves alpha toward the entropy target") {
  Rng rng(13);
  Agent agent = make_agent(linear_critic(rng, 2, 2), nullptr, small_actor(2, 2, Algo::kSac), 0.2);
  ad::Adam opt({agent.log_alpha}, {1e-2});
  const double a0 = agent.alpha();
  alpha_update(agent, opt, 0.0, -2.0);  // entropy 0 above target -2: shrink alpha
  CHECK(agent.alpha() < a0);
  const double a1 = agent.alpha();
  alpha_update(agent, opt, 5.0, -2.0);  // entropy -5 below target: grow alpha
  CHECK(agent.alpha() > a1 - 1e-12);

  Agent no_temp = make_agent(linear_critic(rng, 2, 2), nullptr, small_actor(2, 2, Algo::kSac), 0.0);
  CHECK(no_temp.alpha() == 0.0);
  CHECK_THROWS_AS(alpha_update(no_temp, opt, 0.0, -2.0), ContractError);
}

TEST_CASE("polyak blending") {
  const std::size_t ds = 3, da = 2;
  auto online = small_mlp(ds, da, 1);
  auto target = small_mlp(ds, da, 2);
  const auto src = flat_values(online->params());
  const auto start = flat_values(target->params());

  polyak_update(target->params(), online->params(), 0.0);
  CHECK(flat_values(target->params()) == start);

  // Distance to the online values shrinks by (1 - tau) per step.
  const double tau = 0.1;
  for (int k = 1; k <= 5; ++k) {
    polyak_update(target->params(), online->params(), tau);
    const auto now = flat_values(target->params());
    for (std::size_t i = 0; i < now.size(); i += 17) {
      CHECK(now[i] - src[i] == doctest::Approx(std::pow(1.0 - tau, k) * (start[i] - src[i])).epsilon(1e-10));
    }
  }
  polyak_update(target->params(), online->params(), 1.0);
  CHECK(flat_values(target->params()) == src);

  auto other = small_mlp(ds + 1, da, 3);
  CHECK_THROWS_AS(polyak_update(target->params(), other->params(), 0.5), ContractError);
  CHECK_THROWS_AS(polyak_update(target->params(), online->params(), 1.5), ConfigError);
}

TEST_CASE("target networks are detached copies") {
  const std::size_t ds = 3, da = 2;
  Agent agent = make_agent(small_mlp(ds, da, 1), small_mlp(ds, da, 2), small_actor(ds, da, Algo::kSac), 0.2);
  CHECK(flat_values(agent.critic1_target->params()) == flat_values(agent.critic1->params()));
  for (const auto& t : agent.critic1_target->params().tensors()) CHECK_FALSE(t.requires_grad());
  for (const auto& t : agent.actor_target->params().tensors()) CHECK_FALSE(t.requires_grad());
  const auto before = flat_values(agent.critic1_target->params());
  std::vector<Tensor> params = agent.critic1->params().tensors();
  ad::Adam opt(params, {1e-2});
  Rng rng(3);
  const Batch b = random_batch(rng, 4, ds, da);
  critic_update(b, Tensor::from({4}, random_vec(rng, 4)), agent, opt, nullptr);
  CHECK(flat_values(agent.critic1_target->params()) == before);
  CHECK(flat_values(agent.critic1->params()) != before);
}

TEST_CASE("policy actions stay inside the unit box") {
  Rng rng(14);
  const std::size_t ds = 4, da = 3;
  for (Algo algo : {Algo::kSac, Algo::kDdpg}) {
    auto actor = small_actor(ds, da, algo);
    for (int i = 0; i < 2000; ++i) {
      std::vector<double> obs = random_vec(rng, ds, -50.0, 50.0);
      for (double a : actor->act(obs, true, rng, 0.5)) {
        CHECK(a >= 0.0);
        CHECK(a <= 1.0);
      }
    }
  }
}

namespace {

TrainerConfig tiny_trainer() {
  TrainerConfig t;
  t.episodes = 3;
  t.batch_size = 8;
  t.warmup_steps = 20;
  t.buffer_capacity = 1000;
  t.update_every = 2;
  t.gradient_steps = 3;
  t.actor_hidden = {8, 8};
  return t;
}

env::PointMassConfig short_episodes() {
  env::PointMassConfig c;
  c.max_steps = 15;
  c.goal_radius = 1e-9;  // never reached: every episode runs to the limit
  return c;
}

CriticFactory mlp_factory() {
  return [](std::uint64_t seed) { return small_mlp(6, 2, seed); };
}

}  // namespace

TEST_CASE("trainer performs no updates during warmup") {
  env::PointMassEnv env(short_episodes());
  TrainerConfig t = tiny_trainer();
  t.warmup_steps = 1000;
  const TrainingReport r = train(env, t, mlp_factory(), 1);
  CHECK(r.total_updates == 0);
  CHECK(r.total_steps == 45);
  for (const auto& e : r.episodes) {
    CHECK(e.updates == 0);
    CHECK(std::isnan(e.critic_loss_mean));
  }
}

TEST_CASE("trainer update cadence follows update_every and gradient_steps") {
  env::PointMassEnv env(short_episodes());
  const TrainerConfig t = tiny_trainer();
  const TrainingReport r = train(env, t, mlp_factory(), 2);
  std::size_t expected = 0;
  for (std::size_t step = 1; step <= r.total_steps; ++step) {
    if (step > t.warmup_steps && step >= t.batch_size && step % t.update_every == 0) expected += t.gradient_steps;
  }
  CHECK(r.total_updates == expected);
  CHECK(r.total_updates > 0);
}

TEST_CASE("trainer runs are reproducible from the seed") {
  for (Algo algo : {Algo::kSac, Algo::kDdpg}) {
    TrainerConfig t = tiny_trainer();
    t.algo = algo;
    env::PointMassEnv e1(short_episodes()), e2(short_episodes()), e3(short_episodes());
    const TrainingReport a = train(e1, t, mlp_factory(), 5);
    const TrainingReport b = train(e2, t, mlp_factory(), 5);
    const TrainingReport c = train(e3, t, mlp_factory(), 6);
    REQUIRE(a.episodes.size() == b.episodes.size());
    bool differs = false;
    for (std::size_t i = 0; i < a.episodes.size(); ++i) {
      CHECK(a.episodes[i].episode_return == b.episodes[i].episode_return);
      const double qa = a.episodes[i].q_mean, qb = b.episodes[i].q_mean;
      CHECK((qa == qb || (std::isnan(qa) && std::isnan(qb))));
      differs = differs || a.episodes[i].episode_return != c.episodes[i].episode_return;
    }
    CHECK(differs);
  }
}

TEST_CASE("trainer rejects invalid configuration and mismatched critics") {
  env::PointMassEnv env(short_episodes());
  TrainerConfig t = tiny_trainer();
  t.gamma = 1.0;
  CHECK_THROWS_AS(train(env, t, mlp_factory(), 1), ConfigError);
  t = tiny_trainer();
  CHECK_THROWS_AS(train(env, t, [](std::uint64_t s) { return small_mlp(7, 2, s); }, 1), ConfigError);
}
