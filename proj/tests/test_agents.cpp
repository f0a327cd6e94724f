#include "doctest.h"
#include "realism/agents.hpp"
#include "test_util.hpp"

#include <cmath>
#include <numeric>

using namespace realism;

TEST_SUITE_BEGIN("agents");

TEST_CASE("observation layout and scaling") {
  const int N = 2, h = 1;
  VehicleDistribution dist(1, N);
  dist.at(0, 0) = 10;
  dist.at(0, 1) = 30;
  std::vector<std::vector<double>> pred(h, std::vector<double>(N * N, 0.0));
  pred[0][0 * N + 1] = 8.0;  // region 0 -> 1

  const ObservationSpec spec{N, h};
  CHECK(spec.agent_dim() == 1 + N * h + N + h);  // 6 for N=2, h=1

  const std::vector<double> obs = build_observation(dist, 0, pred, 0, 40.0);
  REQUIRE(static_cast<int>(obs.size()) == spec.agent_dim());
  CHECK(obs[0] == doctest::Approx(0.25));        // own vehicles / fleet
  CHECK(obs[1] == doctest::Approx(0.0));         // outgoing to region 0
  CHECK(obs[2] == doctest::Approx(0.2));         // outgoing to region 1
  CHECK(obs[3] == doctest::Approx(0.25));        // global distribution
  CHECK(obs[4] == doctest::Approx(0.75));
  CHECK(obs[5] == doctest::Approx(0.2));         // city total per slot

  // all-zero city gives the zero vector
  VehicleDistribution empty(1, N);
  std::vector<std::vector<double>> zero_pred(h, std::vector<double>(N * N, 0.0));
  for (double v : build_observation(empty, 0, zero_pred, 0, 40.0))
    CHECK(v == doctest::Approx(0.0));

  // deterministic packing
  CHECK(build_observation(dist, 0, pred, 0, 40.0) == obs);
}

TEST_CASE("decode apportions movable vehicles by largest remainder") {
  // destination probabilities 0.5 / 0.3 / 0.2 and a silent keep logit
  std::vector<double> logits{std::log(0.5), std::log(0.3), std::log(0.2), -40.0};
  CHECK(decode_action(logits, 10, -1) == std::vector<int>{5, 3, 2});

  // uniform destinations with a remainder: tie breaks to the lowest id
  std::vector<double> uniform{0.0, 0.0, 0.0, -40.0};
  CHECK(decode_action(uniform, 10, -1) == std::vector<int>{4, 3, 3});
}

TEST_CASE("decode keeps everything on a dominant keep logit") {
  const std::vector<double> keep_all{0.0, 0.0, 0.0, 40.0};
  CHECK(decode_action(keep_all, 17, -1) == std::vector<int>{0, 0, 0});
}

TEST_CASE("decode of tied logits is keep-all") {
  // an untrained zero-weight actor emits equal logits; nothing should move
  const std::vector<double> tied(5, 0.0);
  CHECK(decode_action(tied, 12, 2) == std::vector<int>{0, 0, 0, 0});
  const std::vector<double> shifted(5, 3.7);
  CHECK(decode_action(shifted, 12, 2) == std::vector<int>{0, 0, 0, 0});
}

TEST_CASE("decode masks the own region and shift invariance holds") {
  Rng rng(19);
  for (int trial = 0; trial < 500; ++trial) {
    const int N = 2 + static_cast<int>(rng.below(5));
    std::vector<double> logits(N + 1);
    for (double& v : logits) v = rng.uniform(-3.0, 3.0);
    const int supply = static_cast<int>(rng.below(40));
    const int own = static_cast<int>(rng.below(N));

    const std::vector<int> moves = decode_action(logits, supply, own);
    CHECK(moves[own] == 0);
    CHECK(std::accumulate(moves.begin(), moves.end(), 0) <= supply);
    for (int v : moves) CHECK(v >= 0);

    std::vector<double> shifted = logits;
    for (double& v : shifted) v += 2.5;
    CHECK(decode_action(shifted, supply, own) == moves);
  }
}

TEST_CASE("td3 target arithmetic") {
  CHECK(td3_target(1.0, 0.99, 2.0, false) == doctest::Approx(2.98));
  CHECK(td3_target(1.0, 0.99, 2.0, true) == doctest::Approx(1.0));
  CHECK(clip_noise(0.35, 0.2) == doctest::Approx(0.2));
  CHECK(clip_noise(-0.35, 0.2) == doctest::Approx(-0.2));
  CHECK(clip_noise(0.05, 0.2) == doctest::Approx(0.05));
  CHECK_THROWS_AS(td3_target(1.0, 1.0, 2.0, false), std::invalid_argument);
}

TEST_CASE("critic update fits a fixed batch") {
  Rng rng(55);
  Mlp critic = Mlp::create({6, 32, 32, 1}, rng);

  CriticBatch batch;
  for (int k = 0; k < 32; ++k) {
    std::vector<double> x(6);
    for (double& v : x) v = rng.uniform(-3.0, 3.0);
    batch.targets.push_back(3.0 * (0.5 * x[0] - x[3]));
    batch.inputs.push_back(std::move(x));
  }

  const double initial = update_critic(critic, batch, 1e-3);
  double last = initial;
  for (int step = 0; step < 199; ++step) last = update_critic(critic, batch, 1e-3);
  CHECK(last < 0.5 * initial);

  // zero learning rate leaves the parameters alone
  const Mlp before = critic;
  update_critic(critic, batch, 0.0);
  CHECK(critic == before);

  CHECK_THROWS_AS(update_critic(critic, CriticBatch{}, 1e-3), std::invalid_argument);
}

TEST_CASE("critic already matching its targets stays put") {
  Mlp critic = Mlp::zeros({4, 8, 1});
  CriticBatch batch;
  batch.inputs.push_back({0.1, 0.2, 0.3, 0.4});
  batch.targets.push_back(0.0);  // zero net already outputs 0
  const double loss = update_critic(critic, batch, 1e-3);
  CHECK(loss == doctest::Approx(0.0));
  CHECK(critic == Mlp::zeros({4, 8, 1}));
}

TEST_CASE("actor update climbs the critic") {
  // single region, horizon 1: agent obs dim 4, action dim 2, critic dim 8
  const ObservationSpec spec{1, 1};
  Rng rng(66);
  Mlp actor = Mlp::create({spec.agent_dim(), 16, spec.action_dim()}, rng);
  Mlp critic = Mlp::create({spec.critic_dim(), 32, 32, 1}, rng);

  // teach the critic a concave target peaking at action[0] = 2
  const std::vector<double> obs_state{0.3, 0.1, 0.2, 0.4};
  CriticBatch fit;
  for (int k = 0; k < 64; ++k) {
    const double a0 = -6.0 + 14.0 * k / 63.0;
    std::vector<double> x = obs_state;
    x.push_back(a0);
    x.push_back(0.0);
    fit.inputs.push_back(x);
    fit.targets.push_back(-(a0 - 2.0) * (a0 - 2.0) / 8.0);
  }
  for (int step = 0; step < 5000; ++step) update_critic(critic, fit, 1e-2);

  ActorSample sample;
  sample.agent_obs = obs_state;
  sample.state_part = obs_state;
  sample.joint_action = {0.0, 0.0};
  const std::vector<ActorSample> batch{sample};

  const double before = mlp_forward(actor, sample.agent_obs)[0];
  for (int step = 0; step < 300; ++step)
    update_actor(actor, critic, 0, batch, spec, 1e-3);
  const double after = mlp_forward(actor, sample.agent_obs)[0];
  // the critic's maximizer sits at 2; the actor output must move toward it
  CHECK(after > before);
  CHECK(std::fabs(after - 2.0) < std::fabs(before - 2.0));

  // a critic that ignores the action yields a zero gradient
  Mlp flat_critic = Mlp::zeros({spec.critic_dim(), 8, 1});
  Mlp frozen = actor;
  update_actor(actor, flat_critic, 0, batch, spec, 1e-2);
  CHECK(actor == frozen);
}

TEST_CASE("actor update is deterministic") {
  const ObservationSpec spec{2, 1};
  Rng rng(67);
  Mlp actor = Mlp::create({spec.agent_dim(), 8, spec.action_dim()}, rng);
  Mlp critic = Mlp::create({spec.critic_dim(), 8, 1}, rng);
  ActorSample sample;
  sample.agent_obs.assign(spec.agent_dim(), 0.2);
  sample.state_part.assign(spec.critic_dim() - spec.joint_action_dim(), 0.2);
  sample.joint_action.assign(spec.joint_action_dim(), 0.1);

  Mlp a1 = actor, a2 = actor;
  update_actor(a1, critic, 1, {sample}, spec, 1e-3);
  update_actor(a2, critic, 1, {sample}, spec, 1e-3);
  CHECK(a1 == a2);
}

TEST_CASE("sdsm moves surplus to deficit in id order") {
  VehicleDistribution dist(1, 3);
  dist.at(0, 0) = 10;
  const std::vector<std::vector<double>> shares{{0.5, 0.3, 0.2}};
  const auto actions = sdsm_policy(dist, shares);
  CHECK(actions[0].at(0, 1) == 3);
  CHECK(actions[0].at(0, 2) == 2);
  CHECK(actions[0].outgoing(0) == 5);

  // applying the moves reaches the target; a second pass is idle
  VehicleDistribution moved(1, 3);
  moved.at(0, 0) = 5;
  moved.at(0, 1) = 3;
  moved.at(0, 2) = 2;
  CHECK(sdsm_policy(moved, shares)[0].is_zero());
}

TEST_CASE("sotp relocates a fleet fraction into priority regions") {
  VehicleDistribution dist(1, 4);
  dist.at(0, 0) = 6;
  dist.at(0, 1) = 4;
  const std::vector<int> priority{2, 3};
  const auto actions = sotp_policy(dist, priority, 0.5);
  // five vehicles head to the priority set, split (3, 2), largest source first
  int to_p2 = actions[0].at(0, 2) + actions[0].at(1, 2);
  int to_p3 = actions[0].at(0, 3) + actions[0].at(1, 3);
  CHECK(to_p2 == 3);
  CHECK(to_p3 == 2);
  CHECK(actions[0].at(0, 2) + actions[0].at(0, 3) +
            actions[0].at(1, 2) + actions[0].at(1, 3) ==
        5);

  // already covered: nothing to do
  VehicleDistribution inside(1, 4);
  inside.at(0, 2) = 5;
  inside.at(0, 3) = 5;
  CHECK(sotp_policy(inside, priority, 0.5)[0].is_zero());

  CHECK(sotp_policy(dist, priority, 0.0)[0].is_zero());
  CHECK_THROWS_AS(sotp_policy(dist, {}, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(sotp_policy(dist, priority, 1.5), std::invalid_argument);
}

TEST_SUITE_END();
