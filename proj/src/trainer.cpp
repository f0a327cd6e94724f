#include "realism/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "json.hpp"
#include "realism/csv.hpp"
#include "realism/parallel.hpp"

namespace realism {

using nlohmann::json;

// --- replay buffer ---

ReplayBuffer::ReplayBuffer(size_t capacity) : capacity_(capacity) {
  if (capacity_ < 1) throw std::invalid_argument("ReplayBuffer: capacity must be >= 1");
}

void ReplayBuffer::push(Transition t) {
  if (data_.size() < capacity_) {
    data_.push_back(std::move(t));
  } else {
    data_[next_] = std::move(t);  // overwrite the oldest entry
  }
  next_ = (next_ + 1) % capacity_;
}

const Transition& ReplayBuffer::at(size_t k) const {
  if (k >= data_.size()) throw std::out_of_range("ReplayBuffer::at");
  if (data_.size() < capacity_) return data_[k];
  return data_[(next_ + k) % capacity_];
}

std::vector<size_t> ReplayBuffer::sample_indices(int count, Rng& rng) const {
  if (count < 1 || static_cast<size_t>(count) > data_.size())
    throw std::invalid_argument("ReplayBuffer: cannot sample that many transitions");
  std::vector<size_t> pool(data_.size());
  std::iota(pool.begin(), pool.end(), 0);
  std::vector<size_t> out(count);
  for (int k = 0; k < count; ++k) {
    const size_t pick = k + rng.below(pool.size() - k);
    std::swap(pool[k], pool[pick]);
    out[k] = pool[k];
  }
  return out;
}

// --- reports ---

double RolloutResult::mean_c_sat() const {
  if (c_sat.empty()) return 0.0;
  return std::accumulate(c_sat.begin(), c_sat.end(), 0.0) / c_sat.size();
}

double RolloutResult::mean_c_equ() const {
  if (c_equ.empty()) return 0.0;
  return std::accumulate(c_equ.begin(), c_equ.end(), 0.0) / c_equ.size();
}

double RolloutResult::mean_fairness() const {
  if (e_t.empty()) return 0.0;
  return std::accumulate(e_t.begin(), e_t.end(), 0.0) / e_t.size();
}

bool convergence_check(std::span<const IterationReport> reports, int window, double tol) {
  if (window < 1 || static_cast<int>(reports.size()) < window + 1) return false;
  auto rolling = [&](auto getter, size_t end) {
    double sum = 0.0;
    for (size_t k = end - window; k < end; ++k) sum += getter(reports[k]);
    return sum / window;
  };
  auto stable = [&](auto getter) {
    const double now = rolling(getter, reports.size());
    const double prev = rolling(getter, reports.size() - 1);
    return std::fabs(now - prev) / std::max(std::fabs(prev), 1e-9) < tol;
  };
  return stable([](const IterationReport& r) { return r.mean_net_revenue; }) &&
         stable([](const IterationReport& r) { return r.c_sat; }) &&
         stable([](const IterationReport& r) { return r.c_equ; });
}

// --- trainer ---

Trainer::Trainer(const Experiment& exp, Variant variant)
    : exp_(&exp), variant_(variant), seed_(exp.run.seed) {
  spec_.num_regions = exp.sim.num_regions;
  spec_.horizon = exp.sim.horizon;
  reward_scale_ = exp.run.train.reward_scale;
  Rng agents_rng(mix64(seed_, 1));
  agents_ = make_agents(exp.sim.num_operators, spec_, exp.run.train.hidden, agents_rng);
  Rng delta_rng(mix64(seed_, 2));
  const std::vector<int>& reg_hidden = exp.run.train.regulator_hidden.empty()
                                           ? exp.run.train.hidden
                                           : exp.run.train.regulator_hidden;
  delta_ = ScoreModel::create(exp.sim.num_operators, reg_hidden,
                              exp.run.train.score_cap, delta_rng);
}

Trainer::RegulatorRuntime Trainer::runtime_for(Variant v, const Mlp* params) const {
  RegulatorRuntime reg;
  reg.model = &delta_;
  reg.params = params ? params : &delta_.net;
  switch (v) {
    case Variant::Full:
    case Variant::NoFasa:
      reg.enabled = true;
      break;
    case Variant::Dfd:
      reg.enabled = true;
      reg.equity = EquityMetric::SatisfactionSpread;
      reg.dfd_fair = true;
      break;
    case Variant::NoRegulation:
    case Variant::Sdsm:
    case Variant::Sotp:
      reg.enabled = false;
      break;
  }
  return reg;
}

std::vector<double> Trainer::score_step(const StepOutcome& out, const RegulatorRuntime& reg,
                                        RolloutResult& run) const {
  const int M = exp_->sim.num_operators;
  const int N = exp_->sim.num_regions;

  // per-slot demand rates against the interval-mean supply, so ratio-based
  // metrics keep the hourly scale regardless of the rebalancing cadence
  const double slots = std::max(out.num_slots, 1);
  std::vector<double> demand_rate_mi(out.interval_demand_mi);
  std::vector<double> satisfied_rate_mi(out.interval_satisfied_mi);
  for (double& v : demand_rate_mi) v /= slots;
  for (double& v : satisfied_rate_mi) v /= slots;

  std::vector<double> demand(N, 0.0), satisfied(N, 0.0), supply(N, 0.0);
  for (int m = 0; m < M; ++m) {
    for (int i = 0; i < N; ++i) {
      const size_t c = static_cast<size_t>(m) * N + i;
      demand[i] += demand_rate_mi[c];
      satisfied[i] += satisfied_rate_mi[c];
      supply[i] += out.interval_mean_supply_mi[c];
    }
  }
  const double c_sat = satisfaction_rate(satisfied, demand);
  const double c_equ = reg.equity == EquityMetric::DemandSupplyRatio
                           ? usage_equity(demand, supply)
                           : dfd_equity(satisfied, demand);
  const GoalDistance g = goal_distance(c_sat, c_equ, exp_->sim.goals);
  const ShapleyAttribution phi =
      shapley_attribution(demand_rate_mi, out.interval_mean_supply_mi, M, N, reg.equity);

  std::vector<double> scores(M, 0.0);
  if (reg.enabled)
    scores = reg.model->assign_with(*reg.params, g, phi, out.net_revenue);
  const double e_t = reg.dfd_fair ? dfd_fairness(scores)
                                  : score_fairness(scores, out.net_revenue).e_t;

  RegulatorRecord rec;
  rec.slot = out.start_slot;
  rec.g_sat = g.g_sat;
  rec.g_equ = g.g_equ;
  rec.phi_sat = phi.phi_sat;
  rec.phi_equ = phi.phi_equ;
  rec.scores = scores;
  rec.z_net = out.net_revenue;
  rec.fairness = e_t;
  run.records.push_back(std::move(rec));
  run.c_sat.push_back(c_sat);
  run.c_equ.push_back(c_equ);
  run.e_t.push_back(e_t);
  return scores;
}

RolloutResult Trainer::run_rl_episode(Env& env, const std::vector<OperatorAgents>& agents,
                                      const RegulatorRuntime& reg, double sigma,
                                      Rng* noise_rng, bool collect) const {
  const int M = exp_->sim.num_operators;
  const int N = exp_->sim.num_regions;
  const int h = exp_->sim.horizon;
  RolloutResult run;
  run.net_revenue.assign(M, 0.0);

  auto observe_all = [&]() {
    std::vector<JointObservation> obs(M);
    for (int m = 0; m < M; ++m)
      obs[m] = build_joint_observation(
          env.state().dist, m,
          exp_->predictor.predict(m, env.dataset_slot(env.state().t), h),
          exp_->sim.fleet_sizes[m]);
    return obs;
  };

  std::vector<JointObservation> obs = observe_all();
  const std::vector<double> zeros(M, 0.0);
  while (!env.done()) {
    std::vector<RebalanceAction> actions(M, RebalanceAction(N));
    std::vector<std::vector<double>> continuous(M);
    for (int m = 0; m < M; ++m) {
      continuous[m].reserve(static_cast<size_t>(N) * spec_.action_dim());
      for (int i = 0; i < N; ++i) {
        std::vector<double> logits =
            mlp_forward(agents[m].regions[i].actor, obs[m].agent_view(i));
        if (sigma > 0.0 && noise_rng)
          for (double& v : logits) v += noise_rng->gaussian(0.0, sigma);
        const std::vector<int> moves =
            decode_action(logits, env.state().dist.at(m, i), i);
        for (int j = 0; j < N; ++j) actions[m].at(i, j) = moves[j];
        continuous[m].insert(continuous[m].end(), logits.begin(), logits.end());
      }
    }

    StepOutcome out = env.step(actions, zeros);
    const std::vector<double> scores = score_step(out, reg, run);
    for (int m = 0; m < M; ++m) {
      out.score[m] = scores[m];
      out.reward[m] = out.net_revenue[m] - scores[m];
      run.net_revenue[m] += out.net_revenue[m];
    }

    std::vector<JointObservation> next_obs = observe_all();
    if (collect) {
      Transition t;
      t.obs = obs;
      t.actions = continuous;
      t.next_obs = next_obs;
      t.reward = out.reward;
      t.trip_revenue = out.trip_revenue;
      t.reb_cost = out.reb_cost;
      const RegulatorRecord& rec = run.records.back();
      t.goal = {rec.g_sat, rec.g_equ};
      t.phi = {rec.phi_sat, rec.phi_equ};
      t.z_net = out.net_revenue;
      t.terminal = out.terminal;
      run.transitions.push_back(std::move(t));
    }
    run.outcomes.push_back(std::move(out));
    obs = std::move(next_obs);
  }
  return run;
}

RolloutResult Trainer::run_baseline_episode(Env& env, Variant which,
                                            const RegulatorRuntime& reg) const {
  const int M = exp_->sim.num_operators;
  RolloutResult run;
  run.net_revenue.assign(M, 0.0);
  const std::vector<double> zeros(M, 0.0);
  while (!env.done()) {
    std::vector<RebalanceAction> actions;
    if (which == Variant::Sdsm) {
      actions = sdsm_policy(env.state().dist, exp_->demand_shares);
    } else {
      if (exp_->run.priority_regions.empty())
        throw ConfigError("sim.priority_regions", "required for the sotp variant");
      actions = sotp_policy(env.state().dist, exp_->run.priority_regions,
                            exp_->run.sotp_fraction);
    }
    StepOutcome out = env.step(actions, zeros);
    score_step(out, reg, run);
    for (int m = 0; m < M; ++m) run.net_revenue[m] += out.net_revenue[m];
    run.outcomes.push_back(std::move(out));
  }
  return run;
}

double Trainer::update_round(
    const ReplayBuffer& buffer, std::vector<OperatorAgents>& agents,
    std::uint64_t round_key,
    const std::function<double(const Transition&, int)>& reward_of) const {
  const int M = exp_->sim.num_operators;
  const int N = exp_->sim.num_regions;
  const TrainConfig& tc = exp_->run.train;
  const int X = tc.minibatch;

  // Target networks stay frozen for the whole round so per-agent updates
  // are order-independent; soft updates happen at the end.
  std::vector<double> losses(static_cast<size_t>(M) * N, 0.0);
  parallel_for(M * N, [&](int agent_idx) {
    const int m = agent_idx / N;
    const int i = agent_idx % N;
    AgentNets& nets = agents[m].regions[i];
    Rng rng(mix64(seed_, 0x7a5cULL, round_key, static_cast<std::uint64_t>(m),
                  static_cast<std::uint64_t>(i)));
    const std::vector<size_t> idx = buffer.sample_indices(X, rng);

    CriticBatch critic_batch;
    critic_batch.inputs.reserve(X);
    critic_batch.targets.reserve(X);
    std::vector<ActorSample> actor_batch;
    actor_batch.reserve(X);

    std::vector<double> next_joint(spec_.joint_action_dim());
    for (const size_t sample : idx) {
      const Transition& t = buffer.at(sample);
      // smoothed target action from every region's target actor
      for (int r = 0; r < N; ++r) {
        std::vector<double> a = mlp_forward(agents[m].regions[r].actor_target,
                                            t.next_obs[m].agent_view(r));
        for (size_t k = 0; k < a.size(); ++k)
          a[k] += clip_noise(rng.gaussian(0.0, tc.sigma), tc.noise_clip);
        std::copy(a.begin(), a.end(),
                  next_joint.begin() + static_cast<size_t>(r) * spec_.action_dim());
      }
      const double q_next =
          mlp_forward(nets.critic_target, critic_input(t.next_obs[m], next_joint))[0];
      const double y =
          td3_target(reward_of(t, m) * reward_scale_, tc.gamma, q_next, t.terminal);
      critic_batch.inputs.push_back(critic_input(t.obs[m], t.actions[m]));
      critic_batch.targets.push_back(y);

      ActorSample as;
      as.agent_obs = t.obs[m].agent_view(i);
      as.state_part = t.obs[m].local;
      as.state_part.insert(as.state_part.end(), t.obs[m].global.begin(),
                           t.obs[m].global.end());
      as.joint_action = t.actions[m];
      actor_batch.push_back(std::move(as));
    }

    losses[agent_idx] = update_critic(nets.critic, critic_batch, tc.lr_critic);
    update_actor(nets.actor, nets.critic, i, actor_batch, spec_, tc.lr_actor);
  });

  for (int m = 0; m < M; ++m) {
    for (int i = 0; i < N; ++i) {
      AgentNets& nets = agents[m].regions[i];
      soft_update(nets.actor_target, nets.actor, tc.tau);
      soft_update(nets.critic_target, nets.critic, tc.tau);
    }
  }
  return std::accumulate(losses.begin(), losses.end(), 0.0) / losses.size();
}

double Trainer::update_regulator(Env& env, const SimState& episode_start,
                                 const std::vector<OperatorAgents>& pre_update_agents,
                                 const ReplayBuffer& buffer, int iteration, Rng& spsa_rng) {
  const TrainConfig& tc = exp_->run.train;
  const bool can_update = buffer.size() >= static_cast<size_t>(tc.minibatch);

  auto evaluator = [&](const Mlp& params) {
    // Redo this iteration's agent updates with rewards rescored under the
    // perturbed model, then replay the episode with the resulting policies.
    std::vector<OperatorAgents> virtual_agents = pre_update_agents;
    auto reward_of = [&](const Transition& t, int m) {
      const std::vector<double> scores =
          delta_.assign_with(params, t.goal, t.phi, t.z_net);
      return t.trip_revenue[m] - t.reb_cost[m] - scores[m];
    };
    if (can_update) {
      for (int r = 0; r < tc.updates_per_iteration; ++r)
        update_round(buffer, virtual_agents,
                     static_cast<std::uint64_t>(iteration) * tc.updates_per_iteration + r,
                     reward_of);
    }
    env.restore(episode_start);
    const RegulatorRuntime reg = runtime_for(variant_, &params);
    const RolloutResult replay =
        run_rl_episode(env, virtual_agents, reg, 0.0, nullptr, false);

    std::vector<double> g_sat(replay.records.size()), g_equ(replay.records.size());
    for (size_t k = 0; k < replay.records.size(); ++k) {
      g_sat[k] = std::max(replay.records[k].g_sat, 0.0);
      g_equ[k] = std::max(replay.records[k].g_equ, 0.0);
    }
    return regulation_loss(g_sat, g_equ, replay.e_t, tc.beta);
  };

  const double a_k = tc.spsa_a0 / std::pow(iteration + 1.0, 0.602);
  const double c_k = tc.spsa_c0 / std::pow(iteration + 1.0, 0.101);
  const SpsaResult result = spsa_update(delta_.net, evaluator, a_k, c_k, spsa_rng);
  return 0.5 * (result.loss_plus + result.loss_minus);
}

std::vector<IterationReport> Trainer::train() {
  if (!variant_trainable(variant_))
    throw std::invalid_argument("Trainer: variant '" + variant_name(variant_) +
                                "' has no trainable parameters");
  const TrainConfig& tc = exp_->run.train;
  Env env(exp_->sim, exp_->train_data);
  ReplayBuffer buffer(tc.buffer_capacity);
  Rng noise_rng(mix64(seed_, 3));
  Rng spsa_rng(mix64(seed_, 4));

  std::vector<IterationReport> reports;
  std::vector<OperatorAgents> best_agents;
  Mlp best_delta = delta_.net;
  bool best_meets = false;
  double best_net = -std::numeric_limits<double>::infinity();

  for (int iter = 0; iter < tc.n_iter; ++iter) {
    const auto t0 = std::chrono::steady_clock::now();
    env.reset(mix64(seed_, 5, static_cast<std::uint64_t>(iter)));
    const SimState episode_start = env.snapshot();

    // Task 1: collect trajectories under the current policies and scores.
    const RegulatorRuntime reg = runtime_for(variant_, &delta_.net);
    RolloutResult rollout =
        run_rl_episode(env, agents_, reg, tc.sigma, &noise_rng, true);
    for (Transition& t : rollout.transitions) buffer.push(std::move(t));

    // Task 2: update every region agent of every operator.
    IterationReport report;
    report.iteration = iter;
    const std::vector<OperatorAgents> pre_update =
        reg.enabled ? agents_ : std::vector<OperatorAgents>{};
    if (buffer.size() >= static_cast<size_t>(tc.minibatch)) {
      double loss_sum = 0.0;
      auto stored_reward = [](const Transition& t, int m) { return t.reward[m]; };
      for (int r = 0; r < tc.updates_per_iteration; ++r)
        loss_sum += update_round(
            buffer, agents_,
            static_cast<std::uint64_t>(iter) * tc.updates_per_iteration + r,
            stored_reward);
      report.critic_loss = loss_sum / tc.updates_per_iteration;
    } else {
      report.updates_skipped = true;
      std::fprintf(stderr, "iteration %d: buffer (%zu) smaller than minibatch (%d),"
                           " agent updates skipped\n", iter, buffer.size(), tc.minibatch);
    }

    // Task 3: update the score model against the same-initial-state replay.
    if (reg.enabled)
      report.delta_loss =
          update_regulator(env, episode_start, pre_update, buffer, iter, spsa_rng);

    report.net_revenue = rollout.net_revenue;
    report.mean_net_revenue =
        std::accumulate(rollout.net_revenue.begin(), rollout.net_revenue.end(), 0.0) /
        rollout.net_revenue.size();
    report.c_sat = rollout.mean_c_sat();
    report.c_equ = rollout.mean_c_equ();
    report.fairness = rollout.mean_fairness();
    if (!std::isfinite(report.mean_net_revenue) || !std::isfinite(report.critic_loss) ||
        !std::isfinite(report.delta_loss))
      throw std::runtime_error("Trainer: non-finite losses at iteration " +
                               std::to_string(iter));
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    reports.push_back(report);

    // composite checkpoint criterion: city goals met first, then revenue
    const bool meets = report.c_sat > exp_->sim.goals.q_sat &&
                       report.c_equ > exp_->sim.goals.q_equ;
    if (best_agents.empty() || (meets && !best_meets) ||
        (meets == best_meets && report.mean_net_revenue > best_net)) {
      best_agents = agents_;
      best_delta = delta_.net;
      best_meets = meets;
      best_net = report.mean_net_revenue;
      best_iteration_ = iter;
    }

    std::fprintf(stderr,
                 "iter %3d  net %10.2f  c_sat %.4f  c_equ %8.4f  E %8.5f  "
                 "critic %.5f  delta %.5f  (%.2fs)\n",
                 iter, report.mean_net_revenue, report.c_sat, report.c_equ,
                 report.fairness, report.critic_loss, report.delta_loss,
                 report.wall_seconds);

    if (convergence_check(reports, tc.convergence_window, tc.convergence_tol)) {
      std::fprintf(stderr, "converged after %d iterations\n", iter + 1);
      break;
    }
  }

  if (!best_agents.empty()) {
    agents_ = std::move(best_agents);
    delta_.net = std::move(best_delta);
  }
  return reports;
}

EvalSummary Trainer::evaluate(Variant variant) const {
  Env env(exp_->sim, exp_->eval_data, exp_->eval_first_day, exp_->eval_num_days);
  env.reset(mix64(seed_, 6));

  const RegulatorRuntime reg = runtime_for(variant, &delta_.net);
  RolloutResult run;
  if (variant == Variant::Sdsm || variant == Variant::Sotp)
    run = run_baseline_episode(env, variant, reg);
  else
    run = run_rl_episode(env, agents_, reg, 0.0, nullptr, false);

  const int M = exp_->sim.num_operators;
  EvalSummary s;
  s.variant = variant_name(variant);
  s.net_revenue = run.net_revenue;
  s.satisfaction_pct = 100.0 * run.mean_c_sat();
  s.equity = run.mean_c_equ();
  s.fairness = run.mean_fairness();

  std::vector<double> score_sum(M, 0.0), net_sum(M, 0.0);
  for (const auto& rec : run.records) {
    for (int m = 0; m < M; ++m) {
      score_sum[m] += rec.scores[m];
      net_sum[m] += rec.z_net[m];
    }
  }
  std::vector<double> ratio(M);
  double mean_ratio = 0.0;
  for (int m = 0; m < M; ++m) {
    ratio[m] = score_sum[m] / std::max(net_sum[m], 1.0);
    mean_ratio += ratio[m];
  }
  mean_ratio /= M;
  double var = 0.0;
  for (int m = 0; m < M; ++m) var += (ratio[m] - mean_ratio) * (ratio[m] - mean_ratio);
  s.score_ratio_std = std::sqrt(var / M);

  const int steps_per_day = exp_->sim.slots_per_day / exp_->sim.rebalance_every;
  const int days = static_cast<int>(run.c_sat.size()) / steps_per_day;
  s.daily_net.assign(days, std::vector<double>(M, 0.0));
  for (int d = 0; d < days; ++d) {
    double sat = 0.0, equ = 0.0;
    for (int k = 0; k < steps_per_day; ++k) {
      sat += run.c_sat[d * steps_per_day + k];
      equ += run.c_equ[d * steps_per_day + k];
      const StepOutcome& out = run.outcomes[d * steps_per_day + k];
      for (int m = 0; m < M; ++m) s.daily_net[d][m] += out.net_revenue[m];
    }
    s.daily_c_sat.push_back(sat / steps_per_day);
    s.daily_c_equ.push_back(equ / steps_per_day);
  }
  s.detail = std::move(run);
  return s;
}

// --- checkpoints ---

namespace {

json mlp_to_json(const Mlp& net) {
  json j;
  j["sizes"] = net.sizes;
  j["weights"] = net.weights;
  j["biases"] = net.biases;
  return j;
}

Mlp mlp_from_json(const json& j) {
  Mlp net;
  net.sizes = j.at("sizes").get<std::vector<int>>();
  net.weights = j.at("weights").get<std::vector<std::vector<double>>>();
  net.biases = j.at("biases").get<std::vector<std::vector<double>>>();
  if (net.weights.size() != net.sizes.size() - 1 ||
      net.biases.size() != net.sizes.size() - 1)
    throw std::runtime_error("checkpoint: inconsistent network shape");
  for (size_t l = 0; l + 1 < net.sizes.size(); ++l) {
    if (net.weights[l].size() !=
            static_cast<size_t>(net.sizes[l]) * net.sizes[l + 1] ||
        net.biases[l].size() != static_cast<size_t>(net.sizes[l + 1]))
      throw std::runtime_error("checkpoint: inconsistent layer shape");
  }
  return net;
}

char hex_digit(unsigned v) { return v < 10 ? char('0' + v) : char('a' + v - 10); }

std::string hash_to_hex(std::uint64_t h) {
  std::string s(16, '0');
  for (int k = 15; k >= 0; --k) {
    s[k] = hex_digit(h & 0xf);
    h >>= 4;
  }
  return s;
}

std::uint64_t hex_to_hash(const std::string& s) {
  return std::stoull(s, nullptr, 16);
}

}  // namespace

Checkpoint Trainer::checkpoint() const {
  Checkpoint ckpt;
  ckpt.config_hash = exp_->run.hash();
  ckpt.variant = variant_name(variant_);
  ckpt.best_iteration = best_iteration_;
  ckpt.operators = exp_->train_data.operators;
  ckpt.agents = agents_;
  ckpt.delta = delta_.net;
  ckpt.score_cap = delta_.cap_fraction;
  return ckpt;
}

void Trainer::restore(const Checkpoint& ckpt) {
  if (ckpt.config_hash != exp_->run.hash())
    throw std::runtime_error("checkpoint does not match this configuration");
  if (ckpt.agents.size() != agents_.size())
    throw std::runtime_error("checkpoint: operator count mismatch");
  agents_ = ckpt.agents;
  delta_.net = ckpt.delta;
  delta_.cap_fraction = ckpt.score_cap;
  best_iteration_ = ckpt.best_iteration;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  json j;
  j["version"] = ckpt.version;
  j["config_hash"] = hash_to_hex(ckpt.config_hash);
  j["variant"] = ckpt.variant;
  j["best_iteration"] = ckpt.best_iteration;
  j["operators"] = ckpt.operators;
  j["score_cap"] = ckpt.score_cap;
  j["delta"] = mlp_to_json(ckpt.delta);
  json agents = json::array();
  for (const auto& op : ckpt.agents) {
    json regions = json::array();
    for (const auto& nets : op.regions) {
      json a;
      a["actor"] = mlp_to_json(nets.actor);
      a["critic"] = mlp_to_json(nets.critic);
      a["actor_target"] = mlp_to_json(nets.actor_target);
      a["critic_target"] = mlp_to_json(nets.critic_target);
      regions.push_back(std::move(a));
    }
    agents.push_back(std::move(regions));
  }
  j["agents"] = std::move(agents);

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out << j.dump() << "\n";
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("malformed checkpoint: ") + e.what());
  }
  Checkpoint ckpt;
  ckpt.version = j.at("version").get<int>();
  if (ckpt.version != 1) throw std::runtime_error("unsupported checkpoint version");
  ckpt.config_hash = hex_to_hash(j.at("config_hash").get<std::string>());
  ckpt.variant = j.at("variant").get<std::string>();
  ckpt.best_iteration = j.at("best_iteration").get<int>();
  ckpt.operators = j.at("operators").get<std::vector<std::string>>();
  ckpt.score_cap = j.at("score_cap").get<double>();
  ckpt.delta = mlp_from_json(j.at("delta"));
  for (const auto& op : j.at("agents")) {
    OperatorAgents agents;
    for (const auto& a : op) {
      AgentNets nets;
      nets.actor = mlp_from_json(a.at("actor"));
      nets.critic = mlp_from_json(a.at("critic"));
      nets.actor_target = mlp_from_json(a.at("actor_target"));
      nets.critic_target = mlp_from_json(a.at("critic_target"));
      agents.regions.push_back(std::move(nets));
    }
    ckpt.agents.push_back(std::move(agents));
  }
  return ckpt;
}

// --- report writers ---

void write_iterations_csv(const std::string& path, std::uint64_t config_hash,
                          const std::vector<IterationReport>& reports,
                          const std::vector<std::string>& operators) {
  std::vector<std::string> header{"iteration"};
  for (const auto& op : operators) header.push_back("net_revenue_" + op);
  header.insert(header.end(),
                {"mean_net_revenue", "c_sat", "c_equ", "fairness", "critic_loss",
                 "delta_loss"});
  CsvWriter csv(path, config_hash, header);
  for (const auto& r : reports) {
    std::vector<std::string> row{std::to_string(r.iteration)};
    for (double v : r.net_revenue) row.push_back(fmt_double(v));
    row.push_back(fmt_double(r.mean_net_revenue));
    row.push_back(fmt_double(r.c_sat));
    row.push_back(fmt_double(r.c_equ));
    row.push_back(fmt_double(r.fairness));
    row.push_back(fmt_double(r.critic_loss));
    row.push_back(fmt_double(r.delta_loss));
    csv.row(row);
  }
}

void write_metrics_csv(const std::string& path, std::uint64_t config_hash,
                       const std::vector<EvalSummary>& rows,
                       const std::vector<std::string>& operators) {
  std::vector<std::string> header{"variant"};
  for (const auto& op : operators) header.push_back("net_revenue_" + op);
  header.push_back("satisfaction_rate_pct");
  header.push_back("usage_equity");
  CsvWriter csv(path, config_hash, header);
  for (const auto& s : rows) {
    std::vector<std::string> row{s.variant};
    for (double v : s.net_revenue) row.push_back(fmt_double(v));
    row.push_back(fmt_double(s.satisfaction_pct));
    row.push_back(fmt_double(s.equity));
    csv.row(row);
  }
}

void write_daily_csv(const std::string& path, std::uint64_t config_hash,
                     const EvalSummary& summary,
                     const std::vector<std::string>& operators) {
  std::vector<std::string> header{"day", "c_sat", "c_equ"};
  for (const auto& op : operators) header.push_back("net_revenue_" + op);
  CsvWriter csv(path, config_hash, header);
  for (size_t d = 0; d < summary.daily_c_sat.size(); ++d) {
    std::vector<std::string> row{std::to_string(d), fmt_double(summary.daily_c_sat[d]),
                                 fmt_double(summary.daily_c_equ[d])};
    for (double v : summary.daily_net[d]) row.push_back(fmt_double(v));
    csv.row(row);
  }
}

}  // namespace realism
