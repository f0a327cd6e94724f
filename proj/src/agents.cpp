#include "realism/agents.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "realism/apportion.hpp"

namespace realism {

std::vector<double> JointObservation::agent_view(int region) const {
  std::vector<double> out;
  out.reserve(local_dim + global.size());
  const auto begin = local.begin() + static_cast<size_t>(region) * local_dim;
  out.insert(out.end(), begin, begin + local_dim);
  out.insert(out.end(), global.begin(), global.end());
  return out;
}

JointObservation build_joint_observation(const VehicleDistribution& dist, int op,
                                         const std::vector<std::vector<double>>& predicted,
                                         double fleet_size) {
  const int N = dist.num_regions;
  const int h = static_cast<int>(predicted.size());
  if (h < 1) throw std::invalid_argument("build_joint_observation: empty predictions");
  for (const auto& p : predicted)
    if (p.size() != static_cast<size_t>(N) * N)
      throw std::invalid_argument("build_joint_observation: prediction shape mismatch");
  const double scale = 1.0 / std::max(fleet_size, 1.0);

  JointObservation obs;
  obs.num_regions = N;
  obs.local_dim = 1 + N * h;
  obs.local.resize(static_cast<size_t>(N) * obs.local_dim);
  for (int i = 0; i < N; ++i) {
    double* row = obs.local.data() + static_cast<size_t>(i) * obs.local_dim;
    row[0] = dist.at(op, i) * scale;
    for (int k = 0; k < h; ++k)
      for (int j = 0; j < N; ++j)
        row[1 + k * N + j] = predicted[k][static_cast<size_t>(i) * N + j] * scale;
  }
  obs.global.resize(N + h);
  for (int i = 0; i < N; ++i) obs.global[i] = dist.at(op, i) * scale;
  for (int k = 0; k < h; ++k) {
    double total = 0.0;
    for (double v : predicted[k]) total += v;
    obs.global[N + k] = total * scale;
  }
  return obs;
}

std::vector<double> build_observation(const VehicleDistribution& dist, int op,
                                      const std::vector<std::vector<double>>& predicted,
                                      int region, double fleet_size) {
  return build_joint_observation(dist, op, predicted, fleet_size).agent_view(region);
}

std::vector<double> critic_input(const JointObservation& obs,
                                 std::span<const double> joint_action) {
  std::vector<double> out;
  out.reserve(obs.local.size() + obs.global.size() + joint_action.size());
  out.insert(out.end(), obs.local.begin(), obs.local.end());
  out.insert(out.end(), obs.global.begin(), obs.global.end());
  out.insert(out.end(), joint_action.begin(), joint_action.end());
  return out;
}

std::vector<int> decode_action(std::span<const double> logits, int supply, int region) {
  const int N = static_cast<int>(logits.size()) - 1;
  if (N < 1) throw std::invalid_argument("decode_action: need at least one destination");
  if (supply < 0) throw std::invalid_argument("decode_action: negative supply");

  const double peak = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(N + 1);
  double z = 0.0;
  for (int k = 0; k <= N; ++k) {
    p[k] = std::exp(logits[k] - peak);
    z += p[k];
  }
  for (double& v : p) v /= z;

  const double keep = std::min(1.0, p[N] * (N + 1));
  const int movable = static_cast<int>(std::lround(supply * (1.0 - keep)));
  std::vector<int> moves(N, 0);
  if (movable <= 0) return moves;

  std::vector<double> weights(p.begin(), p.begin() + N);
  if (region >= 0 && region < N) weights[region] = 0.0;
  double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (total <= 0.0) return moves;
  moves = largest_remainder(weights, movable);
  return moves;
}

double clip_noise(double draw, double clip) {
  if (!(clip > 0.0)) throw std::invalid_argument("clip_noise: clip must be positive");
  return std::clamp(draw, -clip, clip);
}

double td3_target(double reward, double gamma, double target_q_next, bool terminal) {
  if (!(gamma >= 0.0 && gamma < 1.0))
    throw std::invalid_argument("td3_target: gamma must lie in [0,1)");
  return terminal ? reward : reward + gamma * target_q_next;
}

std::vector<OperatorAgents> make_agents(int num_operators, const ObservationSpec& spec,
                                        std::span<const int> hidden, Rng& rng) {
  std::vector<int> actor_sizes{spec.agent_dim()};
  std::vector<int> critic_sizes{spec.critic_dim()};
  for (int hsize : hidden) {
    actor_sizes.push_back(hsize);
    critic_sizes.push_back(hsize);
  }
  actor_sizes.push_back(spec.action_dim());
  critic_sizes.push_back(1);

  std::vector<OperatorAgents> out(num_operators);
  for (int m = 0; m < num_operators; ++m) {
    out[m].regions.resize(spec.num_regions);
    for (int i = 0; i < spec.num_regions; ++i) {
      AgentNets& nets = out[m].regions[i];
      nets.actor = Mlp::create(actor_sizes, rng);
      nets.critic = Mlp::create(critic_sizes, rng);
      nets.actor_target = nets.actor;
      nets.critic_target = nets.critic;
    }
  }
  return out;
}

double update_critic(Mlp& critic, const CriticBatch& batch, double lr) {
  const size_t X = batch.inputs.size();
  if (X == 0 || batch.targets.size() != X)
    throw std::invalid_argument("update_critic: empty or inconsistent batch");
  MlpGrads total = MlpGrads::zeros_like(critic);
  double loss = 0.0;
  MlpActivations cache;
  for (size_t k = 0; k < X; ++k) {
    const std::vector<double> q = mlp_forward_cached(critic, batch.inputs[k], cache);
    const double err = q[0] - batch.targets[k];
    loss += err * err;
    // d/dq of (q - y)^2 / X
    const double dq[1] = {2.0 * err / static_cast<double>(X)};
    total.accumulate(mlp_backward(critic, batch.inputs[k], cache, dq));
  }
  sgd_step(critic, total, lr);
  return loss / static_cast<double>(X);
}

void update_actor(Mlp& actor, const Mlp& critic, int region,
                  const std::vector<ActorSample>& batch, const ObservationSpec& spec,
                  double lr) {
  const size_t X = batch.size();
  if (X == 0) throw std::invalid_argument("update_actor: empty batch");
  const int adim = spec.action_dim();
  const size_t slice = static_cast<size_t>(region) * adim;

  MlpGrads total = MlpGrads::zeros_like(actor);
  MlpActivations actor_cache, critic_cache;
  std::vector<double> joint(spec.joint_action_dim());
  std::vector<double> cin;
  for (const ActorSample& sample : batch) {
    const std::vector<double> action = mlp_forward_cached(actor, sample.agent_obs, actor_cache);
    joint = sample.joint_action;
    std::copy(action.begin(), action.end(), joint.begin() + slice);

    cin = sample.state_part;
    cin.insert(cin.end(), joint.begin(), joint.end());
    mlp_forward_cached(critic, cin, critic_cache);
    const double dq[1] = {1.0};
    const MlpGrads critic_grads = mlp_backward(critic, cin, critic_cache, dq);

    // ascend: actor loss is -Q, so flip the chain-rule sign
    std::vector<double> dout(adim);
    const size_t action_offset = sample.state_part.size() + slice;
    for (int k = 0; k < adim; ++k)
      dout[k] = -critic_grads.input[action_offset + k] / static_cast<double>(X);
    total.accumulate(mlp_backward(actor, sample.agent_obs, actor_cache, dout));
  }
  sgd_step(actor, total, lr);
}

std::vector<RebalanceAction> sdsm_policy(const VehicleDistribution& dist,
                                         const std::vector<std::vector<double>>& shares) {
  const int M = dist.num_operators;
  const int N = dist.num_regions;
  if (static_cast<int>(shares.size()) != M)
    throw std::invalid_argument("sdsm_policy: one share vector per operator required");

  std::vector<RebalanceAction> actions(M, RebalanceAction(N));
  for (int m = 0; m < M; ++m) {
    if (static_cast<int>(shares[m].size()) != N)
      throw std::invalid_argument("sdsm_policy: share vector length mismatch");
    const std::vector<int> target = largest_remainder(shares[m], dist.operator_total(m));
    std::vector<int> surplus(N), deficit(N);
    for (int i = 0; i < N; ++i) {
      surplus[i] = std::max(0, dist.at(m, i) - target[i]);
      deficit[i] = std::max(0, target[i] - dist.at(m, i));
    }
    int j = 0;
    for (int i = 0; i < N; ++i) {
      while (surplus[i] > 0 && j < N) {
        if (deficit[j] == 0) {
          ++j;
          continue;
        }
        const int moved = std::min(surplus[i], deficit[j]);
        actions[m].at(i, j) += moved;
        surplus[i] -= moved;
        deficit[j] -= moved;
      }
    }
  }
  return actions;
}

std::vector<RebalanceAction> sotp_policy(const VehicleDistribution& dist,
                                         const std::vector<int>& priority_regions,
                                         double fraction) {
  const int M = dist.num_operators;
  const int N = dist.num_regions;
  if (priority_regions.empty())
    throw std::invalid_argument("sotp_policy: priority set must be non-empty");
  if (!(fraction >= 0.0 && fraction <= 1.0))
    throw std::invalid_argument("sotp_policy: fraction must lie in [0,1]");
  std::vector<bool> priority(N, false);
  for (int p : priority_regions) {
    if (p < 0 || p >= N) throw std::invalid_argument("sotp_policy: bad priority region");
    priority[p] = true;
  }
  // even split assigns remainders to the lowest priority ids
  std::vector<int> prio;
  for (int i = 0; i < N; ++i)
    if (priority[i]) prio.push_back(i);

  std::vector<RebalanceAction> actions(M, RebalanceAction(N));
  const int P = static_cast<int>(prio.size());
  const std::vector<double> even(P, 1.0);
  for (int m = 0; m < M; ++m) {
    const int quota = static_cast<int>(std::lround(fraction * dist.operator_total(m)));
    const std::vector<int> target = largest_remainder(even, quota);

    // non-priority sources, most stocked first, ties to the lowest id
    std::vector<int> sources;
    for (int i = 0; i < N; ++i)
      if (!priority[i]) sources.push_back(i);
    std::stable_sort(sources.begin(), sources.end(),
                     [&](int a, int b) { return dist.at(m, a) > dist.at(m, b); });

    std::vector<int> available(N);
    for (int i = 0; i < N; ++i) available[i] = dist.at(m, i);

    size_t src = 0;
    for (int k = 0; k < P; ++k) {
      const int dest = prio[k];
      int need = std::max(0, target[k] - dist.at(m, dest));
      while (need > 0 && src < sources.size()) {
        const int from = sources[src];
        if (available[from] == 0) {
          ++src;
          continue;
        }
        const int moved = std::min(need, available[from]);
        actions[m].at(from, dest) += moved;
        available[from] -= moved;
        need -= moved;
      }
    }
  }
  return actions;
}

}  // namespace realism
