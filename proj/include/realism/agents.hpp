#pragma once

#include <span>
#include <vector>

#include "realism/mlp.hpp"
#include "realism/sim.hpp"
#include "realism/types.hpp"

namespace realism {

// Dimensions of the per-region agent interface. Each region agent observes
// its own vehicle count plus its predicted outgoing demand over the horizon
// (local), and the operator's full distribution plus per-slot demand totals
// (global). The actor emits one logit per destination plus a keep logit.
struct ObservationSpec {
  int num_regions = 0;
  int horizon = 0;

  int local_dim() const { return 1 + num_regions * horizon; }
  int global_dim() const { return num_regions + horizon; }
  int agent_dim() const { return local_dim() + global_dim(); }
  int action_dim() const { return num_regions + 1; }
  int joint_action_dim() const { return num_regions * action_dim(); }
  // Centralized critic: every region's local block, the shared global
  // block, and the operator's joint continuous action.
  int critic_dim() const {
    return num_regions * local_dim() + global_dim() + joint_action_dim();
  }
};

// One operator's stacked region observations; the global block is shared.
struct JointObservation {
  int num_regions = 0;
  int local_dim = 0;
  std::vector<double> local;   // num_regions * local_dim
  std::vector<double> global;  // global_dim

  std::vector<double> agent_view(int region) const;
  bool empty() const { return local.empty(); }
};

// Packs observations for operator `op`. `predicted` holds h OD matrices
// (N*N doubles each). Counts are scaled by the operator's fleet size so
// network inputs stay O(1).
JointObservation build_joint_observation(const VehicleDistribution& dist, int op,
                                         const std::vector<std::vector<double>>& predicted,
                                         double fleet_size);

// Single-region observation vector, laid out local-then-global.
std::vector<double> build_observation(const VehicleDistribution& dist, int op,
                                      const std::vector<std::vector<double>>& predicted,
                                      int region, double fleet_size);

std::vector<double> critic_input(const JointObservation& obs,
                                 std::span<const double> joint_action);

// Decodes N+1 actor logits into integer moves out of `region`. The keep
// fraction is the keep logit's softmax share measured against the uniform
// baseline, so tied logits decode to "keep everything":
//   keep = min(1, (N+1) * softmax_keep), movable = round(supply * (1-keep)).
// Movable vehicles are apportioned over the destination probabilities by
// largest remainder; moves to `region` itself are forced to zero. Pass
// region = -1 when no destination should be masked.
std::vector<int> decode_action(std::span<const double> logits, int supply, int region);

double clip_noise(double draw, double clip);

// y = r + gamma * Q'(s', pi'(o') + clipped noise); plain r on terminal slots.
double td3_target(double reward, double gamma, double target_q_next, bool terminal);

// --- per-agent networks ---

struct AgentNets {
  Mlp actor;
  Mlp critic;
  Mlp actor_target;
  Mlp critic_target;
};

struct OperatorAgents {
  std::vector<AgentNets> regions;
};

std::vector<OperatorAgents> make_agents(int num_operators, const ObservationSpec& spec,
                                        std::span<const int> hidden, Rng& rng);

// --- gradient updates ---

struct CriticBatch {
  std::vector<std::vector<double>> inputs;  // critic-layout vectors
  std::vector<double> targets;
};

// One mean-squared-TD gradient step; returns the pre-step loss.
double update_critic(Mlp& critic, const CriticBatch& batch, double lr);

struct ActorSample {
  std::vector<double> agent_obs;     // actor input for this region
  std::vector<double> state_part;    // critic input minus the action block
  std::vector<double> joint_action;  // buffer actions; this region's slice is replaced
};

// Deterministic policy-gradient ascent step through the critic.
void update_actor(Mlp& actor, const Mlp& critic, int region,
                  const std::vector<ActorSample>& batch, const ObservationSpec& spec,
                  double lr);

// --- baseline policies ---

// Static demand-supply matching: per operator, move vehicles from surplus to
// deficit regions (ascending region id) until the distribution matches the
// historical-share targets.
std::vector<RebalanceAction> sdsm_policy(const VehicleDistribution& dist,
                                         const std::vector<std::vector<double>>& shares);

// Strict relocation: push `fraction` of each fleet into the priority
// regions, split evenly, sourcing from non-priority regions in descending
// surplus order.
std::vector<RebalanceAction> sotp_policy(const VehicleDistribution& dist,
                                         const std::vector<int>& priority_regions,
                                         double fraction);

}  // namespace realism
