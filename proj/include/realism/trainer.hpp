#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "realism/agents.hpp"
#include "realism/config.hpp"
#include "realism/regulator.hpp"
#include "realism/sim.hpp"

namespace realism {

// One stored interaction step (a whole rebalancing interval). Regulator
// features ride along so rewards can be recomputed under a perturbed score
// model during the replay-based update.
struct Transition {
  std::vector<JointObservation> obs;         // per operator
  std::vector<std::vector<double>> actions;  // per operator, joint continuous
  std::vector<JointObservation> next_obs;
  std::vector<double> reward;        // per operator, scores applied
  std::vector<double> trip_revenue;  // pre-score components
  std::vector<double> reb_cost;
  GoalDistance goal;
  ShapleyAttribution phi;
  std::vector<double> z_net;
  bool terminal = false;
};

// Fixed-capacity FIFO ring with uniform minibatch sampling (no replacement
// within a batch).
class ReplayBuffer {
 public:
  explicit ReplayBuffer(size_t capacity);

  void push(Transition t);
  size_t size() const { return data_.size(); }
  size_t capacity() const { return capacity_; }
  // k = 0 is the oldest stored transition.
  const Transition& at(size_t k) const;

  std::vector<size_t> sample_indices(int count, Rng& rng) const;

 private:
  size_t capacity_;
  size_t next_ = 0;
  std::vector<Transition> data_;
};

struct IterationReport {
  int iteration = 0;
  std::vector<double> net_revenue;  // per operator, episode totals
  double mean_net_revenue = 0.0;
  double c_sat = 0.0;  // episode means over scoring steps
  double c_equ = 0.0;
  double fairness = 0.0;     // mean E_t
  double critic_loss = 0.0;  // mean pre-step TD loss across agents
  double delta_loss = 0.0;   // mean of the two probe losses
  bool updates_skipped = false;
  double wall_seconds = 0.0;  // console diagnostics only; kept out of the CSV
};

// True when the rolling means of net revenue, c_sat, and c_equ over the
// last `window` reports all moved by less than `tol` relative.
bool convergence_check(std::span<const IterationReport> reports, int window, double tol);

struct RolloutResult {
  std::vector<StepOutcome> outcomes;
  std::vector<RegulatorRecord> records;   // one per scoring step
  std::vector<Transition> transitions;    // filled when collecting
  std::vector<double> c_sat, c_equ, e_t;  // per scoring step
  std::vector<double> net_revenue;        // per operator totals

  double mean_c_sat() const;
  double mean_c_equ() const;
  double mean_fairness() const;
};

struct EvalSummary {
  std::string variant;
  std::vector<double> net_revenue;  // per operator totals over the period
  double satisfaction_pct = 0.0;    // mean c_sat in percent
  double equity = 0.0;              // mean c_equ
  double fairness = 0.0;            // mean E_t
  double score_ratio_std = 0.0;     // spread of score/net-revenue ratios
  std::vector<double> daily_c_sat, daily_c_equ;
  std::vector<std::vector<double>> daily_net;  // [day][operator]
  RolloutResult detail;
};

struct Checkpoint {
  int version = 1;
  std::uint64_t config_hash = 0;
  std::string variant;
  int best_iteration = -1;
  std::vector<std::string> operators;
  std::vector<OperatorAgents> agents;
  Mlp delta;
  double score_cap = 0.2;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
// Throws std::runtime_error on malformed files; callers compare config_hash.
Checkpoint load_checkpoint(const std::string& path);

// Alternating optimization: collect trajectories, update operator agents,
// then update the score model against a same-initial-state replay.
class Trainer {
 public:
  Trainer(const Experiment& exp, Variant variant);

  // Runs until the convergence check fires or the iteration cap is reached;
  // finishes holding the best checkpoint by the composite criterion
  // (city goals met preferred, then mean net revenue).
  std::vector<IterationReport> train();

  // Deterministic rollout on the held-out window.
  EvalSummary evaluate(Variant variant) const;

  Checkpoint checkpoint() const;
  void restore(const Checkpoint& ckpt);

  const std::vector<OperatorAgents>& agents() const { return agents_; }
  const ScoreModel& score_model() const { return delta_; }

 private:
  struct RegulatorRuntime {
    bool enabled = false;
    EquityMetric equity = EquityMetric::DemandSupplyRatio;
    bool dfd_fair = false;
    const ScoreModel* model = nullptr;
    const Mlp* params = nullptr;
  };

  RegulatorRuntime runtime_for(Variant v, const Mlp* params) const;
  std::vector<double> score_step(const StepOutcome& out, const RegulatorRuntime& reg,
                                 RolloutResult& run) const;
  RolloutResult run_rl_episode(Env& env, const std::vector<OperatorAgents>& agents,
                               const RegulatorRuntime& reg, double sigma, Rng* noise_rng,
                               bool collect) const;
  RolloutResult run_baseline_episode(Env& env, Variant which,
                                     const RegulatorRuntime& reg) const;
  // One full update round over every (operator, region) agent; returns the
  // mean pre-step critic loss. reward_of supplies the per-operator reward
  // for a sampled transition.
  double update_round(const ReplayBuffer& buffer, std::vector<OperatorAgents>& agents,
                      std::uint64_t round_key,
                      const std::function<double(const Transition&, int)>& reward_of) const;
  double update_regulator(Env& env, const SimState& episode_start,
                          const std::vector<OperatorAgents>& pre_update_agents,
                          const ReplayBuffer& buffer, int iteration, Rng& spsa_rng);

  const Experiment* exp_;
  Variant variant_;
  std::uint64_t seed_;
  ObservationSpec spec_;
  std::vector<OperatorAgents> agents_;
  ScoreModel delta_;
  int best_iteration_ = -1;
  double reward_scale_ = 0.01;  // TD targets in O(1) units; reports stay in $
};

void write_iterations_csv(const std::string& path, std::uint64_t config_hash,
                          const std::vector<IterationReport>& reports,
                          const std::vector<std::string>& operators);
void write_metrics_csv(const std::string& path, std::uint64_t config_hash,
                       const std::vector<EvalSummary>& rows,
                       const std::vector<std::string>& operators);
void write_daily_csv(const std::string& path, std::uint64_t config_hash,
                     const EvalSummary& summary, const std::vector<std::string>& operators);

}  // namespace realism
