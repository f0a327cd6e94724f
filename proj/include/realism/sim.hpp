#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "realism/demand.hpp"
#include "realism/rng.hpp"
#include "realism/types.hpp"

namespace realism {

struct SimConfig {
  int num_regions = 0;
  int num_operators = 0;
  std::vector<int> fleet_sizes;       // per operator
  int slots_per_day = 24;
  int rebalance_every = 12;           // slots between rebalancing decisions
  int horizon = 3;                    // demand-prediction lookahead, slots
  double unlock_fee = 1.00;           // $ per trip
  double per_minute_fee = 0.39;       // $ per ride minute
  double truck_cost_per_km = 2.422;   // $ per truck km
  int truck_capacity = 20;            // vehicles per truck
  std::vector<double> distance_km;    // N*N, zero diagonal
  CityGoalSpec goals;

  double distance(int i, int j) const {
    return distance_km[static_cast<size_t>(i) * num_regions + j];
  }
  void validate() const;
  std::uint64_t fingerprint() const;
};

// Full simulation state; copyable so snapshots are plain value copies.
struct SimState {
  VehicleDistribution dist;
  int t = 0;  // slot index within the episode
  Rng rng;
  std::vector<double> cum_trip_revenue;  // per operator
  std::vector<double> cum_reb_cost;
  std::uint64_t config_fingerprint = 0;

  int day(int slots_per_day) const { return t / slots_per_day; }
  bool operator==(const SimState&) const = default;
};

// Per-slot detail retained for traces and interval-level metrics.
struct SlotRecord {
  int slot = 0;
  std::vector<int> demand_mi;        // [m*N+i] origin totals
  std::vector<int> satisfied_mi;
  std::vector<int> supply_start_mi;  // distribution at slot start
  std::vector<double> trip_revenue;  // per operator
};

struct StepOutcome {
  int start_slot = 0;
  int num_slots = 0;
  bool terminal = false;
  SatisfiedDemand satisfied;             // summed over the interval
  std::vector<double> trip_revenue;      // per operator, interval total
  std::vector<double> reb_km;
  std::vector<double> reb_cost;
  std::vector<double> net_revenue;       // trip_revenue - reb_cost
  std::vector<double> score;             // as passed to step
  std::vector<double> reward;            // net_revenue - score
  std::vector<double> interval_demand_mi;       // [m*N+i] summed
  std::vector<double> interval_satisfied_mi;
  std::vector<double> interval_mean_supply_mi;  // mean of slot-start supplies
  std::vector<SlotRecord> slot_records;
};

// Moves vehicles per the integer OD actions and returns truck km per
// operator: ceil(moved/capacity) trucks times the one-way arc distance per
// arc. Throws if any origin ships more than it holds.
std::vector<double> apply_rebalance(VehicleDistribution& dist,
                                    const std::vector<RebalanceAction>& actions,
                                    const SimConfig& cfg);

struct MatchResult {
  SatisfiedDemand satisfied;          // per (m, origin)
  std::vector<int> served_od;         // [(m*N+i)*N+j]
  std::vector<double> trip_revenue;   // per operator
};

// Serves min(origin demand, origin supply) per operator and origin, splits
// served trips over destinations proportionally to the demand row (largest
// remainder), prices each trip at unlock + per-minute * mean duration, and
// relocates served vehicles to their destinations at slot end.
MatchResult match_demand(VehicleDistribution& dist, const DemandTensor& demand,
                         std::span<const double> mean_duration_s, const SimConfig& cfg);

class Env {
 public:
  // `first_day`/`num_days` select a window of the dataset (defaults: all).
  Env(SimConfig cfg, const DemandDataset& dataset, int first_day = 0, int num_days = -1);

  // Spreads each fleet over regions proportionally to that operator's
  // first-day origin demand (largest remainder; uniform when there is none).
  void reset(std::uint64_t seed);

  // Runs one rebalancing interval: applies the actions, then matches demand
  // slot by slot until the next rebalancing point. reward = net - score.
  StepOutcome step(const std::vector<RebalanceAction>& actions,
                   std::span<const double> scores);

  SimState snapshot() const { return state_; }
  void restore(const SimState& snap);

  const SimState& state() const { return state_; }
  const SimConfig& config() const { return cfg_; }
  const DemandDataset& dataset() const { return *dataset_; }
  int episode_slots() const { return num_days_ * cfg_.slots_per_day; }
  int num_days() const { return num_days_; }
  bool done() const { return state_.t >= episode_slots(); }
  bool at_rebalance_slot() const { return state_.t % cfg_.rebalance_every == 0; }
  // Dataset slot index backing episode slot `t`.
  int dataset_slot(int t) const { return first_day_ * cfg_.slots_per_day + t; }

 private:
  SimConfig cfg_;
  const DemandDataset* dataset_;
  int first_day_ = 0;
  int num_days_ = 0;
  SimState state_;
};

// Episode trace: one row per (slot, operator). Interval-level quantities
// (reb_km, score, reward) appear on the interval's first slot.
void write_episode_trace(const std::string& path, std::uint64_t config_hash,
                         const std::vector<StepOutcome>& outcomes,
                         const std::vector<std::string>& operators);

}  // namespace realism
