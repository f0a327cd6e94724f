#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "realism/demand.hpp"
#include "realism/sim.hpp"

namespace realism {

// Configuration problems carry the offending field so the CLI can report it.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& message)
      : std::runtime_error("config field '" + field + "': " + message), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum class Variant { Full, NoRegulation, NoFasa, Dfd, Sdsm, Sotp };

Variant parse_variant(const std::string& name);
std::string variant_name(Variant v);
// Baselines have no trainable parameters.
bool variant_trainable(Variant v);

struct TrainConfig {
  int n_iter = 200;
  double gamma = 0.99;
  double tau = 0.01;
  double beta = 0.5;
  double sigma = 0.1;
  double noise_clip = 0.2;
  int minibatch = 32;
  double lr_actor = 1e-4;
  double lr_critic = 1e-3;
  double spsa_a0 = 0.05;
  double spsa_c0 = 0.1;
  int buffer_capacity = 20000;
  int updates_per_iteration = 1;
  int convergence_window = 10;
  double convergence_tol = 0.01;
  double score_cap = 0.2;  // kappa
  std::vector<int> hidden{64, 64};
  std::vector<int> regulator_hidden;  // empty: same as hidden
  double reward_scale = 0.01;         // TD targets in O(1) units; reports stay in $

  void validate() const;
};

struct RunConfig {
  std::uint64_t seed = 0;
  Variant variant = Variant::Full;
  std::string out_dir;

  // sim parameters not known from data
  int slots_per_day = 24;
  int rebalance_every = 12;
  int horizon = 3;
  double unlock_fee = 1.00;
  double per_minute_fee = 0.39;
  double truck_cost_per_km = 2.422;
  int truck_capacity = 20;
  CityGoalSpec goals{0.8, -10.0};
  std::map<std::string, int> fleets;  // operator label -> fleet size
  std::vector<int> priority_regions;
  double sotp_fraction = 0.5;

  // demand source: exactly one of synthetic or CSV
  bool use_synthetic = false;
  SynthConfig synth;
  int synth_eval_days = 0;
  std::uint64_t synth_eval_seed = 0;
  int synth_grid_cols = 0;     // 0 -> square-ish
  double synth_cell_km = 1.5;
  std::string trips_csv;
  std::string regions_csv;
  int train_days = 0;          // CSV mode: leading days used for training

  TrainConfig train;

  // canonical JSON snapshot (resolved values) and its hash
  std::string to_json_text() const;
  std::uint64_t hash() const;

  static RunConfig from_json_text(const std::string& text);
  static RunConfig load(const std::string& path);
  void save(const std::string& path) const;
};

// Fully resolved inputs for a run: datasets, regions, predictor, SimConfig.
struct Experiment {
  RunConfig run;
  RegionMap regions;
  DemandDataset train_data;
  DemandDataset eval_data;   // may alias a window of train_data via eval_* below
  int eval_first_day = 0;
  int eval_num_days = 0;
  SimConfig sim;
  DemandPredictor predictor;           // built from training data only
  std::vector<std::vector<double>> demand_shares;  // per op, per region origin share

  static Experiment build(const RunConfig& cfg);
};

}  // namespace realism
