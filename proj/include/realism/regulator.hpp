#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "realism/metrics.hpp"
#include "realism/mlp.hpp"
#include "realism/types.hpp"

namespace realism {

// Which equity definition drives the coalition characteristic and goal
// metrics; SatisfactionSpread is the alternative-fairness variant.
enum class EquityMetric { DemandSupplyRatio, SatisfactionSpread };

struct CoalitionValue {
  double c_sat = 0.0;
  double c_equ = 0.0;
};

// Characteristic value of the operator subset encoded in `mask` (bit m set
// means operator m participates). Matching stays per-operator inside the
// coalition: served = min(demand, supply) per (m, region); equity compares
// the coalition's pooled demand and supply. The empty coalition is (0, 0).
CoalitionValue coalition_value(std::uint32_t mask, std::span<const double> demand_mi,
                               std::span<const double> supply_mi, int num_operators,
                               int num_regions,
                               EquityMetric equity = EquityMetric::DemandSupplyRatio);

// Exact Shapley values by subset enumeration; `characteristic` holds one
// value per coalition bitmask (2^M entries). M up to 12.
std::vector<double> shapley(std::span<const double> characteristic, int num_operators);

struct ShapleyAttribution {
  std::vector<double> phi_sat;  // per operator
  std::vector<double> phi_equ;
};

// Builds both characteristics from per-(operator, region) aggregates and
// returns the per-operator attributions for each goal.
ShapleyAttribution shapley_attribution(std::span<const double> demand_mi,
                                       std::span<const double> supply_mi,
                                       int num_operators, int num_regions,
                                       EquityMetric equity = EquityMetric::DemandSupplyRatio);

// Neural score assignment. Input layout: [g_sat, g_equ, phi_sat (M),
// phi_equ (M), z_net (M, scaled)]; output: one raw score per operator,
// squashed and capped at cap_fraction * max(z_net, 0).
struct ScoreModel {
  Mlp net;
  double cap_fraction = 0.2;
  int num_operators = 0;

  static ScoreModel create(int num_operators, std::span<const int> hidden,
                           double cap_fraction, Rng& rng);
  static int input_dim(int num_operators) { return 2 + 3 * num_operators; }

  std::vector<double> assign(const GoalDistance& g, const ShapleyAttribution& phi,
                             std::span<const double> z_net) const;
  std::vector<double> assign_with(const Mlp& params, const GoalDistance& g,
                                  const ShapleyAttribution& phi,
                                  std::span<const double> z_net) const;
};

// Composite regulation loss: beta-weighted mean goal distance plus
// (1-beta)-weighted mean unfairness magnitude (-E, which is >= 0). Callers
// pass goal distances already clipped at zero from below.
double regulation_loss(std::span<const double> goal_sat, std::span<const double> goal_equ,
                       std::span<const double> fairness, double beta);

struct SpsaResult {
  double loss_plus = 0.0;
  double loss_minus = 0.0;
};

// Simultaneous-perturbation step: draws a Rademacher direction, probes the
// loss at params +- c_k * delta, and descends the two-point estimate.
SpsaResult spsa_update(Mlp& params, const std::function<double(const Mlp&)>& loss,
                       double a_k, double c_k, Rng& rng);

// One row per scoring step of the regulator report.
struct RegulatorRecord {
  int slot = 0;
  double g_sat = 0.0, g_equ = 0.0;
  std::vector<double> phi_sat, phi_equ, scores, z_net;
  double fairness = 0.0;
};

void write_regulator_report(const std::string& path, std::uint64_t config_hash,
                            const std::vector<RegulatorRecord>& records,
                            const std::vector<std::string>& operators);

}  // namespace realism
