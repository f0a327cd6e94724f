#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace realism {

// Per-operator, per-region vehicle counts at a time slot.
struct VehicleDistribution {
  int num_operators = 0;
  int num_regions = 0;
  int slot = 0;
  std::vector<int> counts;  // [m * num_regions + i]

  VehicleDistribution() = default;
  VehicleDistribution(int m, int n)
      : num_operators(m), num_regions(n), counts(static_cast<size_t>(m) * n, 0) {}

  int& at(int m, int i) { return counts[static_cast<size_t>(m) * num_regions + i]; }
  int at(int m, int i) const { return counts[static_cast<size_t>(m) * num_regions + i]; }

  int operator_total(int m) const {
    int sum = 0;
    for (int i = 0; i < num_regions; ++i) sum += at(m, i);
    return sum;
  }

  // City-wide vehicle count per region, all operators pooled.
  std::vector<int> region_totals() const {
    std::vector<int> out(num_regions, 0);
    for (int m = 0; m < num_operators; ++m)
      for (int i = 0; i < num_regions; ++i) out[i] += at(m, i);
    return out;
  }

  bool operator==(const VehicleDistribution&) const = default;
};

// Per-operator origin-destination trip request counts for one time slot.
struct DemandTensor {
  int num_operators = 0;
  int num_regions = 0;
  int slot = 0;
  std::vector<int> counts;  // [(m * N + i) * N + j]

  DemandTensor() = default;
  DemandTensor(int m, int n)
      : num_operators(m), num_regions(n), counts(static_cast<size_t>(m) * n * n, 0) {}

  size_t idx(int m, int i, int j) const {
    return (static_cast<size_t>(m) * num_regions + i) * num_regions + j;
  }
  int& at(int m, int i, int j) { return counts[idx(m, i, j)]; }
  int at(int m, int i, int j) const { return counts[idx(m, i, j)]; }

  int origin_total(int m, int i) const {
    int sum = 0;
    for (int j = 0; j < num_regions; ++j) sum += at(m, i, j);
    return sum;
  }

  long long total() const {
    return std::accumulate(counts.begin(), counts.end(), 0LL);
  }

  bool operator==(const DemandTensor&) const = default;
};

// Trips served per operator and region over some window; never exceeds the
// matching demand componentwise.
struct SatisfiedDemand {
  int num_operators = 0;
  int num_regions = 0;
  std::vector<int> counts;  // [m * num_regions + i]

  SatisfiedDemand() = default;
  SatisfiedDemand(int m, int n)
      : num_operators(m), num_regions(n), counts(static_cast<size_t>(m) * n, 0) {}

  int& at(int m, int i) { return counts[static_cast<size_t>(m) * num_regions + i]; }
  int at(int m, int i) const { return counts[static_cast<size_t>(m) * num_regions + i]; }
};

// One operator's integer origin-destination rebalancing moves. The diagonal
// is a no-op.
struct RebalanceAction {
  int num_regions = 0;
  std::vector<int> moves;  // [i * num_regions + j]

  RebalanceAction() = default;
  explicit RebalanceAction(int n)
      : num_regions(n), moves(static_cast<size_t>(n) * n, 0) {}

  int& at(int i, int j) { return moves[static_cast<size_t>(i) * num_regions + j]; }
  int at(int i, int j) const { return moves[static_cast<size_t>(i) * num_regions + j]; }

  int outgoing(int i) const {
    int sum = 0;
    for (int j = 0; j < num_regions; ++j)
      if (j != i) sum += at(i, j);
    return sum;
  }

  bool is_zero() const {
    for (int i = 0; i < num_regions; ++i)
      if (outgoing(i) != 0) return false;
    return true;
  }
};

// City-goal thresholds: required satisfaction rate and equity floor.
struct CityGoalSpec {
  double q_sat = 0.0;   // in [0, 1]
  double q_equ = 0.0;   // <= 0

  void validate() const {
    if (!(q_sat >= 0.0 && q_sat <= 1.0))
      throw std::invalid_argument("CityGoalSpec: q_sat must lie in [0,1]");
    if (!(q_equ <= 0.0))
      throw std::invalid_argument("CityGoalSpec: q_equ must be non-positive");
  }
};

// Signed gap between each goal threshold and its achieved value; positive
// components mean the goal is unmet.
struct GoalDistance {
  double g_sat = 0.0;
  double g_equ = 0.0;
};

// Score-assignment fairness value; 0 means all score-revenue ratios agree.
struct FairnessValue {
  double e_t = 0.0;  // <= 0
};

}  // namespace realism
