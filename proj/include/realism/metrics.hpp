#pragma once

#include <span>

#include "realism/types.hpp"

namespace realism {

// City-level service metrics. All functions are pure; callers pick the
// aggregation window (single slot, rebalancing interval, day) and whether
// totals span one operator, a coalition, or the whole market.

// Mean served/requested ratio over regions with positive demand; 1 when no
// region has demand. Requires satisfied <= demand componentwise.
double satisfaction_rate(std::span<const double> satisfied, std::span<const double> demand);

// Negated total deviation of region demand-supply ratios from the city-wide
// ratio. Supply denominators are clamped to at least one vehicle so an empty
// region with demand registers large but finite inequity. Always <= 0.
double usage_equity(std::span<const double> demand, std::span<const double> supply);

// Goal distances: positive components mean the goal is unmet.
GoalDistance goal_distance(double c_sat, double c_equ, const CityGoalSpec& goals);

// Negated total deviation of per-operator score/net-revenue ratios from the
// pooled ratio. Net-revenue denominators are clamped to at least one
// currency unit. 0 when scores are proportional to net revenue.
FairnessValue score_fairness(std::span<const double> scores,
                             std::span<const double> net_revenue);

// Alternative equity: negated mean deviation of regional satisfaction rates
// from the global rate, over regions with positive demand.
double dfd_equity(std::span<const double> satisfied, std::span<const double> demand);

// Alternative score fairness: negated total deviation of operator scores
// from their mean.
double dfd_fairness(std::span<const double> scores);

}  // namespace realism
