#include "realism/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace realism {

namespace {

void require_same_length(size_t a, size_t b, const char* what) {
  if (a != b) throw std::invalid_argument(std::string(what) + ": length mismatch");
}

}  // namespace

double satisfaction_rate(std::span<const double> satisfied, std::span<const double> demand) {
  require_same_length(satisfied.size(), demand.size(), "satisfaction_rate");
  double sum = 0.0;
  int active = 0;
  for (size_t i = 0; i < demand.size(); ++i) {
    if (demand[i] <= 0.0) continue;
    if (satisfied[i] > demand[i] + 1e-9)
      throw std::invalid_argument("satisfaction_rate: satisfied exceeds demand");
    sum += satisfied[i] / demand[i];
    ++active;
  }
  if (active == 0) return 1.0;  // vacuous: nothing was requested
  double rate = sum / active;
  return rate < 0.0 ? 0.0 : (rate > 1.0 ? 1.0 : rate);
}

double usage_equity(std::span<const double> demand, std::span<const double> supply) {
  require_same_length(demand.size(), supply.size(), "usage_equity");
  double total_demand = 0.0;
  double total_supply = 0.0;
  for (size_t i = 0; i < demand.size(); ++i) {
    if (supply[i] < 0.0) throw std::invalid_argument("usage_equity: negative supply");
    total_demand += demand[i];
    total_supply += std::max(supply[i], 1.0);
  }
  if (total_supply <= 0.0) return 0.0;
  const double city_ratio = total_demand / total_supply;
  double deviation = 0.0;
  for (size_t i = 0; i < demand.size(); ++i) {
    const double ratio = demand[i] / std::max(supply[i], 1.0);
    deviation += std::fabs(ratio - city_ratio);
  }
  return -deviation;
}

GoalDistance goal_distance(double c_sat, double c_equ, const CityGoalSpec& goals) {
  return {goals.q_sat - c_sat, goals.q_equ - c_equ};
}

FairnessValue score_fairness(std::span<const double> scores,
                             std::span<const double> net_revenue) {
  require_same_length(scores.size(), net_revenue.size(), "score_fairness");
  double total_score = 0.0;
  double total_net = 0.0;
  for (size_t m = 0; m < scores.size(); ++m) {
    total_score += scores[m];
    total_net += std::max(net_revenue[m], 1.0);
  }
  if (net_revenue.empty()) return {0.0};
  const double pooled = total_score / total_net;
  double deviation = 0.0;
  for (size_t m = 0; m < scores.size(); ++m)
    deviation += std::fabs(scores[m] / std::max(net_revenue[m], 1.0) - pooled);
  return {-deviation};
}

double dfd_equity(std::span<const double> satisfied, std::span<const double> demand) {
  require_same_length(satisfied.size(), demand.size(), "dfd_equity");
  double total_satisfied = 0.0;
  double total_demand = 0.0;
  int active = 0;
  for (size_t i = 0; i < demand.size(); ++i) {
    if (demand[i] <= 0.0) continue;
    total_satisfied += satisfied[i];
    total_demand += demand[i];
    ++active;
  }
  if (active == 0 || total_demand <= 0.0) return 0.0;
  const double global_rate = total_satisfied / total_demand;
  double deviation = 0.0;
  for (size_t i = 0; i < demand.size(); ++i) {
    if (demand[i] <= 0.0) continue;
    deviation += std::fabs(satisfied[i] / demand[i] - global_rate);
  }
  return -deviation / active;
}

double dfd_fairness(std::span<const double> scores) {
  if (scores.empty()) return 0.0;
  double mean = 0.0;
  for (double s : scores) mean += s;
  mean /= static_cast<double>(scores.size());
  double deviation = 0.0;
  for (double s : scores) deviation += std::fabs(s - mean);
  return -deviation;
}

}  // namespace realism
