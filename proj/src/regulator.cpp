#include "realism/regulator.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

#include "realism/csv.hpp"

namespace realism {

CoalitionValue coalition_value(std::uint32_t mask, std::span<const double> demand_mi,
                               std::span<const double> supply_mi, int num_operators,
                               int num_regions, EquityMetric equity) {
  if (demand_mi.size() != static_cast<size_t>(num_operators) * num_regions ||
      supply_mi.size() != demand_mi.size())
    throw std::invalid_argument("coalition_value: aggregate dimension mismatch");
  if (mask == 0) return {0.0, 0.0};

  std::vector<double> demand(num_regions, 0.0);
  std::vector<double> served(num_regions, 0.0);
  std::vector<double> supply(num_regions, 0.0);
  for (int m = 0; m < num_operators; ++m) {
    if (!(mask & (1u << m))) continue;
    for (int i = 0; i < num_regions; ++i) {
      const size_t c = static_cast<size_t>(m) * num_regions + i;
      demand[i] += demand_mi[c];
      served[i] += std::min(demand_mi[c], supply_mi[c]);
      supply[i] += supply_mi[c];
    }
  }
  CoalitionValue value;
  value.c_sat = satisfaction_rate(served, demand);
  value.c_equ = equity == EquityMetric::DemandSupplyRatio
                    ? usage_equity(demand, supply)
                    : dfd_equity(served, demand);
  return value;
}

std::vector<double> shapley(std::span<const double> characteristic, int num_operators) {
  if (num_operators < 1 || num_operators > 12)
    throw std::invalid_argument("shapley: supports 1..12 operators");
  const std::uint32_t subsets = 1u << num_operators;
  if (characteristic.size() != subsets)
    throw std::invalid_argument("shapley: characteristic must cover all 2^M subsets");

  std::vector<double> factorial(num_operators + 1, 1.0);
  for (int k = 1; k <= num_operators; ++k) factorial[k] = factorial[k - 1] * k;
  // weight per coalition size: |H|! (M-|H|-1)! / M!
  std::vector<double> weight(num_operators);
  for (int h = 0; h < num_operators; ++h)
    weight[h] = factorial[h] * factorial[num_operators - h - 1] / factorial[num_operators];

  std::vector<double> phi(num_operators, 0.0);
  for (std::uint32_t mask = 0; mask < subsets; ++mask) {
    const int size = std::popcount(mask);
    for (int m = 0; m < num_operators; ++m) {
      if (mask & (1u << m)) continue;
      phi[m] += weight[size] * (characteristic[mask | (1u << m)] - characteristic[mask]);
    }
  }
  return phi;
}

ShapleyAttribution shapley_attribution(std::span<const double> demand_mi,
                                       std::span<const double> supply_mi,
                                       int num_operators, int num_regions,
                                       EquityMetric equity) {
  const std::uint32_t subsets = 1u << num_operators;
  std::vector<double> char_sat(subsets), char_equ(subsets);
  for (std::uint32_t mask = 0; mask < subsets; ++mask) {
    const CoalitionValue v =
        coalition_value(mask, demand_mi, supply_mi, num_operators, num_regions, equity);
    char_sat[mask] = v.c_sat;
    char_equ[mask] = v.c_equ;
  }
  ShapleyAttribution out;
  out.phi_sat = shapley(char_sat, num_operators);
  out.phi_equ = shapley(char_equ, num_operators);
  return out;
}

ScoreModel ScoreModel::create(int num_operators, std::span<const int> hidden,
                              double cap_fraction, Rng& rng) {
  if (!(cap_fraction > 0.0 && cap_fraction <= 1.0))
    throw std::invalid_argument("ScoreModel: cap fraction must lie in (0,1]");
  std::vector<int> sizes{input_dim(num_operators)};
  for (int hsize : hidden) sizes.push_back(hsize);
  sizes.push_back(num_operators);
  ScoreModel model;
  model.net = Mlp::create(sizes, rng);
  model.cap_fraction = cap_fraction;
  model.num_operators = num_operators;
  return model;
}

std::vector<double> ScoreModel::assign(const GoalDistance& g, const ShapleyAttribution& phi,
                                       std::span<const double> z_net) const {
  return assign_with(net, g, phi, z_net);
}

std::vector<double> ScoreModel::assign_with(const Mlp& params, const GoalDistance& g,
                                            const ShapleyAttribution& phi,
                                            std::span<const double> z_net) const {
  const int M = num_operators;
  if (static_cast<int>(z_net.size()) != M ||
      static_cast<int>(phi.phi_sat.size()) != M ||
      static_cast<int>(phi.phi_equ.size()) != M)
    throw std::invalid_argument("ScoreModel::assign: operator count mismatch");

  double denom = 0.0;
  for (double z : z_net) denom += std::fabs(z);
  denom = std::max(1.0, denom / M);

  std::vector<double> x;
  x.reserve(input_dim(M));
  x.push_back(g.g_sat);
  x.push_back(g.g_equ);
  x.insert(x.end(), phi.phi_sat.begin(), phi.phi_sat.end());
  x.insert(x.end(), phi.phi_equ.begin(), phi.phi_equ.end());
  for (double z : z_net) x.push_back(z / denom);

  const std::vector<double> raw = mlp_forward(params, x);
  std::vector<double> scores(M);
  for (int m = 0; m < M; ++m)
    scores[m] = std::tanh(raw[m]) * cap_fraction * std::max(z_net[m], 0.0);
  return scores;
}

double regulation_loss(std::span<const double> goal_sat, std::span<const double> goal_equ,
                       std::span<const double> fairness, double beta) {
  if (!(beta >= 0.0 && beta <= 1.0))
    throw std::invalid_argument("regulation_loss: beta must lie in [0,1]");
  if (goal_sat.empty() || goal_sat.size() != goal_equ.size() || fairness.empty())
    throw std::invalid_argument("regulation_loss: empty sequences");

  double goal_term = 0.0;
  for (size_t t = 0; t < goal_sat.size(); ++t) goal_term += goal_sat[t] + goal_equ[t];
  goal_term /= static_cast<double>(goal_sat.size());

  // fairness enters as unfairness magnitude: -E_t >= 0
  double unfair = 0.0;
  for (double e : fairness) unfair += -e;
  unfair /= static_cast<double>(fairness.size());

  return beta * goal_term + (1.0 - beta) * unfair;
}

SpsaResult spsa_update(Mlp& params, const std::function<double(const Mlp&)>& loss,
                       double a_k, double c_k, Rng& rng) {
  if (!(a_k > 0.0) || !(c_k > 0.0))
    throw std::invalid_argument("spsa_update: step and perturbation must be positive");

  std::vector<double> flat = flatten_params(params);
  std::vector<double> delta(flat.size());
  for (double& d : delta) d = (rng.next_u64() & 1u) ? 1.0 : -1.0;

  Mlp probe = params;
  std::vector<double> shifted(flat.size());
  for (size_t k = 0; k < flat.size(); ++k) shifted[k] = flat[k] + c_k * delta[k];
  unflatten_params(probe, shifted);
  const double loss_plus = loss(probe);
  for (size_t k = 0; k < flat.size(); ++k) shifted[k] = flat[k] - c_k * delta[k];
  unflatten_params(probe, shifted);
  const double loss_minus = loss(probe);
  if (!std::isfinite(loss_plus) || !std::isfinite(loss_minus))
    throw std::runtime_error("spsa_update: non-finite loss");

  const double scale = (loss_plus - loss_minus) / (2.0 * c_k);
  // delta is Rademacher, so 1/delta == delta
  for (size_t k = 0; k < flat.size(); ++k) flat[k] -= a_k * scale * delta[k];
  unflatten_params(params, flat);
  return {loss_plus, loss_minus};
}

void write_regulator_report(const std::string& path, std::uint64_t config_hash,
                            const std::vector<RegulatorRecord>& records,
                            const std::vector<std::string>& operators) {
  std::vector<std::string> header{"slot", "g_sat", "g_equ"};
  for (const auto& op : operators) header.push_back("phi_sat_" + op);
  for (const auto& op : operators) header.push_back("phi_equ_" + op);
  for (const auto& op : operators) header.push_back("score_" + op);
  for (const auto& op : operators) header.push_back("z_net_" + op);
  header.push_back("fairness");

  CsvWriter csv(path, config_hash, header);
  for (const auto& rec : records) {
    std::vector<std::string> row{std::to_string(rec.slot), fmt_double(rec.g_sat),
                                 fmt_double(rec.g_equ)};
    for (double v : rec.phi_sat) row.push_back(fmt_double(v));
    for (double v : rec.phi_equ) row.push_back(fmt_double(v));
    for (double v : rec.scores) row.push_back(fmt_double(v));
    for (double v : rec.z_net) row.push_back(fmt_double(v));
    row.push_back(fmt_double(rec.fairness));
    csv.row(row);
  }
}

}  // namespace realism
