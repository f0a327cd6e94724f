#include "realism/sim.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "realism/apportion.hpp"
#include "realism/csv.hpp"

namespace realism {

void SimConfig::validate() const {
  if (num_regions < 1 || num_operators < 1)
    throw std::invalid_argument("SimConfig: need at least one region and operator");
  if (static_cast<int>(fleet_sizes.size()) != num_operators)
    throw std::invalid_argument("SimConfig: fleet_sizes size mismatch");
  for (int f : fleet_sizes)
    if (f <= 0) throw std::invalid_argument("SimConfig: fleet sizes must be positive");
  if (slots_per_day < 1 || rebalance_every < 1 || slots_per_day % rebalance_every != 0)
    throw std::invalid_argument("SimConfig: rebalance_every must divide slots_per_day");
  if (horizon < 1) throw std::invalid_argument("SimConfig: horizon must be >= 1");
  if (truck_capacity < 1) throw std::invalid_argument("SimConfig: truck capacity must be >= 1");
  if (distance_km.size() != static_cast<size_t>(num_regions) * num_regions)
    throw std::invalid_argument("SimConfig: distance matrix must be N*N");
  for (int i = 0; i < num_regions; ++i) {
    if (distance(i, i) != 0.0)
      throw std::invalid_argument("SimConfig: distance matrix diagonal must be zero");
    for (int j = 0; j < num_regions; ++j)
      if (distance(i, j) < 0.0)
        throw std::invalid_argument("SimConfig: negative distance");
  }
  goals.validate();
}

std::uint64_t SimConfig::fingerprint() const {
  std::uint64_t h = mix64(0x5eedULL, num_regions, num_operators, slots_per_day,
                          rebalance_every, horizon, truck_capacity);
  auto fold = [&h](double v) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(v));
    std::memcpy(&bits, &v, sizeof(bits));
    h = mix64(h, bits);
  };
  for (int f : fleet_sizes) h = mix64(h, static_cast<std::uint64_t>(f));
  fold(unlock_fee);
  fold(per_minute_fee);
  fold(truck_cost_per_km);
  for (double d : distance_km) fold(d);
  fold(goals.q_sat);
  fold(goals.q_equ);
  return h;
}

std::vector<double> apply_rebalance(VehicleDistribution& dist,
                                    const std::vector<RebalanceAction>& actions,
                                    const SimConfig& cfg) {
  const int N = cfg.num_regions;
  if (static_cast<int>(actions.size()) != cfg.num_operators)
    throw std::invalid_argument("apply_rebalance: one action per operator required");

  std::vector<double> reb_km(cfg.num_operators, 0.0);
  for (int m = 0; m < cfg.num_operators; ++m) {
    const RebalanceAction& a = actions[m];
    if (a.num_regions != N)
      throw std::invalid_argument("apply_rebalance: action dimension mismatch");
    for (int v : a.moves)
      if (v < 0) throw std::invalid_argument("apply_rebalance: negative move");
    for (int i = 0; i < N; ++i) {
      if (a.outgoing(i) > dist.at(m, i))
        throw std::runtime_error("apply_rebalance: operator " + std::to_string(m) +
                                 " moves more vehicles than region " + std::to_string(i) +
                                 " holds");
    }
  }

  for (int m = 0; m < cfg.num_operators; ++m) {
    const RebalanceAction& a = actions[m];
    for (int i = 0; i < N; ++i) {
      for (int j = 0; j < N; ++j) {
        if (i == j) continue;  // diagonal is a no-op
        const int moved = a.at(i, j);
        if (moved == 0) continue;
        dist.at(m, i) -= moved;
        dist.at(m, j) += moved;
        const int trucks = (moved + cfg.truck_capacity - 1) / cfg.truck_capacity;
        reb_km[m] += trucks * cfg.distance(i, j);
      }
    }
  }
  return reb_km;
}

MatchResult match_demand(VehicleDistribution& dist, const DemandTensor& demand,
                         std::span<const double> mean_duration_s, const SimConfig& cfg) {
  const int N = cfg.num_regions;
  const int M = cfg.num_operators;
  if (demand.num_regions != N || demand.num_operators != M)
    throw std::invalid_argument("match_demand: demand dimension mismatch");
  if (mean_duration_s.size() != static_cast<size_t>(M) * N * N)
    throw std::invalid_argument("match_demand: duration table dimension mismatch");

  MatchResult result;
  result.satisfied = SatisfiedDemand(M, N);
  result.served_od.assign(static_cast<size_t>(M) * N * N, 0);
  result.trip_revenue.assign(M, 0.0);

  std::vector<int> arrivals(static_cast<size_t>(M) * N, 0);
  std::vector<double> row(N);
  for (int m = 0; m < M; ++m) {
    for (int i = 0; i < N; ++i) {
      const int origin_demand = demand.origin_total(m, i);
      if (origin_demand == 0) continue;
      const int served = std::min(origin_demand, dist.at(m, i));
      result.satisfied.at(m, i) = served;
      if (served == 0) continue;
      for (int j = 0; j < N; ++j) row[j] = demand.at(m, i, j);
      const std::vector<int> split = largest_remainder(row, served);
      dist.at(m, i) -= served;
      for (int j = 0; j < N; ++j) {
        if (split[j] == 0) continue;
        arrivals[static_cast<size_t>(m) * N + j] += split[j];
        result.served_od[(static_cast<size_t>(m) * N + i) * N + j] = split[j];
        const double minutes =
            mean_duration_s[(static_cast<size_t>(m) * N + i) * N + j] / 60.0;
        result.trip_revenue[m] +=
            split[j] * (cfg.unlock_fee + cfg.per_minute_fee * minutes);
      }
    }
  }
  // served vehicles become available at their destinations next slot
  for (int m = 0; m < M; ++m)
    for (int j = 0; j < N; ++j) dist.at(m, j) += arrivals[static_cast<size_t>(m) * N + j];
  return result;
}

Env::Env(SimConfig cfg, const DemandDataset& dataset, int first_day, int num_days)
    : cfg_(std::move(cfg)), dataset_(&dataset), first_day_(first_day) {
  cfg_.validate();
  if (dataset.num_regions != cfg_.num_regions || dataset.num_operators != cfg_.num_operators)
    throw std::invalid_argument("Env: dataset dimensions do not match config");
  if (dataset.slots_per_day != cfg_.slots_per_day)
    throw std::invalid_argument("Env: dataset slots_per_day does not match config");
  num_days_ = num_days < 0 ? dataset.num_days - first_day : num_days;
  if (first_day_ < 0 || num_days_ < 1 || first_day_ + num_days_ > dataset.num_days)
    throw std::invalid_argument("Env: day window outside dataset");
}

void Env::reset(std::uint64_t seed) {
  state_ = SimState{};
  state_.dist = VehicleDistribution(cfg_.num_operators, cfg_.num_regions);
  state_.rng = Rng(seed);
  state_.cum_trip_revenue.assign(cfg_.num_operators, 0.0);
  state_.cum_reb_cost.assign(cfg_.num_operators, 0.0);
  state_.config_fingerprint = cfg_.fingerprint();

  std::vector<double> weights(cfg_.num_regions);
  for (int m = 0; m < cfg_.num_operators; ++m) {
    std::fill(weights.begin(), weights.end(), 0.0);
    for (int s = 0; s < cfg_.slots_per_day; ++s) {
      const DemandTensor& t = dataset_->tensor(dataset_slot(s));
      for (int i = 0; i < cfg_.num_regions; ++i) weights[i] += t.origin_total(m, i);
    }
    const std::vector<int> placed = largest_remainder(weights, cfg_.fleet_sizes[m]);
    for (int i = 0; i < cfg_.num_regions; ++i) state_.dist.at(m, i) = placed[i];
  }
}

StepOutcome Env::step(const std::vector<RebalanceAction>& actions,
                      std::span<const double> scores) {
  if (done()) throw std::runtime_error("Env::step: episode finished");
  if (!at_rebalance_slot())
    throw std::runtime_error("Env::step: not at a rebalancing slot");
  if (scores.size() != static_cast<size_t>(cfg_.num_operators))
    throw std::invalid_argument("Env::step: scores length mismatch");

  const int M = cfg_.num_operators;
  const int N = cfg_.num_regions;
  StepOutcome out;
  out.start_slot = state_.t;
  out.satisfied = SatisfiedDemand(M, N);
  out.trip_revenue.assign(M, 0.0);
  out.reb_cost.assign(M, 0.0);
  out.net_revenue.assign(M, 0.0);
  out.score.assign(scores.begin(), scores.end());
  out.reward.assign(M, 0.0);
  out.interval_demand_mi.assign(static_cast<size_t>(M) * N, 0.0);
  out.interval_satisfied_mi.assign(static_cast<size_t>(M) * N, 0.0);
  out.interval_mean_supply_mi.assign(static_cast<size_t>(M) * N, 0.0);

  out.reb_km = apply_rebalance(state_.dist, actions, cfg_);

  const int interval = std::min(cfg_.rebalance_every, episode_slots() - state_.t);
  for (int s = 0; s < interval; ++s) {
    SlotRecord rec;
    rec.slot = state_.t;
    rec.supply_start_mi.assign(state_.dist.counts.begin(), state_.dist.counts.end());

    const DemandTensor& demand = dataset_->tensor(dataset_slot(state_.t));
    rec.demand_mi.assign(static_cast<size_t>(M) * N, 0);
    for (int m = 0; m < M; ++m)
      for (int i = 0; i < N; ++i)
        rec.demand_mi[static_cast<size_t>(m) * N + i] = demand.origin_total(m, i);

    MatchResult match = match_demand(state_.dist, demand, dataset_->mean_duration_s, cfg_);
    rec.satisfied_mi = match.satisfied.counts;
    rec.trip_revenue = match.trip_revenue;

    for (int m = 0; m < M; ++m) {
      out.trip_revenue[m] += match.trip_revenue[m];
      for (int i = 0; i < N; ++i) {
        const size_t c = static_cast<size_t>(m) * N + i;
        out.satisfied.at(m, i) += match.satisfied.at(m, i);
        out.interval_demand_mi[c] += rec.demand_mi[c];
        out.interval_satisfied_mi[c] += match.satisfied.at(m, i);
        out.interval_mean_supply_mi[c] += rec.supply_start_mi[c];
      }
    }
    out.slot_records.push_back(std::move(rec));
    ++state_.t;
  }
  out.num_slots = interval;
  for (double& v : out.interval_mean_supply_mi) v /= interval;

  for (int m = 0; m < M; ++m) {
    out.reb_cost[m] = cfg_.truck_cost_per_km * out.reb_km[m];
    out.net_revenue[m] = out.trip_revenue[m] - out.reb_cost[m];
    out.reward[m] = out.net_revenue[m] - out.score[m];
    state_.cum_trip_revenue[m] += out.trip_revenue[m];
    state_.cum_reb_cost[m] += out.reb_cost[m];
  }
  out.terminal = done();
  return out;
}

void Env::restore(const SimState& snap) {
  if (snap.config_fingerprint != cfg_.fingerprint())
    throw std::runtime_error("Env::restore: snapshot belongs to a different configuration");
  state_ = snap;
}

void write_episode_trace(const std::string& path, std::uint64_t config_hash,
                         const std::vector<StepOutcome>& outcomes,
                         const std::vector<std::string>& operators) {
  CsvWriter csv(path, config_hash,
                {"slot", "operator", "vehicles", "demand", "satisfied", "trip_revenue",
                 "reb_km", "score", "reward"});
  const int M = static_cast<int>(operators.size());
  for (const auto& out : outcomes) {
    for (size_t s = 0; s < out.slot_records.size(); ++s) {
      const SlotRecord& rec = out.slot_records[s];
      const int N = static_cast<int>(rec.demand_mi.size()) / M;
      for (int m = 0; m < M; ++m) {
        int vehicles = 0, dem = 0, sat = 0;
        for (int i = 0; i < N; ++i) {
          vehicles += rec.supply_start_mi[static_cast<size_t>(m) * N + i];
          dem += rec.demand_mi[static_cast<size_t>(m) * N + i];
          sat += rec.satisfied_mi[static_cast<size_t>(m) * N + i];
        }
        const bool first = s == 0;
        csv.row({std::to_string(rec.slot), operators[m], std::to_string(vehicles),
                 std::to_string(dem), std::to_string(sat), fmt_double(rec.trip_revenue[m]),
                 fmt_double(first ? out.reb_km[m] : 0.0),
                 fmt_double(first ? out.score[m] : 0.0),
                 fmt_double(first ? out.reward[m] : 0.0)});
      }
    }
  }
}

}  // namespace realism
