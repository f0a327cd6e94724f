#include "realism/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace realism {

using nlohmann::json;

Variant parse_variant(const std::string& name) {
  if (name == "full") return Variant::Full;
  if (name == "no-regulation") return Variant::NoRegulation;
  if (name == "no-fasa") return Variant::NoFasa;
  if (name == "dfd") return Variant::Dfd;
  if (name == "sdsm") return Variant::Sdsm;
  if (name == "sotp") return Variant::Sotp;
  throw ConfigError("variant", "unknown variant '" + name +
                               "' (expected full|no-regulation|no-fasa|dfd|sdsm|sotp)");
}

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::Full: return "full";
    case Variant::NoRegulation: return "no-regulation";
    case Variant::NoFasa: return "no-fasa";
    case Variant::Dfd: return "dfd";
    case Variant::Sdsm: return "sdsm";
    case Variant::Sotp: return "sotp";
  }
  return "full";
}

bool variant_trainable(Variant v) {
  return v != Variant::Sdsm && v != Variant::Sotp;
}

void TrainConfig::validate() const {
  if (n_iter < 1) throw ConfigError("train.iterations", "must be >= 1");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("train.gamma", "must lie in [0,1)");
  if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError("train.tau", "must lie in (0,1]");
  if (!(beta >= 0.0 && beta <= 1.0)) throw ConfigError("train.beta", "must lie in [0,1]");
  if (sigma < 0.0) throw ConfigError("train.sigma", "must be >= 0");
  if (!(noise_clip > 0.0)) throw ConfigError("train.noise_clip", "must be > 0");
  if (minibatch < 1) throw ConfigError("train.minibatch", "must be >= 1");
  if (!(lr_actor >= 0.0) || !(lr_critic >= 0.0))
    throw ConfigError("train.lr", "learning rates must be >= 0");
  if (!(spsa_a0 > 0.0) || !(spsa_c0 > 0.0))
    throw ConfigError("train.spsa", "a0 and c0 must be > 0");
  if (buffer_capacity < 1) throw ConfigError("train.buffer_capacity", "must be >= 1");
  if (updates_per_iteration < 1)
    throw ConfigError("train.updates_per_iteration", "must be >= 1");
  if (convergence_window < 2) throw ConfigError("train.convergence_window", "must be >= 2");
  if (!(convergence_tol > 0.0)) throw ConfigError("train.convergence_tol", "must be > 0");
  if (!(score_cap > 0.0 && score_cap <= 1.0))
    throw ConfigError("train.score_cap", "must lie in (0,1]");
  if (hidden.empty()) throw ConfigError("train.hidden", "need at least one hidden layer");
  for (int h : hidden)
    if (h < 1) throw ConfigError("train.hidden", "layer sizes must be positive");
  for (int h : regulator_hidden)
    if (h < 1) throw ConfigError("train.regulator_hidden", "layer sizes must be positive");
  if (!(reward_scale > 0.0)) throw ConfigError("train.reward_scale", "must be > 0");
}

namespace {

const json* find(const json& j, const char* key) {
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

double num_or(const json& j, const char* key, double fallback, const std::string& path) {
  const json* v = find(j, key);
  if (!v) return fallback;
  if (!v->is_number()) throw ConfigError(path + key, "must be a number");
  return v->get<double>();
}

int int_or(const json& j, const char* key, int fallback, const std::string& path) {
  const json* v = find(j, key);
  if (!v) return fallback;
  if (!v->is_number_integer()) throw ConfigError(path + key, "must be an integer");
  return v->get<int>();
}

std::uint64_t u64_or(const json& j, const char* key, std::uint64_t fallback,
                     const std::string& path) {
  const json* v = find(j, key);
  if (!v) return fallback;
  if (!v->is_number_integer()) throw ConfigError(path + key, "must be an integer");
  return v->get<std::uint64_t>();
}

std::vector<double> expand_rates(const json& demand, int M, int N, const std::string& path) {
  const json* rates = find(demand, "rates");
  if (!rates) throw ConfigError(path + "rates", "missing");

  const size_t cells = static_cast<size_t>(M) * N * N;
  std::vector<double> per_op(M, 0.0);
  std::vector<double> full;
  if (rates->is_number()) {
    std::fill(per_op.begin(), per_op.end(), rates->get<double>());
  } else if (rates->is_array() && rates->size() == cells && !rates->empty() &&
             (*rates)[0].is_number() && cells != static_cast<size_t>(M)) {
    // resolved flat tensor (round-tripped snapshot)
    for (const auto& v : *rates) full.push_back(v.get<double>());
    return full;
  } else if (rates->is_array() && rates->size() == static_cast<size_t>(M) &&
             (*rates)[0].is_number()) {
    for (int m = 0; m < M; ++m) per_op[m] = (*rates)[m].get<double>();
  } else if (rates->is_array() && rates->size() == static_cast<size_t>(M)) {
    // full [M][N][N] tensor
    full.reserve(static_cast<size_t>(M) * N * N);
    for (int m = 0; m < M; ++m) {
      const json& plane = (*rates)[m];
      if (!plane.is_array() || plane.size() != static_cast<size_t>(N))
        throw ConfigError(path + "rates", "tensor must be [M][N][N]");
      for (int i = 0; i < N; ++i) {
        const json& row = plane[i];
        if (!row.is_array() || row.size() != static_cast<size_t>(N))
          throw ConfigError(path + "rates", "tensor must be [M][N][N]");
        for (int n = 0; n < N; ++n) full.push_back(row[n].get<double>());
      }
    }
    return full;
  } else {
    throw ConfigError(path + "rates", "must be a number, per-operator array, or tensor");
  }

  // per-operator city totals shaped by origin/destination weights
  std::vector<double> ow(N, 1.0), dw(N, 1.0);
  if (const json* w = find(demand, "origin_weights")) {
    if (!w->is_array() || w->size() != static_cast<size_t>(N))
      throw ConfigError(path + "origin_weights", "must have N entries");
    for (int i = 0; i < N; ++i) ow[i] = (*w)[i].get<double>();
  }
  if (const json* w = find(demand, "dest_weights")) {
    if (!w->is_array() || w->size() != static_cast<size_t>(N))
      throw ConfigError(path + "dest_weights", "must have N entries");
    for (int i = 0; i < N; ++i) dw[i] = (*w)[i].get<double>();
  }
  double ow_sum = 0.0, dw_sum = 0.0;
  for (double v : ow) ow_sum += v;
  for (double v : dw) dw_sum += v;
  if (ow_sum <= 0.0) throw ConfigError(path + "origin_weights", "must sum to > 0");
  if (dw_sum <= 0.0) throw ConfigError(path + "dest_weights", "must sum to > 0");

  full.resize(static_cast<size_t>(M) * N * N);
  for (int m = 0; m < M; ++m)
    for (int i = 0; i < N; ++i)
      for (int n = 0; n < N; ++n)
        full[(static_cast<size_t>(m) * N + i) * N + n] =
            per_op[m] * (ow[i] / ow_sum) * (dw[n] / dw_sum);
  return full;
}

std::vector<double> expand_durations(const json& demand, int N, const std::string& path) {
  std::vector<double> out(static_cast<size_t>(N) * N, 600.0);  // 10 min default
  if (const json* flat = find(demand, "duration_s")) {
    // resolved flat matrix (round-tripped snapshot)
    if (!flat->is_array() || flat->size() != out.size())
      throw ConfigError(path + "duration_s", "must have N*N entries");
    for (size_t k = 0; k < out.size(); ++k) out[k] = (*flat)[k].get<double>();
    return out;
  }
  const json* dur = find(demand, "duration_minutes");
  if (!dur) return out;
  if (dur->is_number()) {
    std::fill(out.begin(), out.end(), dur->get<double>() * 60.0);
  } else if (dur->is_array() && dur->size() == static_cast<size_t>(N)) {
    for (int i = 0; i < N; ++i) {
      const json& row = (*dur)[i];
      if (!row.is_array() || row.size() != static_cast<size_t>(N))
        throw ConfigError(path + "duration_minutes", "matrix must be [N][N]");
      for (int j = 0; j < N; ++j)
        out[static_cast<size_t>(i) * N + j] = row[j].get<double>() * 60.0;
    }
  } else {
    throw ConfigError(path + "duration_minutes", "must be a number or [N][N] matrix");
  }
  for (double v : out)
    if (!(v >= 0.0)) throw ConfigError(path + "duration_minutes", "must be >= 0");
  return out;
}

}  // namespace

RunConfig RunConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
  }

  RunConfig cfg;
  cfg.seed = u64_or(j, "seed", 0, "");
  if (const json* v = find(j, "variant")) cfg.variant = parse_variant(v->get<std::string>());
  if (const json* v = find(j, "out")) cfg.out_dir = v->get<std::string>();

  const json sim = j.contains("sim") ? j.at("sim") : json::object();
  cfg.slots_per_day = int_or(sim, "slots_per_day", 24, "sim.");
  cfg.rebalance_every = int_or(sim, "rebalance_every", 12, "sim.");
  cfg.horizon = int_or(sim, "horizon", 3, "sim.");
  cfg.unlock_fee = num_or(sim, "unlock_fee", 1.00, "sim.");
  cfg.per_minute_fee = num_or(sim, "per_minute_fee", 0.39, "sim.");
  cfg.truck_cost_per_km = num_or(sim, "truck_cost_per_km", 2.422, "sim.");
  cfg.truck_capacity = int_or(sim, "truck_capacity", 20, "sim.");
  cfg.goals.q_sat = num_or(sim, "q_sat", 0.8, "sim.");
  cfg.goals.q_equ = num_or(sim, "q_equ", -10.0, "sim.");
  try {
    cfg.goals.validate();
  } catch (const std::exception& e) {
    throw ConfigError("sim.q_sat/q_equ", e.what());
  }
  if (const json* fleets = find(sim, "fleets")) {
    if (!fleets->is_object()) throw ConfigError("sim.fleets", "must map labels to sizes");
    for (auto it = fleets->begin(); it != fleets->end(); ++it) {
      if (!it.value().is_number_integer() || it.value().get<int>() <= 0)
        throw ConfigError("sim.fleets." + it.key(), "fleet size must be a positive integer");
      cfg.fleets[it.key()] = it.value().get<int>();
    }
  }
  if (const json* prio = find(sim, "priority_regions")) {
    if (!prio->is_array()) throw ConfigError("sim.priority_regions", "must be an array");
    for (const auto& v : *prio) cfg.priority_regions.push_back(v.get<int>());
  }
  cfg.sotp_fraction = num_or(sim, "sotp_fraction", 0.5, "sim.");
  if (!(cfg.sotp_fraction >= 0.0 && cfg.sotp_fraction <= 1.0))
    throw ConfigError("sim.sotp_fraction", "must lie in [0,1]");

  const json* demand = find(j, "demand");
  if (!demand) throw ConfigError("demand", "missing (need synthetic spec or CSV paths)");
  const json* synth = find(*demand, "synthetic");
  const json* trips = find(*demand, "trips_csv");
  if ((synth != nullptr) == (trips != nullptr))
    throw ConfigError("demand", "need exactly one demand source: synthetic or trips_csv");

  if (synth) {
    cfg.use_synthetic = true;
    const std::string path = "demand.synthetic.";
    const json* ops = find(*synth, "operators");
    if (!ops || !ops->is_array() || ops->empty())
      throw ConfigError(path + "operators", "must be a non-empty array of labels");
    for (const auto& v : *ops) cfg.synth.operators.push_back(v.get<std::string>());
    cfg.synth.num_regions = int_or(*synth, "regions", 0, path);
    if (cfg.synth.num_regions < 1) throw ConfigError(path + "regions", "must be >= 1");
    cfg.synth.days = int_or(*synth, "days", 0, path);
    if (cfg.synth.days < 1) throw ConfigError(path + "days", "must be >= 1");
    cfg.synth.slots_per_day = cfg.slots_per_day;
    cfg.synth.seed = u64_or(*synth, "seed", cfg.seed, path);
    const int M = static_cast<int>(cfg.synth.operators.size());
    const int N = cfg.synth.num_regions;
    cfg.synth.rates = expand_rates(*synth, M, N, path);
    if (const json* prof = find(*synth, "profile")) {
      if (!prof->is_array() || prof->size() != static_cast<size_t>(cfg.slots_per_day))
        throw ConfigError(path + "profile", "must have slots_per_day entries");
      for (const auto& v : *prof) cfg.synth.profile.push_back(v.get<double>());
    } else {
      cfg.synth.profile.assign(cfg.slots_per_day, 1.0);
    }
    cfg.synth.duration_s = expand_durations(*synth, N, path);
    cfg.synth_eval_days = int_or(*synth, "eval_days", 0, path);
    cfg.synth_eval_seed = u64_or(*synth, "eval_seed", cfg.synth.seed + 1, path);
    cfg.synth_grid_cols = int_or(*synth, "grid_cols", 0, path);
    cfg.synth_cell_km = num_or(*synth, "cell_km", 1.5, path);
    try {
      cfg.synth.validate();
    } catch (const std::exception& e) {
      throw ConfigError("demand.synthetic", e.what());
    }
  } else {
    cfg.trips_csv = trips->get<std::string>();
    const json* regions = find(*demand, "regions_csv");
    if (!regions) throw ConfigError("demand.regions_csv", "missing (required with trips_csv)");
    cfg.regions_csv = regions->get<std::string>();
    cfg.train_days = int_or(*demand, "train_days", 0, "demand.");
  }

  const json train = j.contains("train") ? j.at("train") : json::object();
  cfg.train.n_iter = int_or(train, "iterations", cfg.train.n_iter, "train.");
  cfg.train.gamma = num_or(train, "gamma", cfg.train.gamma, "train.");
  cfg.train.tau = num_or(train, "tau", cfg.train.tau, "train.");
  cfg.train.beta = num_or(train, "beta", cfg.train.beta, "train.");
  cfg.train.sigma = num_or(train, "sigma", cfg.train.sigma, "train.");
  cfg.train.noise_clip = num_or(train, "noise_clip", cfg.train.noise_clip, "train.");
  cfg.train.minibatch = int_or(train, "minibatch", cfg.train.minibatch, "train.");
  cfg.train.lr_actor = num_or(train, "lr_actor", cfg.train.lr_actor, "train.");
  cfg.train.lr_critic = num_or(train, "lr_critic", cfg.train.lr_critic, "train.");
  cfg.train.spsa_a0 = num_or(train, "spsa_a0", cfg.train.spsa_a0, "train.");
  cfg.train.spsa_c0 = num_or(train, "spsa_c0", cfg.train.spsa_c0, "train.");
  cfg.train.buffer_capacity =
      int_or(train, "buffer_capacity", cfg.train.buffer_capacity, "train.");
  cfg.train.updates_per_iteration =
      int_or(train, "updates_per_iteration", cfg.train.updates_per_iteration, "train.");
  cfg.train.convergence_window =
      int_or(train, "convergence_window", cfg.train.convergence_window, "train.");
  cfg.train.convergence_tol =
      num_or(train, "convergence_tol", cfg.train.convergence_tol, "train.");
  cfg.train.score_cap = num_or(train, "score_cap", cfg.train.score_cap, "train.");
  if (const json* hidden = find(train, "hidden")) {
    if (!hidden->is_array()) throw ConfigError("train.hidden", "must be an array");
    cfg.train.hidden.clear();
    for (const auto& v : *hidden) cfg.train.hidden.push_back(v.get<int>());
  }
  if (const json* hidden = find(train, "regulator_hidden")) {
    if (!hidden->is_array())
      throw ConfigError("train.regulator_hidden", "must be an array");
    cfg.train.regulator_hidden.clear();
    for (const auto& v : *hidden) cfg.train.regulator_hidden.push_back(v.get<int>());
  }
  cfg.train.reward_scale = num_or(train, "reward_scale", cfg.train.reward_scale, "train.");
  cfg.train.validate();

  if (cfg.slots_per_day < 1 || 1440 % cfg.slots_per_day != 0)
    throw ConfigError("sim.slots_per_day", "must divide 1440 minutes");
  if (cfg.rebalance_every < 1 || cfg.slots_per_day % cfg.rebalance_every != 0)
    throw ConfigError("sim.rebalance_every", "must divide slots_per_day");
  if (cfg.horizon < 1) throw ConfigError("sim.horizon", "must be >= 1");
  if (cfg.fleets.empty()) throw ConfigError("sim.fleets", "missing");
  return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string RunConfig::to_json_text() const {
  json j;
  j["seed"] = seed;
  j["variant"] = variant_name(variant);
  j["out"] = out_dir;

  json sim;
  sim["slots_per_day"] = slots_per_day;
  sim["rebalance_every"] = rebalance_every;
  sim["horizon"] = horizon;
  sim["unlock_fee"] = unlock_fee;
  sim["per_minute_fee"] = per_minute_fee;
  sim["truck_cost_per_km"] = truck_cost_per_km;
  sim["truck_capacity"] = truck_capacity;
  sim["q_sat"] = goals.q_sat;
  sim["q_equ"] = goals.q_equ;
  sim["fleets"] = fleets;
  sim["priority_regions"] = priority_regions;
  sim["sotp_fraction"] = sotp_fraction;
  j["sim"] = sim;

  json demand;
  if (use_synthetic) {
    json s;
    s["operators"] = synth.operators;
    s["regions"] = synth.num_regions;
    s["days"] = synth.days;
    s["seed"] = synth.seed;
    s["rates"] = synth.rates;          // resolved tensor, flat
    s["profile"] = synth.profile;
    s["duration_s"] = synth.duration_s;
    s["eval_days"] = synth_eval_days;
    s["eval_seed"] = synth_eval_seed;
    s["grid_cols"] = synth_grid_cols;
    s["cell_km"] = synth_cell_km;
    demand["synthetic"] = s;
  } else {
    demand["trips_csv"] = trips_csv;
    demand["regions_csv"] = regions_csv;
    demand["train_days"] = train_days;
  }
  j["demand"] = demand;

  json t;
  t["iterations"] = train.n_iter;
  t["gamma"] = train.gamma;
  t["tau"] = train.tau;
  t["beta"] = train.beta;
  t["sigma"] = train.sigma;
  t["noise_clip"] = train.noise_clip;
  t["minibatch"] = train.minibatch;
  t["lr_actor"] = train.lr_actor;
  t["lr_critic"] = train.lr_critic;
  t["spsa_a0"] = train.spsa_a0;
  t["spsa_c0"] = train.spsa_c0;
  t["buffer_capacity"] = train.buffer_capacity;
  t["updates_per_iteration"] = train.updates_per_iteration;
  t["convergence_window"] = train.convergence_window;
  t["convergence_tol"] = train.convergence_tol;
  t["score_cap"] = train.score_cap;
  t["hidden"] = train.hidden;
  t["regulator_hidden"] = train.regulator_hidden;
  t["reward_scale"] = train.reward_scale;
  j["train"] = t;
  return j.dump(2);
}

std::uint64_t RunConfig::hash() const {
  // FNV-1a over the canonical snapshot; identifies checkpoint/config pairs.
  const std::string text = to_json_text();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

void RunConfig::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write config snapshot: " + path);
  out << to_json_text() << "\n";
}

Experiment Experiment::build(const RunConfig& cfg) {
  Experiment exp;
  exp.run = cfg;

  if (cfg.use_synthetic) {
    const int N = cfg.synth.num_regions;
    int cols = cfg.synth_grid_cols;
    if (cols < 1) {
      cols = 1;
      while (cols * cols < N) ++cols;
    }
    exp.regions = RegionMap::grid(N, cols, cfg.synth_cell_km);
    exp.train_data = synth_demand(cfg.synth);
    if (cfg.synth_eval_days > 0) {
      SynthConfig eval_cfg = cfg.synth;
      eval_cfg.days = cfg.synth_eval_days;
      eval_cfg.seed = cfg.synth_eval_seed;
      exp.eval_data = synth_demand(eval_cfg, exp.train_data.first_day + exp.train_data.num_days);
    } else {
      exp.eval_data = exp.train_data;
    }
    exp.eval_first_day = 0;
    exp.eval_num_days = exp.eval_data.num_days;
  } else {
    exp.regions = RegionMap::from_csv_file(cfg.regions_csv);
    const TripParseResult parsed = parse_trips_file(cfg.trips_csv);
    if (parsed.trips.empty()) throw ConfigError("demand.trips_csv", "no usable trips");
    const DemandDataset all = build_demand(parsed.trips, exp.regions, cfg.slots_per_day);
    if (cfg.train_days > 0) {
      if (cfg.train_days >= all.num_days)
        throw ConfigError("demand.train_days", "must leave at least one evaluation day");
      exp.train_data = build_demand(parsed.trips, exp.regions, cfg.slots_per_day, nullptr,
                                    all.first_day, cfg.train_days);
      exp.eval_data = build_demand(parsed.trips, exp.regions, cfg.slots_per_day, nullptr,
                                   all.first_day + cfg.train_days,
                                   all.num_days - cfg.train_days);
    } else {
      exp.train_data = all;
      exp.eval_data = all;
    }
    exp.eval_first_day = 0;
    exp.eval_num_days = exp.eval_data.num_days;
  }

  exp.sim.num_regions = exp.regions.size();
  exp.sim.num_operators = exp.train_data.num_operators;
  exp.sim.fleet_sizes.clear();
  for (const std::string& label : exp.train_data.operators) {
    auto it = cfg.fleets.find(label);
    if (it == cfg.fleets.end())
      throw ConfigError("sim.fleets." + label, "no fleet size for this operator");
    exp.sim.fleet_sizes.push_back(it->second);
  }
  exp.sim.slots_per_day = cfg.slots_per_day;
  exp.sim.rebalance_every = cfg.rebalance_every;
  exp.sim.horizon = cfg.horizon;
  exp.sim.unlock_fee = cfg.unlock_fee;
  exp.sim.per_minute_fee = cfg.per_minute_fee;
  exp.sim.truck_cost_per_km = cfg.truck_cost_per_km;
  exp.sim.truck_capacity = cfg.truck_capacity;
  exp.sim.distance_km = exp.regions.distance_matrix_km();
  exp.sim.goals = cfg.goals;
  exp.sim.validate();

  for (int p : cfg.priority_regions)
    if (p < 0 || p >= exp.sim.num_regions)
      throw ConfigError("sim.priority_regions", "region id out of range");

  exp.predictor = DemandPredictor(exp.train_data);

  const int M = exp.sim.num_operators;
  const int N = exp.sim.num_regions;
  exp.demand_shares.assign(M, std::vector<double>(N, 0.0));
  for (int s = 0; s < exp.train_data.num_slots(); ++s) {
    const DemandTensor& t = exp.train_data.tensor(s);
    for (int m = 0; m < M; ++m)
      for (int i = 0; i < N; ++i) exp.demand_shares[m][i] += t.origin_total(m, i);
  }
  for (int m = 0; m < M; ++m) {
    double total = 0.0;
    for (double v : exp.demand_shares[m]) total += v;
    if (total > 0.0)
      for (double& v : exp.demand_shares[m]) v /= total;
    else
      std::fill(exp.demand_shares[m].begin(), exp.demand_shares[m].end(), 1.0 / N);
  }
  return exp;
}

}  // namespace realism
