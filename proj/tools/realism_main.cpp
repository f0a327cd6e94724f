// Command-line front end: train, evaluate, shapley, synth, report.
// Exit codes: 0 success, 2 config/input error, 3 artifact mismatch, 1 internal.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include "CLI11.hpp"
#include "realism/config.hpp"
#include "realism/csv.hpp"
#include "realism/regulator.hpp"
#include "realism/trainer.hpp"

namespace fs = std::filesystem;
using namespace realism;

namespace {

struct CliOptions {
  std::string config_path;
  std::string checkpoint_dir;
  std::string out_dir;
  std::string variant;
  std::string state_csv;
  std::string demand_csv;
  std::vector<std::string> report_inputs;
  bool seed_set = false;
  std::uint64_t seed = 0;
};

RunConfig load_run_config(const CliOptions& opt, const std::string& path) {
  RunConfig cfg = RunConfig::load(path);
  if (opt.seed_set) cfg.seed = opt.seed;
  if (!opt.variant.empty()) cfg.variant = parse_variant(opt.variant);
  if (!opt.out_dir.empty()) cfg.out_dir = opt.out_dir;
  return cfg;
}

void write_eval_outputs(const std::string& dir, std::uint64_t hash, const EvalSummary& s,
                        const std::vector<std::string>& operators) {
  fs::create_directories(dir);
  write_metrics_csv(dir + "/metrics_" + s.variant + ".csv", hash, {s}, operators);
  write_daily_csv(dir + "/daily_" + s.variant + ".csv", hash, s, operators);
  write_regulator_report(dir + "/regulator_" + s.variant + ".csv", hash, s.detail.records,
                         operators);
  write_episode_trace(dir + "/trace_" + s.variant + ".csv", hash, s.detail.outcomes,
                      operators);
}

int cmd_train(const CliOptions& opt) {
  const RunConfig cfg = load_run_config(opt, opt.config_path);
  if (cfg.out_dir.empty())
    throw ConfigError("out", "missing output directory (config 'out' or --out)");
  if (!variant_trainable(cfg.variant))
    throw ConfigError("variant", "variant '" + variant_name(cfg.variant) +
                                     "' is a baseline policy; use the evaluate command");

  const Experiment exp = Experiment::build(cfg);
  Trainer trainer(exp, cfg.variant);
  const std::vector<IterationReport> reports = trainer.train();

  fs::create_directories(cfg.out_dir);
  cfg.save(cfg.out_dir + "/config.json");
  write_iterations_csv(cfg.out_dir + "/iterations.csv", cfg.hash(), reports,
                       exp.train_data.operators);
  save_checkpoint(cfg.out_dir + "/checkpoint.json", trainer.checkpoint());
  std::cout << "trained " << reports.size() << " iterations; checkpoint written to "
            << cfg.out_dir << "\n";
  return 0;
}

int cmd_evaluate(const CliOptions& opt) {
  RunConfig cfg;
  Checkpoint ckpt;
  bool have_ckpt = false;

  if (!opt.checkpoint_dir.empty()) {
    const std::string cfg_path = opt.checkpoint_dir + "/config.json";
    const std::string ckpt_path = opt.checkpoint_dir + "/checkpoint.json";
    if (!fs::exists(cfg_path) || !fs::exists(ckpt_path)) {
      std::cerr << "error: no checkpoint at " << opt.checkpoint_dir << "\n";
      return 3;
    }
    cfg = RunConfig::load(cfg_path);
    if (opt.seed_set) cfg.seed = opt.seed;
    try {
      ckpt = load_checkpoint(ckpt_path);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 3;
    }
    if (ckpt.config_hash != cfg.hash()) {
      std::cerr << "error: checkpoint hash does not match config.json\n";
      return 3;
    }
    have_ckpt = true;
  } else if (!opt.config_path.empty()) {
    cfg = load_run_config(opt, opt.config_path);
  } else {
    throw ConfigError("checkpoint", "need --checkpoint or --config");
  }

  const Variant variant =
      opt.variant.empty() ? (have_ckpt ? parse_variant(ckpt.variant) : cfg.variant)
                          : parse_variant(opt.variant);
  if (!have_ckpt && variant_trainable(variant))
    throw ConfigError("variant",
                      "variant '" + variant_name(variant) + "' needs a trained checkpoint");

  const Experiment exp = Experiment::build(cfg);
  Trainer trainer(exp, have_ckpt ? parse_variant(ckpt.variant) : variant);
  if (have_ckpt) trainer.restore(ckpt);

  const EvalSummary summary = trainer.evaluate(variant);
  const std::string out =
      !opt.out_dir.empty()
          ? opt.out_dir
          : (!opt.checkpoint_dir.empty() ? opt.checkpoint_dir : cfg.out_dir);
  if (out.empty()) throw ConfigError("out", "missing output directory");
  write_eval_outputs(out, cfg.hash(), summary, exp.train_data.operators);

  std::cout << "variant " << summary.variant << ": satisfaction "
            << fmt_double(summary.satisfaction_pct) << "%, equity "
            << fmt_double(summary.equity) << ", net revenue";
  for (size_t m = 0; m < summary.net_revenue.size(); ++m)
    std::cout << " " << exp.train_data.operators[m] << "="
              << fmt_double(summary.net_revenue[m]);
  std::cout << "\n";
  return 0;
}

// Inputs: per-(operator, region) vehicle counts and demand totals.
int cmd_shapley(const CliOptions& opt) {
  const CsvTable state = read_csv_file(opt.state_csv);
  const CsvTable demand = read_csv_file(opt.demand_csv);
  const int s_op = state.column("operator"), s_reg = state.column("region_id"),
            s_cnt = state.column("vehicles");
  const int d_op = demand.column("operator"), d_reg = demand.column("region_id"),
            d_cnt = demand.column("demand");
  if (s_op < 0 || s_reg < 0 || s_cnt < 0)
    throw ConfigError("state", "state CSV needs columns operator, region_id, vehicles");
  if (d_op < 0 || d_reg < 0 || d_cnt < 0)
    throw ConfigError("demand", "demand CSV needs columns operator, region_id, demand");

  std::set<std::string> labels;
  int max_region = -1;
  for (const auto& row : state.rows) {
    labels.insert(row[s_op]);
    max_region = std::max(max_region, std::stoi(row[s_reg]));
  }
  for (const auto& row : demand.rows) {
    labels.insert(row[d_op]);
    max_region = std::max(max_region, std::stoi(row[d_reg]));
  }
  if (labels.empty() || max_region < 0)
    throw ConfigError("state", "no rows in snapshot inputs");
  const std::vector<std::string> operators(labels.begin(), labels.end());
  const int M = static_cast<int>(operators.size());
  const int N = max_region + 1;
  auto op_index = [&](const std::string& label) {
    return static_cast<int>(std::lower_bound(operators.begin(), operators.end(), label) -
                            operators.begin());
  };

  std::vector<double> supply_mi(static_cast<size_t>(M) * N, 0.0);
  std::vector<double> demand_mi(static_cast<size_t>(M) * N, 0.0);
  for (const auto& row : state.rows)
    supply_mi[static_cast<size_t>(op_index(row[s_op])) * N + std::stoi(row[s_reg])] +=
        std::stod(row[s_cnt]);
  for (const auto& row : demand.rows)
    demand_mi[static_cast<size_t>(op_index(row[d_op])) * N + std::stoi(row[d_reg])] +=
        std::stod(row[d_cnt]);

  const ShapleyAttribution phi = shapley_attribution(demand_mi, supply_mi, M, N);
  const std::uint32_t full = (1u << M) - 1;
  const CoalitionValue grand = coalition_value(full, demand_mi, supply_mi, M, N);
  double sum_sat = 0.0, sum_equ = 0.0;
  std::cout << "operator,phi_sat,phi_equ\n";
  for (int m = 0; m < M; ++m) {
    std::cout << operators[m] << "," << fmt_double(phi.phi_sat[m]) << ","
              << fmt_double(phi.phi_equ[m]) << "\n";
    sum_sat += phi.phi_sat[m];
    sum_equ += phi.phi_equ[m];
  }
  std::cout << "efficiency_residual_sat," << fmt_double(std::fabs(sum_sat - grand.c_sat))
            << "\n";
  std::cout << "efficiency_residual_equ," << fmt_double(std::fabs(sum_equ - grand.c_equ))
            << "\n";
  return 0;
}

int cmd_synth(const CliOptions& opt) {
  const RunConfig cfg = load_run_config(opt, opt.config_path);
  if (!cfg.use_synthetic)
    throw ConfigError("demand.synthetic", "synth command needs a synthetic demand spec");
  const Experiment exp = Experiment::build(cfg);
  const std::string out = cfg.out_dir.empty() ? "." : cfg.out_dir;
  fs::create_directories(out);

  std::ofstream regions(out + "/regions.csv");
  exp.regions.to_csv(regions);
  std::ofstream trips(out + "/trips.csv");
  serialize_trips(trips, dataset_to_trips(exp.train_data, exp.regions));
  std::cout << "wrote " << exp.train_data.total_demand() << " trips over "
            << exp.train_data.num_days << " days to " << out << "\n";
  return 0;
}

int cmd_report(const CliOptions& opt) {
  if (opt.report_inputs.empty())
    throw ConfigError("inputs", "report needs at least one iterations CSV");
  std::ofstream out(opt.out_dir.empty() ? "report.csv" : opt.out_dir);
  if (!out) throw std::runtime_error("cannot open report output");
  bool wrote_header = false;
  for (const auto& path : opt.report_inputs) {
    const CsvTable table = read_csv_file(path);
    if (!wrote_header) {
      out << "run";
      for (const auto& col : table.header) out << ',' << col;
      out << '\n';
      wrote_header = true;
    }
    const std::string run = fs::path(path).parent_path().filename().string().empty()
                                ? fs::path(path).stem().string()
                                : fs::path(path).parent_path().filename().string();
    for (const auto& row : table.rows) {
      out << run;
      for (const auto& cell : row) out << ',' << cell;
      out << '\n';
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"regulatory multi-operator micromobility fleet simulator"};
  app.require_subcommand(1);
  CliOptions opt;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", opt.seed, "seed override")->each([&](const std::string&) {
      opt.seed_set = true;
    });
    cmd->add_option("--variant", opt.variant,
                    "full|no-regulation|no-fasa|dfd|sdsm|sotp");
    cmd->add_option("--out", opt.out_dir, "output directory");
  };

  CLI::App* train = app.add_subcommand("train", "run the alternating training loop");
  train->add_option("--config", opt.config_path, "run config JSON")->required();
  add_common(train);

  CLI::App* evaluate = app.add_subcommand("evaluate", "roll out policies and write reports");
  evaluate->add_option("--checkpoint", opt.checkpoint_dir, "checkpoint directory");
  evaluate->add_option("--config", opt.config_path, "config (baseline variants only)");
  add_common(evaluate);

  CLI::App* shapley = app.add_subcommand("shapley", "per-operator contributions");
  shapley->add_option("--state", opt.state_csv, "per-(operator,region) vehicles CSV")
      ->required();
  shapley->add_option("--demand", opt.demand_csv, "per-(operator,region) demand CSV")
      ->required();

  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic trip dataset");
  synth->add_option("--config", opt.config_path, "run config JSON")->required();
  add_common(synth);

  CLI::App* report = app.add_subcommand("report", "merge iteration CSVs");
  report->add_option("--out", opt.out_dir, "merged CSV path");
  report->add_option("inputs", opt.report_inputs, "iteration CSVs");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) return cmd_train(opt);
    if (evaluate->parsed()) return cmd_evaluate(opt);
    if (shapley->parsed()) return cmd_shapley(opt);
    if (synth->parsed()) return cmd_synth(opt);
    if (report->parsed()) return cmd_report(opt);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
