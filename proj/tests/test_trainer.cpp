#include "doctest.h"
#include "realism/trainer.hpp"

#include <cstdlib>
#include <filesystem>
#include <set>

using namespace realism;

TEST_SUITE_BEGIN("trainer");

namespace {

RunConfig tiny_cfg(int iterations = 2, const std::string& variant = "full") {
  const std::string text = std::string(R"({
    "seed": 11,
    "variant": ")") + variant + R"(",
    "out": "",
    "sim": {"slots_per_day": 8, "rebalance_every": 4, "horizon": 2,
            "q_sat": 0.7, "q_equ": -8.0,
            "fleets": {"a": 14, "b": 10}, "priority_regions": [2]},
    "demand": {"synthetic": {"operators": ["a", "b"], "regions": 3, "days": 2,
               "seed": 3, "rates": [8.0, 6.0],
               "origin_weights": [3, 2, 1], "dest_weights": [1, 2, 3],
               "profile": [0.5, 1, 1.5, 2, 2, 1.5, 1, 0.5],
               "duration_minutes": 8, "eval_days": 1, "eval_seed": 4}},
    "train": {"iterations": )" + std::to_string(iterations) + R"(,
              "minibatch": 8, "hidden": [16, 16],
              "updates_per_iteration": 1, "buffer_capacity": 64}
  })";
  return RunConfig::from_json_text(text);
}

bool reports_equal(const std::vector<IterationReport>& a,
                   const std::vector<IterationReport>& b) {
  if (a.size() != b.size()) return false;
  for (size_t k = 0; k < a.size(); ++k) {
    if (a[k].net_revenue != b[k].net_revenue) return false;
    if (a[k].c_sat != b[k].c_sat || a[k].c_equ != b[k].c_equ) return false;
    if (a[k].fairness != b[k].fairness) return false;
    if (a[k].critic_loss != b[k].critic_loss) return false;
    if (a[k].delta_loss != b[k].delta_loss) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("replay buffer is a FIFO ring with unique sampling") {
  ReplayBuffer buffer(4);
  for (int k = 0; k < 6; ++k) {
    Transition t;
    t.reward = {static_cast<double>(k)};
    buffer.push(std::move(t));
  }
  CHECK(buffer.size() == 4);
  // the two oldest entries were evicted
  CHECK(buffer.at(0).reward[0] == doctest::Approx(2.0));
  CHECK(buffer.at(3).reward[0] == doctest::Approx(5.0));

  Rng rng(1);
  const std::vector<size_t> idx = buffer.sample_indices(4, rng);
  CHECK(std::set<size_t>(idx.begin(), idx.end()).size() == 4);
  CHECK_THROWS_AS(buffer.sample_indices(5, rng), std::invalid_argument);
}

TEST_CASE("convergence check") {
  auto constant_reports = [](int n, double growth) {
    std::vector<IterationReport> reports;
    double value = 100.0;
    for (int k = 0; k < n; ++k) {
      IterationReport r;
      r.iteration = k;
      r.mean_net_revenue = value;
      r.c_sat = 0.8;
      r.c_equ = -5.0;
      reports.push_back(r);
      value *= 1.0 + growth;
    }
    return reports;
  };
  CHECK(convergence_check(constant_reports(15, 0.0), 10, 0.01));
  CHECK_FALSE(convergence_check(constant_reports(15, 0.05), 10, 0.01));
  CHECK_FALSE(convergence_check(constant_reports(9, 0.0), 10, 0.01));  // short window
}

TEST_CASE("single iteration produces a single report") {
  const RunConfig cfg = tiny_cfg(1);
  const Experiment exp = Experiment::build(cfg);
  Trainer trainer(exp, cfg.variant);
  const auto reports = trainer.train();
  REQUIRE(reports.size() == 1);
  CHECK(reports[0].iteration == 0);
  CHECK(reports[0].net_revenue.size() == 2);
}

TEST_CASE("training is deterministic end to end") {
  const RunConfig cfg = tiny_cfg(3);
  const Experiment exp = Experiment::build(cfg);
  Trainer a(exp, cfg.variant);
  Trainer b(exp, cfg.variant);
  const auto ra = a.train();
  const auto rb = b.train();
  CHECK(reports_equal(ra, rb));

  const EvalSummary ea = a.evaluate(Variant::Full);
  const EvalSummary eb = b.evaluate(Variant::Full);
  CHECK(ea.net_revenue == eb.net_revenue);
  CHECK(ea.satisfaction_pct == eb.satisfaction_pct);
  CHECK(ea.equity == eb.equity);
}

TEST_CASE("thread cap does not change results") {
  const RunConfig cfg = tiny_cfg(2);
  const Experiment exp = Experiment::build(cfg);

  setenv("REALISM_THREADS", "1", 1);
  Trainer serial(exp, cfg.variant);
  const auto rs = serial.train();

  setenv("REALISM_THREADS", "4", 1);
  Trainer parallel(exp, cfg.variant);
  const auto rp = parallel.train();
  unsetenv("REALISM_THREADS");

  CHECK(reports_equal(rs, rp));
}

TEST_CASE("disabled regulation keeps scores out of rewards") {
  const RunConfig cfg = tiny_cfg(2, "no-regulation");
  const Experiment exp = Experiment::build(cfg);
  Trainer trainer(exp, cfg.variant);
  const auto reports = trainer.train();
  for (const auto& r : reports) {
    CHECK(r.fairness == doctest::Approx(0.0));
    CHECK(r.delta_loss == doctest::Approx(0.0));
  }
  const EvalSummary s = trainer.evaluate(Variant::NoRegulation);
  for (const auto& out : s.detail.outcomes) {
    for (size_t m = 0; m < out.score.size(); ++m) {
      CHECK(out.score[m] == 0.0);
      CHECK(out.reward[m] == out.net_revenue[m]);
    }
  }
}

TEST_CASE("buffer grows by one transition per rebalancing interval") {
  // 2 days x 8 slots, rebalancing every 4 slots: 4 transitions per episode
  const RunConfig cfg = tiny_cfg(1);
  const Experiment exp = Experiment::build(cfg);
  Trainer trainer(exp, cfg.variant);
  trainer.train();
  // indirect check via the episode structure: evaluate covers 1 day -> 2 steps
  const EvalSummary s = trainer.evaluate(Variant::Full);
  CHECK(s.detail.outcomes.size() == 2);
  CHECK(s.detail.records.size() == 2);
  // reward + score equals net revenue exactly on every interval
  for (const auto& out : s.detail.outcomes)
    for (size_t m = 0; m < out.reward.size(); ++m)
      CHECK(out.reward[m] + out.score[m] == out.net_revenue[m]);
}

TEST_CASE("small buffers skip agent updates with a warning") {
  RunConfig cfg = tiny_cfg(1);
  cfg.train.minibatch = 100;  // larger than one episode can provide
  const Experiment exp = Experiment::build(cfg);
  Trainer trainer(exp, cfg.variant);
  const auto reports = trainer.train();
  REQUIRE(reports.size() == 1);
  CHECK(reports[0].updates_skipped);
  CHECK(reports[0].critic_loss == doctest::Approx(0.0));
}

TEST_CASE("checkpoints round trip and reject mismatched configs") {
  namespace fs = std::filesystem;
  const RunConfig cfg = tiny_cfg(2);
  const Experiment exp = Experiment::build(cfg);
  Trainer trainer(exp, cfg.variant);
  trainer.train();

  const fs::path dir = fs::temp_directory_path() / "realism_ckpt_test";
  fs::create_directories(dir);
  const std::string path = (dir / "checkpoint.json").string();
  save_checkpoint(path, trainer.checkpoint());

  const Checkpoint loaded = load_checkpoint(path);
  CHECK(loaded.config_hash == cfg.hash());
  Trainer restored(exp, cfg.variant);
  restored.restore(loaded);
  const EvalSummary a = trainer.evaluate(Variant::Full);
  const EvalSummary b = restored.evaluate(Variant::Full);
  CHECK(a.net_revenue == b.net_revenue);
  CHECK(a.equity == b.equity);

  // a trainer built against a different config rejects the checkpoint
  RunConfig other_cfg = tiny_cfg(2);
  other_cfg.seed = 999;
  const Experiment other = Experiment::build(other_cfg);
  Trainer mismatched(other, other_cfg.variant);
  CHECK_THROWS_AS(mismatched.restore(loaded), std::runtime_error);
  fs::remove_all(dir);
}

TEST_CASE("baseline variants evaluate without training") {
  const RunConfig cfg = tiny_cfg(1);
  const Experiment exp = Experiment::build(cfg);
  Trainer trainer(exp, Variant::Full);

  const EvalSummary sdsm1 = trainer.evaluate(Variant::Sdsm);
  const EvalSummary sdsm2 = trainer.evaluate(Variant::Sdsm);
  CHECK(sdsm1.net_revenue == sdsm2.net_revenue);  // deterministic
  CHECK(sdsm1.equity == sdsm2.equity);

  const EvalSummary sotp = trainer.evaluate(Variant::Sotp);
  CHECK(sotp.variant == "sotp");
  for (const auto& out : sotp.detail.outcomes)
    for (double sc : out.score) CHECK(sc == 0.0);

  CHECK_THROWS_AS(Trainer(exp, Variant::Sdsm).train(), std::invalid_argument);
}

TEST_SUITE_END();
