#include "doctest.h"
#include "realism/regulator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace realism;

TEST_SUITE_BEGIN("regulator");

namespace {

// Order-based oracle: average marginal contribution over all M! orderings.
std::vector<double> shapley_by_permutations(const std::vector<double>& characteristic,
                                            int M) {
  std::vector<int> order(M);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> phi(M, 0.0);
  long long count = 0;
  do {
    std::uint32_t mask = 0;
    for (int m : order) {
      const std::uint32_t with = mask | (1u << m);
      phi[m] += characteristic[with] - characteristic[mask];
      mask = with;
    }
    ++count;
  } while (std::next_permutation(order.begin(), order.end()));
  for (double& v : phi) v /= static_cast<double>(count);
  return phi;
}

std::vector<double> random_game(int M, Rng& rng) {
  std::vector<double> v(1u << M);
  v[0] = 0.0;
  for (size_t mask = 1; mask < v.size(); ++mask) v[mask] = rng.uniform(-5.0, 5.0);
  return v;
}

}  // namespace

TEST_CASE("shapley hand example") {
  // v({1}) = 0.6, v({2}) = 0.2, v({1,2}) = 1.0
  const std::vector<double> v{0.0, 0.6, 0.2, 1.0};
  const std::vector<double> phi = shapley(v, 2);
  CHECK(phi[0] == doctest::Approx(0.7));
  CHECK(phi[1] == doctest::Approx(0.3));
}

TEST_CASE("shapley axioms on random games") {
  Rng rng(2024);
  for (int M = 2; M <= 4; ++M) {
    for (int trial = 0; trial < 300; ++trial) {
      const std::vector<double> v = random_game(M, rng);
      const std::vector<double> phi = shapley(v, M);

      // efficiency
      const double total = std::accumulate(phi.begin(), phi.end(), 0.0);
      CHECK(std::fabs(total - (v.back() - v.front())) < 1e-9);

      // exact agreement with the permutation oracle
      const std::vector<double> oracle = shapley_by_permutations(v, M);
      for (int m = 0; m < M; ++m) CHECK(std::fabs(phi[m] - oracle[m]) < 1e-9);

      // linearity on a second game
      const std::vector<double> w = random_game(M, rng);
      std::vector<double> sum(v.size());
      for (size_t k = 0; k < v.size(); ++k) sum[k] = v[k] + w[k];
      const std::vector<double> phi_w = shapley(w, M);
      const std::vector<double> phi_sum = shapley(sum, M);
      for (int m = 0; m < M; ++m)
        CHECK(std::fabs(phi_sum[m] - phi[m] - phi_w[m]) < 1e-9);
    }
  }
}

TEST_CASE("shapley symmetry and dummy") {
  // exchangeable players split evenly
  const std::vector<double> sym{0.0, 0.5, 0.5, 1.0};
  const std::vector<double> phi = shapley(sym, 2);
  CHECK(phi[0] == doctest::Approx(0.5));
  CHECK(phi[1] == doctest::Approx(0.5));

  // player 3 never changes any coalition's value
  Rng rng(7);
  std::vector<double> v(8);
  v[0] = 0.0;
  v[1] = rng.uniform(0.0, 2.0);
  v[2] = rng.uniform(0.0, 2.0);
  v[3] = rng.uniform(0.0, 4.0);
  v[4] = v[0];
  v[5] = v[1];
  v[6] = v[2];
  v[7] = v[3];
  const std::vector<double> phi3 = shapley(v, 3);
  CHECK(std::fabs(phi3[2]) < 1e-12);
}

TEST_CASE("shapley input validation") {
  CHECK_THROWS_AS(shapley(std::vector<double>{0.0, 1.0}, 2), std::invalid_argument);
  CHECK_THROWS_AS(shapley(std::vector<double>(1u << 13, 0.0), 13), std::invalid_argument);
}

TEST_CASE("coalition values use per-operator matching") {
  // one region; operator aggregates indexed [m*N+i] with N=1
  SUBCASE("single operator") {
    const std::vector<double> demand{10.0};
    const std::vector<double> supply{5.0};
    const CoalitionValue v = coalition_value(0b1, demand, supply, 1, 1);
    CHECK(v.c_sat == doctest::Approx(0.5));
  }
  SUBCASE("two operators, no pooling") {
    const std::vector<double> demand{10.0, 10.0};
    const std::vector<double> supply{5.0, 15.0};
    const CoalitionValue v = coalition_value(0b11, demand, supply, 2, 1);
    CHECK(v.c_sat == doctest::Approx(0.75));  // (5 + 10) of 20
  }
  SUBCASE("empty coalition") {
    const std::vector<double> demand{10.0, 10.0};
    const std::vector<double> supply{5.0, 15.0};
    const CoalitionValue v = coalition_value(0, demand, supply, 2, 1);
    CHECK(v.c_sat == doctest::Approx(0.0));
    CHECK(v.c_equ == doctest::Approx(0.0));
  }
}

TEST_CASE("attribution satisfies efficiency per goal") {
  Rng rng(31);
  const int M = 3, N = 4;
  std::vector<double> demand(M * N), supply(M * N);
  for (double& v : demand) v = std::floor(rng.uniform(0.0, 30.0));
  for (double& v : supply) v = std::floor(rng.uniform(0.0, 20.0));
  const ShapleyAttribution phi = shapley_attribution(demand, supply, M, N);
  const CoalitionValue grand = coalition_value((1u << M) - 1, demand, supply, M, N);
  CHECK(std::accumulate(phi.phi_sat.begin(), phi.phi_sat.end(), 0.0) ==
        doctest::Approx(grand.c_sat).epsilon(1e-12));
  CHECK(std::accumulate(phi.phi_equ.begin(), phi.phi_equ.end(), 0.0) ==
        doctest::Approx(grand.c_equ).epsilon(1e-12));
}

TEST_CASE("score model squashes and caps") {
  Rng rng(9);
  ScoreModel model = ScoreModel::create(2, std::vector<int>{8}, 0.2, rng);

  // zero the network, then pin the output bias so tanh(raw) = 0.5
  model.net = Mlp::zeros(model.net.sizes);
  const double raw = std::atanh(0.5);
  model.net.biases.back().assign(2, raw);

  const GoalDistance g{0.1, 5.0};
  const ShapleyAttribution phi{{0.4, 0.6}, {-1.0, -2.0}};
  const std::vector<double> z_net{1000.0, 0.0};
  const std::vector<double> scores = model.assign(g, phi, z_net);
  CHECK(scores[0] == doctest::Approx(100.0));  // 0.5 * 0.2 * 1000
  CHECK(scores[1] == doctest::Approx(0.0));    // cap collapses at zero revenue
}

TEST_CASE("score cap holds for arbitrary parameters") {
  Rng rng(10);
  for (int trial = 0; trial < 200; ++trial) {
    const int M = 2 + static_cast<int>(rng.below(3));
    const double kappa = rng.uniform(0.05, 1.0);
    ScoreModel model = ScoreModel::create(M, std::vector<int>{16}, kappa, rng);
    GoalDistance g{rng.uniform(-1.0, 1.0), rng.uniform(-20.0, 20.0)};
    ShapleyAttribution phi;
    phi.phi_sat.assign(M, 0.0);
    phi.phi_equ.assign(M, 0.0);
    std::vector<double> z(M);
    for (int m = 0; m < M; ++m) {
      phi.phi_sat[m] = rng.uniform(-1.0, 1.0);
      phi.phi_equ[m] = rng.uniform(-5.0, 5.0);
      z[m] = rng.uniform(-200.0, 2000.0);
    }
    const std::vector<double> scores = model.assign(g, phi, z);
    for (int m = 0; m < M; ++m)
      CHECK(std::fabs(scores[m]) <= kappa * std::max(z[m], 0.0) + 1e-12);
  }
}

TEST_CASE("regulation loss arithmetic") {
  // all goals met and perfectly fair
  CHECK(regulation_loss(std::vector<double>{0.0}, std::vector<double>{0.0},
                        std::vector<double>{0.0}, 0.5) == doctest::Approx(0.0));
  // beta = 1 ignores fairness entirely
  CHECK(regulation_loss(std::vector<double>{0.2, 0.4}, std::vector<double>{1.0, 3.0},
                        std::vector<double>{-9.0}, 1.0) == doctest::Approx(2.3));
  // mixed case: 0.5 * (0.05 + 10) + 0.5 * 0.3
  CHECK(regulation_loss(std::vector<double>{0.05}, std::vector<double>{10.0},
                        std::vector<double>{-0.3}, 0.5) == doctest::Approx(5.175));
  CHECK_THROWS_AS(regulation_loss({}, {}, std::vector<double>{0.0}, 0.5),
                  std::invalid_argument);
  // loss never rewards unfairness and is non-negative on clipped inputs
  CHECK(regulation_loss(std::vector<double>{0.0}, std::vector<double>{0.0},
                        std::vector<double>{-2.0}, 0.25) == doctest::Approx(1.5));
}

TEST_CASE("spsa reduces a quadratic loss") {
  Rng init(3);
  Mlp params = Mlp::create({2, 4, 2}, init);
  const std::vector<double> target = flatten_params(params);

  // optimum shifted away from the start
  Mlp current = params;
  {
    std::vector<double> shifted = target;
    for (size_t k = 0; k < shifted.size(); ++k) shifted[k] += 0.5;
    unflatten_params(current, shifted);
  }
  auto loss = [&](const Mlp& p) {
    const std::vector<double> flat = flatten_params(p);
    double sum = 0.0;
    for (size_t k = 0; k < flat.size(); ++k)
      sum += (flat[k] - target[k]) * (flat[k] - target[k]);
    return sum;
  };

  const double initial = loss(current);
  Rng rng(17);
  for (int k = 0; k < 100; ++k) spsa_update(current, loss, 0.02, 0.05, rng);
  CHECK(loss(current) < 0.1 * initial);
}

TEST_CASE("spsa on a constant loss takes no step") {
  Rng init(4);
  Mlp params = Mlp::create({3, 4, 1}, init);
  const Mlp before = params;
  Rng rng(5);
  const SpsaResult r = spsa_update(params, [](const Mlp&) { return 2.5; }, 0.1, 0.1, rng);
  CHECK(r.loss_plus == doctest::Approx(2.5));
  CHECK(r.loss_minus == doctest::Approx(2.5));
  CHECK(params == before);
}

TEST_CASE("spsa perturbation sequence is seeded") {
  Rng init(6);
  Mlp a = Mlp::create({2, 4, 1}, init);
  Mlp b = a;
  auto loss = [](const Mlp& p) { return flatten_params(p)[0]; };
  Rng ra(99), rb(99);
  spsa_update(a, loss, 0.05, 0.1, ra);
  spsa_update(b, loss, 0.05, 0.1, rb);
  CHECK(a == b);
  CHECK_THROWS_AS(spsa_update(a, loss, 0.05, 0.0, ra), std::invalid_argument);
}

TEST_SUITE_END();
