#include <doctest.h>

#include <random>

#include "riskbounds/decisions.hpp"
#include "riskbounds/simulation.hpp"

using namespace riskbounds;

namespace {

Matrix grid_1d(int n) {
  Matrix out;
  for (int i = 0; i < n; ++i)
    out.push_back({-2.0 + 4.0 * static_cast<double>(i) / static_cast<double>(n - 1)});
  return out;
}

}  // namespace

TEST_CASE("utility validation") {
  CHECK_THROWS_AS(UtilitySpec::constants(0.5, 0.5, 0.5, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(UtilitySpec::constants(-0.1, 0.4, 0.4, 0.3), std::invalid_argument);
  UtilitySpec u = UtilitySpec::uniform();
  u.validate_at({0.0});
}

TEST_CASE("point-identified bounds collapse the welfare interval") {
  auto mu = [](const Vec& x) { return sigmoid(x[0]); };
  UtilitySpec util = UtilitySpec::uniform();
  DecisionRule all_one{[](const Vec&) { return 1; }};
  auto [lo, hi] = welfare_bounds(all_one, mu, mu, util, grid_1d(50));
  CHECK(lo == doctest::Approx(hi).epsilon(1e-12));
}

TEST_CASE("welfare of the always-treat rule matches the closed form") {
  // u10 = u11 = 1/2: U_lo = E[1/2 - mu_hi]
  UtilitySpec util = UtilitySpec::constants(0.5, 0.5, 0.0, 0.0);
  auto mu_lo = [](const Vec& x) { return 0.5 * sigmoid(x[0]); };
  auto mu_hi = [](const Vec& x) { return sigmoid(x[0]); };
  DecisionRule all_one{[](const Vec&) { return 1; }};
  Matrix sample = grid_1d(200);
  auto [lo, hi] = welfare_bounds(all_one, mu_lo, mu_hi, util, sample);
  double expect_lo = 0.0, expect_hi = 0.0;
  for (const Vec& x : sample) {
    expect_lo += 0.5 - sigmoid(x[0]);
    expect_hi += 0.5 - 0.5 * sigmoid(x[0]);
  }
  expect_lo /= static_cast<double>(sample.size());
  expect_hi /= static_cast<double>(sample.size());
  CHECK(lo == doctest::Approx(expect_lo).epsilon(1e-12));
  CHECK(hi == doctest::Approx(expect_hi).epsilon(1e-12));
  CHECK(lo <= hi);
}

TEST_CASE("welfare interval ordering holds on every sample") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    double a = unif(rng), b = unif(rng), c = unif(rng), d = unif(rng);
    double s = a + b + c + d;
    UtilitySpec util = UtilitySpec::constants(a / s, b / s, c / s, d / s);
    double w = unif(rng);
    auto mu_lo = [w](const Vec& x) { return w * sigmoid(x[0]); };
    auto mu_hi = [w](const Vec& x) { return w * sigmoid(x[0]) + (1.0 - w) * 0.5; };
    DecisionRule rule{[trial](const Vec& x) { return x[0] > (trial % 5 - 2) * 0.3 ? 1 : 0; }};
    auto [lo, hi] = welfare_bounds(rule, mu_lo, mu_hi, util, grid_1d(40));
    CHECK(lo <= hi + 1e-12);
  }
}

TEST_CASE("max-min rule boundary cases") {
  // u10 + u00 = 1: weighted average is always <= 1, so the rule is identically 1
  UtilitySpec corner = UtilitySpec::constants(0.0, 0.6, 0.4, 0.0);
  auto mu = [](const Vec& x) { return sigmoid(x[0]); };
  DecisionRule rule = maxmin_rule(mu, mu, corner);
  for (const Vec& x : grid_1d(20)) CHECK(rule.decide(x) == 1);

  // uniform utilities with point-identified mu reduce to the Bayes threshold
  UtilitySpec uniform = UtilitySpec::uniform();
  DecisionRule bayes = maxmin_rule(mu, mu, uniform);
  for (const Vec& x : grid_1d(41)) {
    int expect = sigmoid(x[0]) <= 0.5 ? 1 : 0;
    CHECK(bayes.decide(x) == expect);
  }
}

TEST_CASE("rule is invariant to clipping when bounds already live in [0,1]") {
  auto mu_lo = [](const Vec& x) { return 0.8 * sigmoid(x[0]); };
  auto mu_hi = [](const Vec& x) { return 0.2 + 0.8 * sigmoid(x[0]); };
  auto clip_lo = [&](const Vec& x) { return clip(mu_lo(x), 0.0, 1.0); };
  auto clip_hi = [&](const Vec& x) { return clip(mu_hi(x), 0.0, 1.0); };
  UtilitySpec util = UtilitySpec::constants(0.3, 0.2, 0.25, 0.25);
  DecisionRule raw = maxmin_rule(mu_lo, mu_hi, util);
  DecisionRule clipped = maxmin_rule(clip_lo, clip_hi, util);
  for (const Vec& x : grid_1d(60)) CHECK(raw.decide(x) == clipped.decide(x));
}

TEST_CASE("regret: zero at the optimum, positive for the flipped rule, never negative") {
  auto mu_lo = [](const Vec& x) { return 0.7 * sigmoid(2.0 * x[0]); };
  auto mu_hi = [](const Vec& x) { return 0.3 + 0.7 * sigmoid(2.0 * x[0]); };
  UtilitySpec util = UtilitySpec::uniform();
  Matrix sample = grid_1d(100);

  DecisionRule best = maxmin_rule(mu_lo, mu_hi, util);
  CHECK(regret(best, mu_lo, mu_hi, util, sample) == doctest::Approx(0.0).epsilon(1e-14));

  DecisionRule flipped{[&best](const Vec& x) { return 1 - best.decide(x); }};
  CHECK(regret(flipped, mu_lo, mu_hi, util, sample) > 0.0);

  std::mt19937_64 rng(77);
  std::bernoulli_distribution coin(0.5);
  for (int trial = 0; trial < 20; ++trial) {
    double cut = -1.0 + 0.1 * trial;
    DecisionRule arbitrary{[cut](const Vec& x) { return x[0] < cut ? 1 : 0; }};
    CHECK(regret(arbitrary, mu_lo, mu_hi, util, sample) >= -1e-14);
  }
}

TEST_CASE("plug-in rule regret on the generator stays small with decent bound estimates") {
  DgpConfig cfg;
  cfg.n = 2000;
  cfg.d = 4;
  cfg.d_pi = 2;
  cfg.d_mu = 3;
  cfg.seed = 404;
  SimulatedData sim = generate_dgp(cfg);
  BoundingSpec bs = BoundingSpec::nonparametric(2.0 / 3.0, 1.5);
  FoldAssignment folds = split_folds(sim.data.n(), 2, 405);
  BoundRegressors reg = learn_mu_bounds(sim.data, folds, LearnerConfig::logistic(1e-2), bs,
                                        SmootherConfig::ridge(1e-2));
  reg.clip01 = true;
  UtilitySpec util = UtilitySpec::uniform();
  DecisionRule rule = maxmin_rule([&](const Vec& x) { return reg.mu_lo(x); },
                                  [&](const Vec& x) { return reg.mu_hi(x); }, util);
  Matrix eval = draw_covariates(cfg, 2000, 406);
  double r = regret(rule, sim.truth.true_mu_lo(bs), sim.truth.true_mu_hi(bs), util, eval);
  CHECK(r >= 0.0);
  CHECK(r < 0.05);
}
