#include <doctest.h>

#include <random>

#include "riskbounds/overall.hpp"
#include "riskbounds/simulation.hpp"

using namespace riskbounds;

namespace {

struct SimFixture {
  SimulatedData sim;
  FoldAssignment folds;
  Score score;

  explicit SimFixture(int n = 600, std::uint64_t seed = 21, bool group = false) {
    DgpConfig cfg;
    cfg.n = n;
    cfg.d = 4;
    cfg.d_pi = 2;
    cfg.d_mu = 3;
    cfg.seed = seed;
    cfg.with_group = group;
    sim = generate_dgp(cfg);
    folds = split_folds(sim.data.n(), 2, seed + 1);
    auto mu1 = sim.truth.mu1;
    score = Score::from_function([mu1](const Vec& x) { return mu1(x); });
  }

  NuisanceBundle oracle_bundle(const BoundingSpec& spec) const {
    return oracle_nuisances(sim.data, sim.truth.nuisances, folds, spec);
  }
};

}  // namespace

TEST_CASE("covariance estimator matches an independent two-pass oracle") {
  std::mt19937_64 rng(101);
  std::normal_distribution<double> gauss;
  const std::size_t n = 10000;
  Vec a(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = gauss(rng);
    b[i] = 0.5 * a[i] + gauss(rng);
  }
  Cov2 got = estimate_covariance(a, b);

  // oracle: two-pass moments with 1/n normalization
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
    sab += (a[i] - ma) * (b[i] - mb);
  }
  CHECK(got[1][1] == doctest::Approx(saa / n).epsilon(1e-10));
  CHECK(got[0][0] == doctest::Approx(sbb / n).epsilon(1e-10));
  CHECK(got[0][1] == doctest::Approx(sab / n).epsilon(1e-10));
  CHECK(got[0][1] == got[1][0]);
}

TEST_CASE("covariance edge cases") {
  CHECK_THROWS_AS(estimate_covariance({1.0}, {1.0}), std::invalid_argument);
  Cov2 zero = estimate_covariance({2.0, 2.0, 2.0}, {5.0, 5.0, 5.0});
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(zero[i][j] == 0.0);
  Vec v{1.0, 2.0, 4.0};
  Cov2 rank1 = estimate_covariance(v, v);
  CHECK(rank1[0][0] == doctest::Approx(rank1[0][1]));
  CHECK(rank1[0][0] == doctest::Approx(rank1[1][1]));
}

TEST_CASE("confidence interval half-width uses the normal quantile") {
  BoundsEstimate est;
  est.n = 1;
  est.lower = 0.0;
  est.upper = 0.0;
  est.cov = {{{1.0, 0.0}, {0.0, 1.0}}};
  est.has_cov = true;
  confidence_intervals(est, 0.95);
  CHECK(est.ci_upper.second == doctest::Approx(1.959964).epsilon(1e-6));
  CHECK(est.ci_lower.first == doctest::Approx(-1.959964).epsilon(1e-6));

  est.cov = {{{0.0, 0.0}, {0.0, 0.0}}};
  confidence_intervals(est, 0.95);
  CHECK(est.ci_upper.first == est.ci_upper.second);
}

TEST_CASE("unconfounded family collapses upper and lower exactly") {
  SimFixture f;
  NuisanceBundle b = f.oracle_bundle(BoundingSpec::unconfounded());
  for (auto spec : {PerformanceSpec::mse(), PerformanceSpec::accuracy(0.5),
                    PerformanceSpec::failure_rate(0.5)}) {
    BoundsEstimate est = estimate_overall_bounds(f.sim.data, f.score, spec,
                                                 BoundingSpec::unconfounded(), b);
    CHECK(std::abs(est.upper - est.lower) < 1e-12);
    CHECK(est.lower == doctest::Approx(mean(est.per_obs_lower)).epsilon(1e-12));
  }
}

TEST_CASE("constant beta0 with zero beta1 gives degenerate bounds") {
  SimFixture f;
  NuisanceBundle b = f.oracle_bundle(BoundingSpec::nonparametric(0.5, 2.0));
  BoundsEstimate est = estimate_overall_bounds(f.sim.data, f.score,
                                               PerformanceSpec::custom_overall(0.37, 0.0),
                                               BoundingSpec::nonparametric(0.5, 2.0), b);
  CHECK(est.lower == doctest::Approx(0.37).epsilon(1e-12));
  CHECK(est.upper == doctest::Approx(0.37).epsilon(1e-12));
  CHECK(est.cov[0][0] == doctest::Approx(0.0));
}

TEST_CASE("upper bound is monotone in gamma_hi when the positive-part mass is positive") {
  SimFixture f;
  // failure rate has beta1 = 1{s <= tau} >= 0, so the gamma_hi coefficient is
  // E_n[beta1 1{beta1>0} phi_pimu], positive on this data
  PerformanceSpec spec = PerformanceSpec::failure_rate(0.6);
  Vec uppers;
  for (double ghi : {1.0, 1.25, 1.5, 2.0}) {
    BoundingSpec bs = BoundingSpec::nonparametric(1.0, ghi);
    NuisanceBundle b = f.oracle_bundle(bs);
    uppers.push_back(estimate_overall_bounds(f.sim.data, f.score, spec, bs, b).upper);
  }
  for (std::size_t i = 1; i < uppers.size(); ++i) CHECK(uppers[i] >= uppers[i - 1] - 1e-12);
}

TEST_CASE("overall estimator rejects class mismatches") {
  SimFixture f;
  NuisanceBundle b = f.oracle_bundle(BoundingSpec::unconfounded());
  CHECK_THROWS_AS(estimate_overall_bounds(f.sim.data, f.score, PerformanceSpec::threshold_tpr(0.5),
                                          BoundingSpec::unconfounded(), b),
                  std::invalid_argument);
}

TEST_CASE("oracle-nuisance estimates are unbiased for the integration truth") {
  // moderate-scale version of the full acceptance check
  DgpConfig cfg;
  cfg.n = 20000;
  cfg.d = 4;
  cfg.d_pi = 2;
  cfg.d_mu = 3;
  cfg.seed = 77;
  SimulatedData sim = generate_dgp(cfg);
  FoldAssignment folds = split_folds(sim.data.n(), 2, 78);
  BoundingSpec bs = BoundingSpec::nonparametric(2.0 / 3.0, 1.5);
  NuisanceBundle b = oracle_nuisances(sim.data, sim.truth.nuisances, folds, bs);
  auto mu1 = sim.truth.mu1;
  Score score = Score::from_function([mu1](const Vec& x) { return mu1(x); });

  BoundsEstimate est = estimate_overall_bounds(sim.data, score, PerformanceSpec::mse(), bs, b);
  TrueBounds tb = compute_true_overall_bounds(PerformanceSpec::mse(), bs, cfg, score, 400000, 909);

  double se_u = std::sqrt(est.cov[0][0] / static_cast<double>(est.n));
  double se_l = std::sqrt(est.cov[1][1] / static_cast<double>(est.n));
  CHECK(std::abs(est.upper - tb.upper) < 3.0 * (se_u + tb.se_upper));
  CHECK(std::abs(est.lower - tb.lower) < 3.0 * (se_l + tb.se_lower));
}

TEST_CASE("identical groups: disparity interval is symmetric about the true zero") {
  // duplicate every record across g = 0 and g = 1; the true disparity is zero
  // for every confounding function, and the estimated interval is exactly
  // symmetric and contains it (the per-observation sign selection is
  // conservative when the group is not a function of the covariates)
  DgpConfig cfg;
  cfg.n = 300;
  cfg.d = 3;
  cfg.d_pi = 2;
  cfg.d_mu = 2;
  cfg.seed = 55;
  SimulatedData sim = generate_dgp(cfg);
  std::vector<Record> doubled;
  for (const Record& r : sim.data.records) {
    Record a = r, b = r;
    a.g = 0;
    b.g = 1;
    doubled.push_back(a);
    doubled.push_back(b);
  }
  Dataset data = validate_dataset(std::move(doubled));
  FoldAssignment folds = split_folds(data.n(), 2, 5);
  BoundingSpec bs = BoundingSpec::nonparametric(0.5, 2.0);
  NuisanceBundle b = oracle_nuisances(data, sim.truth.nuisances, folds, bs);
  auto mu1 = sim.truth.mu1;
  Score score = Score::from_function([mu1](const Vec& x) { return mu1(x); });

  BoundsEstimate est =
      estimate_overall_disparity_bounds(data, score, PerformanceSpec::mse(), bs, b);
  CHECK(est.upper == doctest::Approx(-est.lower).epsilon(1e-12));
  CHECK(est.lower <= 1e-12);
  CHECK(est.upper >= -1e-12);

  // with the point family the interval degenerates to exactly zero
  NuisanceBundle b_unc =
      oracle_nuisances(data, sim.truth.nuisances, folds, BoundingSpec::unconfounded());
  BoundsEstimate unc = estimate_overall_disparity_bounds(data, score, PerformanceSpec::mse(),
                                                         BoundingSpec::unconfounded(), b_unc);
  CHECK(std::abs(unc.upper) < 1e-12);
  CHECK(std::abs(unc.lower) < 1e-12);
}

TEST_CASE("disparity collapses to the debiased group difference when unconfounded") {
  SimFixture f(800, 91, true);
  BoundingSpec bs = BoundingSpec::unconfounded();
  NuisanceBundle b = f.oracle_bundle(bs);
  BoundsEstimate est =
      estimate_overall_disparity_bounds(f.sim.data, f.score, PerformanceSpec::mse(), bs, b);
  CHECK(std::abs(est.upper - est.lower) < 1e-12);

  // manual group difference of the debiased unconfounded estimates
  BoundsEstimate full = estimate_overall_bounds(f.sim.data, f.score, PerformanceSpec::mse(), bs, b);
  double s1 = 0.0, s0 = 0.0;
  std::size_t n1 = 0, n0 = 0;
  for (std::size_t i = 0; i < f.sim.data.n(); ++i) {
    if (*f.sim.data.records[i].g == 1) {
      s1 += full.per_obs_upper[i];
      ++n1;
    } else {
      s0 += full.per_obs_upper[i];
      ++n0;
    }
  }
  double manual = s1 / static_cast<double>(n1) - s0 / static_cast<double>(n0);
  // the estimator divides by n * P(G=g), matching the indicator-weighted form
  CHECK(est.upper == doctest::Approx(manual).epsilon(1e-10));
}

TEST_CASE("disparity requires a two-sided group column") {
  SimFixture f;
  NuisanceBundle b = f.oracle_bundle(BoundingSpec::unconfounded());
  CHECK_THROWS_AS(estimate_overall_disparity_bounds(f.sim.data, f.score, PerformanceSpec::mse(),
                                                    BoundingSpec::unconfounded(), b),
                  std::invalid_argument);
}
