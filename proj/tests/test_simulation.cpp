#include <doctest.h>

#include "riskbounds/simulation.hpp"

using namespace riskbounds;

TEST_CASE("unconfounded limit of the generator: gamma_true -> 1 shrinks delta") {
  DgpConfig cfg;
  cfg.n = 100;
  cfg.d = 3;
  cfg.d_pi = 2;
  cfg.d_mu = 2;
  cfg.gamma_true = 0.999;
  cfg.seed = 1;
  SimulatedData sim = generate_dgp(cfg);
  for (const Record& r : sim.data.records) CHECK(std::abs(sim.truth.delta(r.x)) < 1e-3);
}

TEST_CASE("selection rate is near one half by index symmetry") {
  DgpConfig cfg;
  cfg.n = 100000;
  cfg.d = 6;
  cfg.d_pi = 4;
  cfg.d_mu = 4;
  cfg.seed = 2;
  SimulatedData sim = generate_dgp(cfg);
  double rate = static_cast<double>(sim.data.n_selected()) / static_cast<double>(sim.data.n());
  CHECK(std::abs(rate - 0.5) < 3.0 * 0.5 / std::sqrt(static_cast<double>(sim.data.n())));
}

TEST_CASE("unselected outcome rate is gamma_true times the selected rate at matched bins") {
  DgpConfig cfg;
  cfg.n = 120000;
  cfg.d = 2;
  cfg.d_pi = 1;
  cfg.d_mu = 1;
  cfg.seed = 3;
  SimulatedData sim = generate_dgp(cfg);
  // bin on the first covariate, compare conditional Y* rates by selection arm
  double lo_edge = -0.5, hi_edge = 0.5;
  double sel1 = 0, sel_n = 0, uns1 = 0, uns_n = 0;
  for (std::size_t i = 0; i < sim.data.n(); ++i) {
    const Record& r = sim.data.records[i];
    if (r.x[0] < lo_edge || r.x[0] > hi_edge) continue;
    if (r.d_sel == 1) {
      sel1 += sim.y_star[i];
      sel_n += 1;
    } else {
      uns1 += sim.y_star[i];
      uns_n += 1;
    }
  }
  double ratio = (uns1 / uns_n) / (sel1 / sel_n);
  CHECK(ratio == doctest::Approx(0.75).epsilon(0.06));
}

TEST_CASE("proxy mechanism: agreement rate equals q in both selection arms") {
  DgpConfig cfg;
  cfg.n = 80000;
  cfg.d = 2;
  cfg.d_pi = 1;
  cfg.d_mu = 1;
  cfg.seed = 4;
  cfg.with_proxy = true;
  SimulatedData sim = generate_dgp(cfg);
  double agree1 = 0, n1 = 0, agree0 = 0, n0 = 0;
  for (std::size_t i = 0; i < sim.data.n(); ++i) {
    const Record& r = sim.data.records[i];
    double agree = *r.y_proxy == sim.y_star[i] ? 1.0 : 0.0;
    if (r.d_sel == 1) {
      agree1 += agree;
      n1 += 1;
    } else {
      agree0 += agree;
      n0 += 1;
    }
  }
  CHECK(agree1 / n1 == doctest::Approx(0.9).epsilon(0.01));
  CHECK(agree0 / n0 == doctest::Approx(0.9).epsilon(0.01));
}

TEST_CASE("proxy bounds contain the true confounding function at plug-in truth") {
  DgpConfig cfg;
  cfg.n = 100;
  cfg.d = 3;
  cfg.d_pi = 2;
  cfg.d_mu = 2;
  cfg.seed = 5;
  cfg.with_proxy = true;
  SimulatedData sim = generate_dgp(cfg);
  Matrix grid = draw_covariates(cfg, 50, 6);
  for (const Vec& x : grid) {
    double g1 = sim.truth.nuisances.gamma1(x);
    double m0 = sim.truth.nuisances.mu0_proxy(x);
    double m1 = sim.truth.mu1(x);
    double dlo = 1.0 - g1 - m0 - m1;
    double dhi = 1.0 - g1 + m0 - m1;
    double d = sim.truth.delta(x);
    CHECK(d >= dlo - 1e-12);
    CHECK(d <= dhi + 1e-12);
    // the general form is tighter and still valid
    double glo = std::abs(1.0 - g1 - m0) - m1;
    double ghi = 1.0 - std::abs(g1 - m0) - m1;
    CHECK(d >= glo - 1e-12);
    CHECK(d <= ghi + 1e-12);
  }
}

TEST_CASE("instrument mechanism: exclusion and bound validity at the truth") {
  DgpConfig cfg;
  cfg.n = 200000;
  cfg.d = 2;
  cfg.d_pi = 1;
  cfg.d_mu = 1;
  cfg.seed = 7;
  cfg.with_instrument = true;
  SimulatedData sim = generate_dgp(cfg);

  // empirical check of Y* independence from Z in a covariate bin
  double s[4] = {0, 0, 0, 0}, c[4] = {0, 0, 0, 0};
  for (std::size_t i = 0; i < sim.data.n(); ++i) {
    const Record& r = sim.data.records[i];
    if (std::abs(r.x[0]) > 0.4) continue;
    s[*r.z] += sim.y_star[i];
    c[*r.z] += 1;
  }
  double base = s[1] / c[1];
  CHECK(s[2] / c[2] == doctest::Approx(base).epsilon(0.05));
  CHECK(s[3] / c[3] == doctest::Approx(base).epsilon(0.05));

  // fixed-z bounds contain the true delta on a grid
  Matrix grid = draw_covariates(cfg, 40, 8);
  for (const Vec& x : grid) {
    double m1 = sim.truth.mu1(x);
    double pi0 = 1.0 - sim.truth.pi1(x);
    double d = sim.truth.delta(x);
    for (int z = 1; z <= 3; ++z) {
      double lam = sim.truth.nuisances.lambda_z(z, x);
      double kap = sim.truth.nuisances.kappa_z(z, x);
      CHECK(d >= (lam - m1) / pi0 - 1e-10);
      CHECK(d <= (kap + lam - m1) / pi0 + 1e-10);
    }
  }

  // selected-arm outcome rate is mu1 regardless of z (the design guarantee)
  double sy[4] = {0, 0, 0, 0}, sc[4] = {0, 0, 0, 0};
  for (std::size_t i = 0; i < sim.data.n(); ++i) {
    const Record& r = sim.data.records[i];
    if (r.d_sel != 1 || std::abs(r.x[0]) > 0.4) continue;
    sy[*r.z] += r.y_obs;
    sc[*r.z] += 1;
  }
  double sel_base = sy[1] / sc[1];
  CHECK(sy[2] / sc[2] == doctest::Approx(sel_base).epsilon(0.06));
  CHECK(sy[3] / sc[3] == doctest::Approx(sel_base).epsilon(0.06));
}

TEST_CASE("truth cache correctness: fresh seeds agree within combined error") {
  DgpConfig cfg;
  cfg.n = 100;
  cfg.seed = 9;
  Score score = fit_sim_score(cfg, 1000, LearnerConfig::logistic(1e-2), 99);
  BoundingSpec bs = BoundingSpec::nonparametric(2.0 / 3.0, 1.5);
  TrueBounds a = compute_true_overall_bounds(PerformanceSpec::mse(), bs, cfg, score, 200000, 1);
  TrueBounds b = compute_true_overall_bounds(PerformanceSpec::mse(), bs, cfg, score, 200000, 2);
  CHECK(std::abs(a.upper - b.upper) < 3.0 * (a.se_upper + b.se_upper));
  CHECK(std::abs(a.lower - b.lower) < 3.0 * (a.se_lower + b.se_lower));

  TrueBounds p = compute_true_positive_bounds(PerformanceSpec::threshold_tpr(0.5), bs, cfg, score,
                                              200000, 3);
  TrueBounds q = compute_true_positive_bounds(PerformanceSpec::threshold_tpr(0.5), bs, cfg, score,
                                              200000, 4);
  CHECK(std::abs(p.upper - q.upper) < 3.0 * (p.se_upper + q.se_upper));
  CHECK(std::abs(p.lower - q.lower) < 3.0 * (p.se_lower + q.se_lower));
  CHECK(p.lower <= p.upper);
}

TEST_CASE("identical experiment configs produce identical reports") {
  ExperimentConfig cfg;
  cfg.dgp.n = 400;
  cfg.dgp.d = 3;
  cfg.dgp.d_pi = 2;
  cfg.dgp.d_mu = 2;
  cfg.n_grid = {400};
  cfg.reps = 4;
  cfg.estimands = {{"mse", PerformanceSpec::mse()}};
  cfg.boundings = {BoundingSpec::nonparametric(2.0 / 3.0, 1.5)};
  cfg.truth_draws = 50000;
  cfg.use_oracle_nuisances = true;
  cfg.seed = 303;
  cfg.threads = 1;

  SimulationReport r1 = run_replications(cfg);
  SimulationReport r2 = run_replications(cfg);
  REQUIRE(r1.cells.size() == r2.cells.size());
  for (std::size_t i = 0; i < r1.cells.size(); ++i) {
    CHECK(r1.cells[i].mean_estimate == r2.cells[i].mean_estimate);
    CHECK(r1.cells[i].sd == r2.cells[i].sd);
    CHECK(r1.cells[i].truth == r2.cells[i].truth);
  }
}

TEST_CASE("replication report carries bias, sd and coverage fields") {
  ExperimentConfig cfg;
  cfg.dgp.n = 500;
  cfg.dgp.d = 3;
  cfg.dgp.d_pi = 2;
  cfg.dgp.d_mu = 2;
  cfg.n_grid = {500};
  cfg.reps = 8;
  cfg.estimands = {{"mse", PerformanceSpec::mse()}, {"tpr", PerformanceSpec::threshold_tpr(0.5)}};
  cfg.boundings = {BoundingSpec::nonparametric(2.0 / 3.0, 1.5)};
  cfg.truth_draws = 50000;
  cfg.use_oracle_nuisances = true;
  cfg.seed = 17;
  cfg.threads = 1;

  SimulationReport rep = run_replications(cfg);
  REQUIRE(rep.cells.size() == 4);  // two estimands, two sides
  for (const auto& c : rep.cells) {
    CHECK(c.reps == 8);
    CHECK(std::isfinite(c.bias));
    if (c.estimand == "mse")
      CHECK(c.coverage >= 0.0);
    else
      CHECK(c.coverage == -1.0);
  }
}
