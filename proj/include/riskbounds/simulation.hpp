#pragma once

// Synthetic data-generating process with analytic truth closures, the
// replication runner, and metric aggregation (bias / SD / coverage / IMSE).

#include <map>
#include <string>

#include "riskbounds/decisions.hpp"
#include "riskbounds/mu_learner.hpp"
#include "riskbounds/overall.hpp"
#include "riskbounds/positive.hpp"

namespace riskbounds {

struct DgpConfig {
  int n = 1000;
  int d = 50;
  int d_pi = 20;
  int d_mu = 25;
  double gamma_true = 0.75;  // ratio of unselected to selected outcome rates
  std::uint64_t seed = 1;

  bool with_proxy = false;
  double proxy_q = 0.9;  // P(proxy agrees with Y*), equal across selection arms

  bool with_instrument = false;
  std::vector<double> instrument_shift = {-0.5, 0.0, 0.5};  // selection index shift per z

  bool with_group = false;  // g = 1{x_1 > 0}

  void validate() const;
};

// Analytic functionals of the generating process. All closures take the
// covariate vector.
struct SimTruth {
  AnalyticNuisances nuisances;
  int z_count = 0;  // instrument support size, 0 without the mechanism
  std::function<double(const Vec&)> mu1;      // P(Y*=1 | D=1, x)
  std::function<double(const Vec&)> pi1;      // P(D=1 | x), marginal over z
  std::function<double(const Vec&)> mu_star;  // P(Y*=1 | x)
  std::function<double(const Vec&)> delta;    // P(Y*=1|D=0,x) - P(Y*=1|D=1,x)

  // true conditional-probability bound functions mu1 + pi0 * delta_bound
  BoundFn true_mu_lo(const BoundingSpec& bounding) const;
  BoundFn true_mu_hi(const BoundingSpec& bounding) const;
};

struct SimulatedData {
  Dataset data;
  std::vector<int> y_star;  // stored for oracles, hidden from estimators
  SimTruth truth;
};

SimulatedData generate_dgp(const DgpConfig& config);

// Draws covariate vectors only (evaluation grids, numeric integration).
Matrix draw_covariates(const DgpConfig& config, std::size_t n, std::uint64_t seed);

// Score fitted once on an independently simulated training set (selected
// subsample only), as in the evaluation protocol.
Score fit_sim_score(const DgpConfig& config, int n_train, const LearnerConfig& learner,
                    std::uint64_t seed);

struct TrueBounds {
  double lower = 0.0, upper = 0.0;
  double se_lower = 0.0, se_upper = 0.0;  // Monte Carlo standard errors
};

// Population endpoints by numeric integration over fresh covariate draws
// using the analytic nuisances.
TrueBounds compute_true_overall_bounds(const PerformanceSpec& spec, const BoundingSpec& bounding,
                                       const DgpConfig& config, const Score& score,
                                       std::size_t n_draws, std::uint64_t seed);

// Population fractional-program endpoints via an independent threshold scan
// over the drawn population (monotone-in-beta0 assignments).
TrueBounds compute_true_positive_bounds(const PerformanceSpec& spec, const BoundingSpec& bounding,
                                        const DgpConfig& config, const Score& score,
                                        std::size_t n_draws, std::uint64_t seed);

struct EstimandSpec {
  std::string name;
  PerformanceSpec spec;
};

struct ExperimentConfig {
  DgpConfig dgp;
  std::vector<int> n_grid = {1000};
  int reps = 200;
  std::vector<EstimandSpec> estimands;
  std::vector<BoundingSpec> boundings;
  LearnerConfig learner = LearnerConfig::logistic(1e-2);
  SmootherConfig smoother = SmootherConfig::ridge(1e-2);
  int folds = 2;
  double eps_clip = 0.01;
  double level = 0.95;
  int n_train = 1000;
  std::size_t truth_draws = 1000000;
  bool use_oracle_nuisances = false;
  bool learner_study = false;   // feasible / oracle / plug-in IMSE cells
  bool decision_study = false;  // max-min plug-in rule regret cells
  std::uint64_t seed = 1;
  int threads = 0;  // 0 = hardware concurrency
};

struct ReportCell {
  std::string estimand;
  std::string bounding;
  std::string side;  // "lower" or "upper"
  int n = 0;
  double truth = 0.0;
  double mean_estimate = 0.0;
  double bias = 0.0;
  double sd = 0.0;
  double mean_se = 0.0;    // overall-class estimands only
  double coverage = -1.0;  // -1 when no CI is available
  int reps = 0;
};

struct LearnerCell {
  std::string bounding;
  int n = 0;
  double imse_feasible = 0.0;
  double imse_oracle = 0.0;
  double imse_plugin = 0.0;
  int reps = 0;
};

struct DecisionCell {
  std::string bounding;
  int n = 0;
  double mean_regret = 0.0;
  double max_regret = 0.0;
  double min_regret = 0.0;
  int reps = 0;
};

struct SimulationReport {
  std::vector<ReportCell> cells;
  std::vector<LearnerCell> learner_cells;
  std::vector<DecisionCell> decision_cells;
  int failed_reps = 0;
  int total_reps = 0;
};

SimulationReport run_replications(const ExperimentConfig& config);

// Stable display label, e.g. "nonparametric[0.6667,1.5]".
std::string bounding_spec_label(const BoundingSpec& bounding);

}  // namespace riskbounds
