#pragma once

// Debiased cross-fitted bounds on overall performance and overall
// disparities, with the joint covariance of the (upper, lower) estimators
// and per-bound Wald confidence intervals.

#include <array>
#include <optional>

#include "riskbounds/eif.hpp"

namespace riskbounds {

using Cov2 = std::array<std::array<double, 2>, 2>;

struct BoundsEstimate {
  double lower = 0.0;
  double upper = 0.0;
  Vec per_obs_lower;   // empty for fractional-program estimands
  Vec per_obs_upper;
  Cov2 cov{{{0.0, 0.0}, {0.0, 0.0}}};
  bool has_cov = false;
  std::size_t n = 0;
  double level = 0.95;
  std::pair<double, double> ci_lower{0.0, 0.0};
  std::pair<double, double> ci_upper{0.0, 0.0};
  bool has_ci = false;
  Vec fold_lower, fold_upper;       // per-fold values (fractional programs)
  std::size_t swapped_boxes = 0;    // noisy boxes repaired inside the solver
};

// Sample covariance (1/n normalization) of the stacked per-observation
// upper/lower influence values.
Cov2 estimate_covariance(const Vec& per_obs_lower, const Vec& per_obs_upper);

// Per-bound Wald intervals: point +- z_{1-(1-level)/2} sqrt(var / n).
void confidence_intervals(BoundsEstimate& est, double level);

BoundsEstimate estimate_overall_bounds(const Dataset& data, const Score& score,
                                       const PerformanceSpec& spec, const BoundingSpec& bounding,
                                       const NuisanceBundle& bundle, double level = 0.95);

// Overall disparity across the binary group attribute. P(G=1) defaults to the
// empirical share when group_prob is not given.
BoundsEstimate estimate_overall_disparity_bounds(const Dataset& data, const Score& score,
                                                 const PerformanceSpec& spec,
                                                 const BoundingSpec& bounding,
                                                 const NuisanceBundle& bundle,
                                                 std::optional<double> group_prob = std::nullopt,
                                                 double level = 0.95);

}  // namespace riskbounds
