#pragma once

// Two-stage pseudo-outcome regression for the conditional-probability bound
// functions mu_lo*(.) and mu_hi*(.), with an infeasible oracle variant and a
// plug-in baseline for benchmarking.

#include "riskbounds/eif.hpp"
#include "riskbounds/smoother.hpp"

namespace riskbounds {

struct PseudoOutcomePair {
  double psi_lo = 0.0;  // phi_mu + family lower pseudo-bound term
  double psi_hi = 0.0;
};

// Pseudo-outcomes for every record, each built from nuisances trained without
// the record's fold (the bundle enforces this).
std::vector<PseudoOutcomePair> build_pseudo_outcomes(const Dataset& data,
                                                     const NuisanceBundle& bundle,
                                                     const BoundingSpec& bounding);

class BoundRegressors {
 public:
  bool clip01 = false;

  double mu_lo(const Vec& x) const;
  double mu_hi(const Vec& x) const;

  std::vector<SmootherFit> lo_parts, hi_parts;  // predictions average the parts
  // direct evaluators used by the plug-in baseline instead of smoother parts
  std::function<double(const Vec&)> lo_direct, hi_direct;
};

// Fits the two bound regressors on given pseudo-outcome pairs with identical
// smoother weights.
BoundRegressors fit_bound_regressors(const std::vector<PseudoOutcomePair>& pseudo,
                                     const Matrix& covariates, const SmootherConfig& smoother);

// Full two-fold protocol: cross-fit nuisances, build pseudo-outcomes, regress
// within each half on nuisances from the other half. With swap_folds, both
// halves are fitted and predictions averaged; otherwise only fold 2 is used.
BoundRegressors learn_mu_bounds(const Dataset& data, const FoldAssignment& folds,
                                const LearnerConfig& learner, const BoundingSpec& bounding,
                                const SmootherConfig& smoother, double eps = 0.01,
                                bool swap_folds = true);

// Same regression protocol on an already-fitted bundle.
BoundRegressors fit_mu_bounds_from_bundle(const Dataset& data, const NuisanceBundle& bundle,
                                          const BoundingSpec& bounding,
                                          const SmootherConfig& smoother,
                                          bool swap_folds = true);

// Same protocol with analytic nuisances injected (simulation only).
BoundRegressors oracle_fit(const Dataset& data, const AnalyticNuisances& truth,
                           const FoldAssignment& folds, const BoundingSpec& bounding,
                           const SmootherConfig& smoother, double eps = 0.01,
                           bool swap_folds = true);

// Plug-in baseline: nuisances fitted on the full sample without splitting,
// bound functions evaluated directly from the plug-in confounding bounds.
BoundRegressors plugin_fit(const Dataset& data, const LearnerConfig& learner,
                           const BoundingSpec& bounding, double eps = 0.01);

// Mean squared deviation from a known truth over an evaluation sample.
double imse(const std::function<double(const Vec&)>& predictor,
            const std::function<double(const Vec&)>& truth, const Matrix& eval_sample);

}  // namespace riskbounds
