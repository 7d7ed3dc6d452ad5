#pragma once

// Bounds on positive- and negative-class performance via exact per-fold
// linear-fractional programs, ROC/AUC bound bands, and the (non-sharp)
// positive-class disparity bounds.

#include "riskbounds/lfp.hpp"
#include "riskbounds/overall.hpp"

namespace riskbounds {

BoundsEstimate estimate_positive_class_bounds(const Dataset& data, const Score& score,
                                              const PerformanceSpec& spec,
                                              const BoundingSpec& bounding,
                                              const NuisanceBundle& bundle);

// Negative-class performance via the complement transform: base 1 - phi_mu
// and the negated box, solved with the same threshold kernel.
BoundsEstimate estimate_negative_class_bounds(const Dataset& data, const Score& score,
                                              const PerformanceSpec& spec,
                                              const BoundingSpec& bounding,
                                              const NuisanceBundle& bundle);

struct RocPoint {
  double tau = 0.0;
  double tpr_lo = 0.0, tpr_hi = 0.0;
  double fpr_lo = 0.0, fpr_hi = 0.0;
};

std::vector<RocPoint> roc_bounds(const Dataset& data, const Score& score, const Vec& thresholds,
                                 const BoundingSpec& bounding, const NuisanceBundle& bundle);

enum class CurveSide { Lo, Hi };

// Trapezoidal AUC of the chosen envelope: Hi pairs (fpr_lo, tpr_hi), Lo pairs
// (fpr_hi, tpr_lo). Endpoints (0,0) and (1,1) are appended.
double auc_from_curve(const std::vector<RocPoint>& points, CurveSide side);

// disp_hi = perf_{+,g=1} upper - perf_{+,g=0} lower and vice versa; interval
// contains the sharp identified set but is not sharp itself.
BoundsEstimate positive_class_disparity_bounds(const Dataset& data, const Score& score,
                                               const PerformanceSpec& spec,
                                               const BoundingSpec& bounding,
                                               const NuisanceBundle& bundle);

// Heuristic spread for the fold-averaged fractional-program bounds: resamples
// observations within folds holding the fitted nuisances fixed. Not a proven
// inference procedure; reported as a rough stability diagnostic only.
std::pair<double, double> bootstrap_positive_class_sd(const Dataset& data, const Score& score,
                                                      const PerformanceSpec& spec,
                                                      const BoundingSpec& bounding,
                                                      const NuisanceBundle& bundle, int B,
                                                      std::uint64_t seed);

}  // namespace riskbounds
