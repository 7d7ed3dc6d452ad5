#pragma once

// Exact solver for the per-fold linear-fractional programs
//
//   max/min over dtilde_i in [lo_i, hi_i] of
//     sum_i beta0_i (a_i + w_i dtilde_i) / sum_i (a_i + w_i dtilde_i)
//
// The optimum lies at a box vertex that is a monotone threshold in beta0
// order (dual characterization of the Charnes-Cooper linear program), so it
// suffices to scan the n+1 ascending and n+1 descending threshold
// assignments with prefix sums. O(n log n), no LP dependency.

#include <cstddef>
#include <vector>

#include "riskbounds/common.hpp"

namespace riskbounds {

enum class LfpDirection { Maximize, Minimize };
enum class LfpOrientation { Ascending, Descending };

struct LfpInstance {
  Vec a;      // per-observation base term
  Vec w;      // nonnegative weight on the free term
  Vec lo;     // box lower ends (may exceed hi on noisy inputs; swapped)
  Vec hi;
  Vec beta0;
  LfpDirection direction = LfpDirection::Maximize;
  double tol_den = 1e-8;  // candidates require denominator > tol_den

  std::size_t size() const { return a.size(); }
};

struct LfpSolution {
  double value = 0.0;
  std::size_t threshold_index = 0;      // split position in sorted beta0 order
  LfpOrientation orientation = LfpOrientation::Ascending;
  Vec chosen_delta;                     // vertex assignment, original order
  std::size_t swapped_boxes = 0;        // count of lo_i > hi_i pairs repaired
};

LfpSolution solve_fold_lfp(const LfpInstance& instance);

}  // namespace riskbounds
