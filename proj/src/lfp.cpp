#include "riskbounds/lfp.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace riskbounds {

LfpSolution solve_fold_lfp(const LfpInstance& instance) {
  const std::size_t n = instance.size();
  if (n == 0) throw std::invalid_argument("solve_fold_lfp: empty instance");
  if (instance.w.size() != n || instance.lo.size() != n || instance.hi.size() != n ||
      instance.beta0.size() != n)
    throw std::invalid_argument("solve_fold_lfp: field length mismatch");

  Vec lo = instance.lo, hi = instance.hi;
  std::size_t swapped = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (lo[i] > hi[i]) {
      std::swap(lo[i], hi[i]);
      ++swapped;
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return instance.beta0[a] < instance.beta0[b];
  });

  // prefix sums in sorted order of the switchable parts
  Vec pre_bl(n + 1, 0.0), pre_bh(n + 1, 0.0), pre_wl(n + 1, 0.0), pre_wh(n + 1, 0.0);
  double base_num = 0.0, base_den = 0.0;
  for (std::size_t pos = 0; pos < n; ++pos) {
    std::size_t i = order[pos];
    double b = instance.beta0[i], w = instance.w[i];
    base_num += b * instance.a[i];
    base_den += instance.a[i];
    pre_bl[pos + 1] = pre_bl[pos] + b * w * lo[i];
    pre_bh[pos + 1] = pre_bh[pos] + b * w * hi[i];
    pre_wl[pos + 1] = pre_wl[pos] + w * lo[i];
    pre_wh[pos + 1] = pre_wh[pos] + w * hi[i];
  }
  const double tot_bl = pre_bl[n], tot_bh = pre_bh[n];
  const double tot_wl = pre_wl[n], tot_wh = pre_wh[n];

  const bool maximize = instance.direction == LfpDirection::Maximize;
  bool found = false;
  double best = 0.0;
  std::size_t best_m = 0;
  LfpOrientation best_orient = LfpOrientation::Ascending;

  auto consider = [&](double num, double den, std::size_t m, LfpOrientation o) {
    if (!(den > instance.tol_den)) return;
    double v = num / den;
    if (!found || (maximize ? v > best : v < best)) {
      found = true;
      best = v;
      best_m = m;
      best_orient = o;
    }
  };

  for (std::size_t m = 0; m <= n; ++m) {
    // ascending: first m (smallest beta0) at lo, rest at hi
    consider(base_num + pre_bl[m] + (tot_bh - pre_bh[m]),
             base_den + pre_wl[m] + (tot_wh - pre_wh[m]), m, LfpOrientation::Ascending);
    // descending: first m at hi, rest at lo
    consider(base_num + pre_bh[m] + (tot_bl - pre_bl[m]),
             base_den + pre_wh[m] + (tot_wl - pre_wl[m]), m, LfpOrientation::Descending);
  }
  if (!found) throw infeasibility_error("solve_fold_lfp: denominator condition violated");

  LfpSolution sol;
  sol.value = best;
  sol.threshold_index = best_m;
  sol.orientation = best_orient;
  sol.swapped_boxes = swapped;
  sol.chosen_delta.assign(n, 0.0);
  for (std::size_t pos = 0; pos < n; ++pos) {
    std::size_t i = order[pos];
    bool first_block = pos < best_m;
    bool at_lo = (best_orient == LfpOrientation::Ascending) ? first_block : !first_block;
    sol.chosen_delta[i] = at_lo ? lo[i] : hi[i];
  }
  return sol;
}

}  // namespace riskbounds
