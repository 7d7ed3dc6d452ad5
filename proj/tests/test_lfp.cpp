#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "riskbounds/lfp.hpp"

using namespace riskbounds;

namespace {

// Independent oracle: exhaustive enumeration over all 2^n vertex assignments.
// Fractional-linear objectives over a box attain their optima at vertices.
double brute_force(const LfpInstance& ins, bool maximize) {
  const std::size_t n = ins.size();
  bool found = false;
  double best = 0.0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double dv = (mask >> i) & 1 ? ins.hi[i] : ins.lo[i];
      double term = ins.a[i] + ins.w[i] * dv;
      num += ins.beta0[i] * term;
      den += term;
    }
    if (!(den > ins.tol_den)) continue;
    double v = num / den;
    if (!found || (maximize ? v > best : v < best)) {
      found = true;
      best = v;
    }
  }
  REQUIRE(found);
  return best;
}

LfpInstance random_instance(std::mt19937_64& rng, std::size_t n, bool binary_weights) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  LfpInstance ins;
  for (std::size_t i = 0; i < n; ++i) {
    ins.a.push_back(0.3 + std::abs(unif(rng)));  // keep denominators workable
    ins.w.push_back(binary_weights ? (coin(rng) ? 1.0 : 0.0) : std::abs(unif(rng)));
    double b1 = 0.4 * unif(rng), b2 = 0.4 * unif(rng);
    ins.lo.push_back(std::min(b1, b2));
    ins.hi.push_back(std::max(b1, b2));
    ins.beta0.push_back(coin(rng) ? (coin(rng) ? 1.0 : 0.0) : 0.5 + 0.5 * unif(rng));
  }
  return ins;
}

}  // namespace

TEST_CASE("point box reduces to the plug-in ratio") {
  LfpInstance ins;
  ins.a = {0.5, 0.8, 0.2};
  ins.w = {1.0, 0.0, 1.0};
  ins.lo = {0.1, -0.2, 0.05};
  ins.hi = ins.lo;
  ins.beta0 = {1.0, 0.0, 1.0};
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    double t = ins.a[i] + ins.w[i] * ins.lo[i];
    num += ins.beta0[i] * t;
    den += t;
  }
  ins.direction = LfpDirection::Maximize;
  CHECK(solve_fold_lfp(ins).value == doctest::Approx(num / den).epsilon(1e-12));
  ins.direction = LfpDirection::Minimize;
  CHECK(solve_fold_lfp(ins).value == doctest::Approx(num / den).epsilon(1e-12));
}

TEST_CASE("constant beta0 gives the constant for any feasible box") {
  LfpInstance ins;
  ins.a = {0.5, 0.7};
  ins.w = {1.0, 1.0};
  ins.lo = {-0.1, -0.1};
  ins.hi = {0.3, 0.2};
  ins.beta0 = {0.42, 0.42};
  ins.direction = LfpDirection::Maximize;
  CHECK(solve_fold_lfp(ins).value == doctest::Approx(0.42).epsilon(1e-12));
  ins.direction = LfpDirection::Minimize;
  CHECK(solve_fold_lfp(ins).value == doctest::Approx(0.42).epsilon(1e-12));
}

TEST_CASE("solver matches exhaustive vertex enumeration on random instances") {
  std::mt19937_64 rng(20240811);
  std::uniform_int_distribution<std::size_t> size_pick(1, 12);
  for (int trial = 0; trial < 100; ++trial) {
    LfpInstance ins = random_instance(rng, size_pick(rng), trial % 2 == 0);
    ins.direction = LfpDirection::Maximize;
    double got_max = solve_fold_lfp(ins).value;
    CHECK(got_max == doctest::Approx(brute_force(ins, true)).epsilon(1e-10));
    ins.direction = LfpDirection::Minimize;
    double got_min = solve_fold_lfp(ins).value;
    CHECK(got_min == doctest::Approx(brute_force(ins, false)).epsilon(1e-10));
  }
}

TEST_CASE("chosen assignment is a vertex, a monotone step in beta0 order, and attains value") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    LfpInstance ins = random_instance(rng, 30, false);
    ins.direction = trial % 2 == 0 ? LfpDirection::Maximize : LfpDirection::Minimize;
    LfpSolution sol = solve_fold_lfp(ins);

    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < ins.size(); ++i) {
      bool at_lo = sol.chosen_delta[i] == ins.lo[i];
      bool at_hi = sol.chosen_delta[i] == ins.hi[i];
      CHECK((at_lo || at_hi));
      double t = ins.a[i] + ins.w[i] * sol.chosen_delta[i];
      num += ins.beta0[i] * t;
      den += t;
    }
    CHECK(num / den == doctest::Approx(sol.value).epsilon(1e-12));

    // step form: sorted by beta0, the lo/hi pattern switches at most once
    std::vector<std::size_t> ord(ins.size());
    std::iota(ord.begin(), ord.end(), std::size_t{0});
    std::stable_sort(ord.begin(), ord.end(),
                     [&](std::size_t x, std::size_t y) { return ins.beta0[x] < ins.beta0[y]; });
    int switches = 0;
    for (std::size_t pos = 1; pos < ord.size(); ++pos) {
      bool prev_hi = sol.chosen_delta[ord[pos - 1]] == ins.hi[ord[pos - 1]] &&
                     ins.hi[ord[pos - 1]] != ins.lo[ord[pos - 1]];
      bool cur_hi = sol.chosen_delta[ord[pos]] == ins.hi[ord[pos]] &&
                    ins.hi[ord[pos]] != ins.lo[ord[pos]];
      if (prev_hi != cur_hi) ++switches;
    }
    CHECK(switches <= 1);
  }
}

TEST_CASE("inverted boxes are swapped and counted, optimum unchanged") {
  std::mt19937_64 rng(99);
  LfpInstance ins = random_instance(rng, 10, false);
  LfpInstance flipped = ins;
  std::swap(flipped.lo[3], flipped.hi[3]);
  std::swap(flipped.lo[7], flipped.hi[7]);
  ins.direction = flipped.direction = LfpDirection::Maximize;
  LfpSolution a = solve_fold_lfp(ins);
  LfpSolution b = solve_fold_lfp(flipped);
  CHECK(a.value == doctest::Approx(b.value).epsilon(1e-12));
  CHECK(a.swapped_boxes == 0);
  CHECK(b.swapped_boxes == 2);
}

TEST_CASE("infeasible denominators raise the dedicated error") {
  LfpInstance ins;
  ins.a = {-1.0, -1.0};
  ins.w = {1.0, 1.0};
  ins.lo = {-0.1, -0.1};
  ins.hi = {0.1, 0.1};
  ins.beta0 = {0.0, 1.0};
  CHECK_THROWS_AS(solve_fold_lfp(ins), infeasibility_error);
  CHECK_THROWS_AS(solve_fold_lfp(LfpInstance{}), std::invalid_argument);
}
