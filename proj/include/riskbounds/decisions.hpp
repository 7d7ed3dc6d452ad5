#pragma once

// Partially identified expected welfare of decision rules, the max-min
// optimal threshold rule, and regret against known truth in simulations.

#include <functional>

#include "riskbounds/common.hpp"

namespace riskbounds {

using BoundFn = std::function<double(const Vec&)>;

// Payoffs u[d][y*] as maps of the covariates; must be nonnegative and sum to
// one at every x. Constant payoffs are the common case.
struct UtilitySpec {
  BoundFn u11, u10, u00, u01;

  static UtilitySpec constants(double u11, double u10, double u00, double u01);
  static UtilitySpec uniform() { return constants(0.25, 0.25, 0.25, 0.25); }

  void validate_at(const Vec& x) const;
};

struct DecisionRule {
  std::function<int(const Vec&)> decide;
};

// Sharp welfare interval of a rule given conditional-probability bound
// functions (expects bound outputs already in [0,1]).
std::pair<double, double> welfare_bounds(const DecisionRule& rule, const BoundFn& mu_lo,
                                         const BoundFn& mu_hi, const UtilitySpec& utilities,
                                         const Matrix& eval_sample);

// d*(x) = 1{ (u11+u10) mu_hi(x) + (u00+u01) mu_lo(x) <= u10(x) + u00(x) },
// the rule maximizing worst-case welfare; ties decide 1.
DecisionRule maxmin_rule(const BoundFn& mu_lo, const BoundFn& mu_hi,
                         const UtilitySpec& utilities);

// Worst-case-welfare regret of a plug-in rule against the max-min rule at the
// true bounds: U_lo(d*) - U_lo(d_hat), both evaluated at the true bounds.
double regret(const DecisionRule& plug_in, const BoundFn& true_mu_lo, const BoundFn& true_mu_hi,
              const UtilitySpec& utilities, const Matrix& eval_sample);

}  // namespace riskbounds
