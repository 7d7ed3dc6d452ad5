#include "riskbounds/decisions.hpp"

namespace riskbounds {

UtilitySpec UtilitySpec::constants(double u11, double u10, double u00, double u01) {
  if (u11 < 0.0 || u10 < 0.0 || u00 < 0.0 || u01 < 0.0)
    throw std::invalid_argument("utilities must be nonnegative");
  if (std::abs(u11 + u10 + u00 + u01 - 1.0) > 1e-9)
    throw std::invalid_argument("utilities must sum to one");
  UtilitySpec u;
  u.u11 = [u11](const Vec&) { return u11; };
  u.u10 = [u10](const Vec&) { return u10; };
  u.u00 = [u00](const Vec&) { return u00; };
  u.u01 = [u01](const Vec&) { return u01; };
  return u;
}

void UtilitySpec::validate_at(const Vec& x) const {
  double a = u11(x), b = u10(x), c = u00(x), d = u01(x);
  if (a < 0.0 || b < 0.0 || c < 0.0 || d < 0.0)
    throw std::invalid_argument("utilities must be nonnegative");
  if (std::abs(a + b + c + d - 1.0) > 1e-6)
    throw std::invalid_argument("utilities must be normalized to sum to one");
}

std::pair<double, double> welfare_bounds(const DecisionRule& rule, const BoundFn& mu_lo,
                                         const BoundFn& mu_hi, const UtilitySpec& utilities,
                                         const Matrix& eval_sample) {
  if (eval_sample.empty()) throw std::invalid_argument("welfare_bounds: empty sample");
  utilities.validate_at(eval_sample.front());
  double lo = 0.0, hi = 0.0;
  for (const Vec& x : eval_sample) {
    double d = static_cast<double>(rule.decide(x));
    double a = utilities.u11(x), b = utilities.u10(x), c = utilities.u00(x),
           e = utilities.u01(x);
    double ml = mu_lo(x), mh = mu_hi(x);
    lo += (b - (a + b) * mh) * d + (-c + (c + e) * ml) * (1.0 - d);
    hi += (b - (a + b) * ml) * d + (-c + (c + e) * mh) * (1.0 - d);
  }
  double n = static_cast<double>(eval_sample.size());
  return {lo / n, hi / n};
}

DecisionRule maxmin_rule(const BoundFn& mu_lo, const BoundFn& mu_hi,
                         const UtilitySpec& utilities) {
  DecisionRule rule;
  rule.decide = [mu_lo, mu_hi, utilities](const Vec& x) {
    double a = utilities.u11(x), b = utilities.u10(x), c = utilities.u00(x),
           e = utilities.u01(x);
    double weighted = (a + b) * mu_hi(x) + (c + e) * mu_lo(x);
    return weighted <= b + c ? 1 : 0;
  };
  return rule;
}

double regret(const DecisionRule& plug_in, const BoundFn& true_mu_lo, const BoundFn& true_mu_hi,
              const UtilitySpec& utilities, const Matrix& eval_sample) {
  DecisionRule best = maxmin_rule(true_mu_lo, true_mu_hi, utilities);
  double u_best = welfare_bounds(best, true_mu_lo, true_mu_hi, utilities, eval_sample).first;
  double u_plug = welfare_bounds(plug_in, true_mu_lo, true_mu_hi, utilities, eval_sample).first;
  return u_best - u_plug;
}

}  // namespace riskbounds
