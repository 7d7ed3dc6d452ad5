#include "riskbounds/overall.hpp"

namespace riskbounds {

Cov2 estimate_covariance(const Vec& per_obs_lower, const Vec& per_obs_upper) {
  const std::size_t n = per_obs_lower.size();
  if (n < 2) throw std::invalid_argument("estimate_covariance: need n >= 2");
  if (per_obs_upper.size() != n)
    throw std::invalid_argument("estimate_covariance: length mismatch");
  double ml = mean(per_obs_lower), mu = mean(per_obs_upper);
  double sll = 0.0, suu = 0.0, slu = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double dl = per_obs_lower[i] - ml, du = per_obs_upper[i] - mu;
    sll += dl * dl;
    suu += du * du;
    slu += dl * du;
  }
  double inv = 1.0 / static_cast<double>(n);
  return {{{suu * inv, slu * inv}, {slu * inv, sll * inv}}};
}

void confidence_intervals(BoundsEstimate& est, double level) {
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("level must lie in (0,1)");
  if (!est.has_cov) throw std::logic_error("confidence_intervals: covariance not computed");
  double z = normal_quantile(1.0 - (1.0 - level) / 2.0);
  double hw_u = z * std::sqrt(std::max(est.cov[0][0], 0.0) / static_cast<double>(est.n));
  double hw_l = z * std::sqrt(std::max(est.cov[1][1], 0.0) / static_cast<double>(est.n));
  est.level = level;
  est.ci_upper = {est.upper - hw_u, est.upper + hw_u};
  est.ci_lower = {est.lower - hw_l, est.lower + hw_l};
  est.has_ci = true;
}

BoundsEstimate estimate_overall_bounds(const Dataset& data, const Score& score,
                                       const PerformanceSpec& spec, const BoundingSpec& bounding,
                                       const NuisanceBundle& bundle, double level) {
  if (spec.estimand_class() != EstimandClass::Overall)
    throw std::invalid_argument("estimate_overall_bounds: spec is not an overall-class kind");

  const double aux = aux_probability(spec, data, score);
  auto terms = compute_eif_terms(data, bundle, bounding);

  BoundsEstimate est;
  est.n = data.n();
  est.per_obs_lower.resize(data.n());
  est.per_obs_upper.resize(data.n());
  for (std::size_t i = 0; i < data.n(); ++i) {
    BetaTerms bt = beta_terms(spec, score.at(data.records[i], i), aux);
    const EifTerms& t = terms[i];
    double up_sel = bt.beta1 > 0.0 ? t.hi : t.lo;
    double lo_sel = bt.beta1 > 0.0 ? t.lo : t.hi;
    est.per_obs_upper[i] = bt.beta0 + bt.beta1 * t.phi_mu + bt.beta1 * up_sel;
    est.per_obs_lower[i] = bt.beta0 + bt.beta1 * t.phi_mu + bt.beta1 * lo_sel;
  }
  est.upper = mean(est.per_obs_upper);
  est.lower = mean(est.per_obs_lower);
  est.cov = estimate_covariance(est.per_obs_lower, est.per_obs_upper);
  est.has_cov = true;
  confidence_intervals(est, level);
  return est;
}

BoundsEstimate estimate_overall_disparity_bounds(const Dataset& data, const Score& score,
                                                 const PerformanceSpec& spec,
                                                 const BoundingSpec& bounding,
                                                 const NuisanceBundle& bundle,
                                                 std::optional<double> group_prob, double level) {
  if (spec.estimand_class() != EstimandClass::Overall)
    throw std::invalid_argument("disparity bounds: spec is not an overall-class kind");
  if (!data.has_group()) throw std::invalid_argument("disparity bounds: group column missing");

  std::size_t n1 = 0;
  for (const auto& r : data.records) n1 += static_cast<std::size_t>(*r.g);
  if (n1 == 0 || n1 == data.n())
    throw std::invalid_argument("disparity bounds: both groups must be present");
  double p1 = group_prob ? *group_prob : static_cast<double>(n1) / static_cast<double>(data.n());
  if (!(p1 > 0.0 && p1 < 1.0)) throw std::invalid_argument("group probability must lie in (0,1)");
  double p0 = 1.0 - p1;

  const double aux = aux_probability(spec, data, score);
  auto terms = compute_eif_terms(data, bundle, bounding);

  BoundsEstimate est;
  est.n = data.n();
  est.per_obs_lower.resize(data.n());
  est.per_obs_upper.resize(data.n());
  for (std::size_t i = 0; i < data.n(); ++i) {
    const Record& r = data.records[i];
    BetaTerms bt = beta_terms(spec, score.at(r, i), aux);
    double gsign = (*r.g == 1) ? 1.0 / p1 : -1.0 / p0;
    double tb0 = gsign * bt.beta0;
    double tb1 = gsign * bt.beta1;
    const EifTerms& t = terms[i];
    // nu_hi = 1{tilde beta1 >= 0} pairs the upper confounding end with the
    // upper disparity bound; ties at zero contribute nothing either way
    double up_sel = tb1 >= 0.0 ? t.hi : t.lo;
    double lo_sel = tb1 >= 0.0 ? t.lo : t.hi;
    est.per_obs_upper[i] = tb0 + tb1 * t.phi_mu + tb1 * up_sel;
    est.per_obs_lower[i] = tb0 + tb1 * t.phi_mu + tb1 * lo_sel;
  }
  est.upper = mean(est.per_obs_upper);
  est.lower = mean(est.per_obs_lower);
  est.cov = estimate_covariance(est.per_obs_lower, est.per_obs_upper);
  est.has_cov = true;
  confidence_intervals(est, level);
  return est;
}

}  // namespace riskbounds
