#pragma once

// Per-observation uncentered efficient influence function terms and the
// confounding-function bounds for each bounding family. Everything downstream
// (overall bounds, fractional programs, pseudo-outcome regression) consumes
// the terms computed here.

#include "riskbounds/bounding.hpp"
#include "riskbounds/data.hpp"
#include "riskbounds/nuisance.hpp"

namespace riskbounds {

// log-sum-exp g_alpha(v) = (1/alpha) log sum_j exp(alpha v_j), computed with a
// max shift. alpha > 0 approximates max(v), alpha < 0 approximates min(v).
double lse(const Vec& values, double alpha);

// Gradient of lse: softmax(alpha * v). Nonnegative, sums to one.
Vec softmax_weights(const Vec& values, double alpha);

// phi_mu = mu1 + D/pi1 (Y - mu1), uncentered EIF for E[mu1(X)]
double eif_mu(const NuisanceBundle& bundle, const Dataset& data, std::size_t i);

// phi_pimu = ((1-D) - pi0) mu1 + D/pi1 (Y - mu1) pi0 + pi0 mu1,
// uncentered EIF for E[pi0(X) mu1(X)]
double eif_pi_mu(const NuisanceBundle& bundle, const Dataset& data, std::size_t i);

// Proxy-outcome EIFs (Yp = proxy outcome, A = 1{Y = Yp} among selected)
double eif_mu0_proxy(const NuisanceBundle& bundle, const Dataset& data, std::size_t i);
double eif_gamma1(const NuisanceBundle& bundle, const Dataset& data, std::size_t i);
double eif_pi_mu0_proxy(const NuisanceBundle& bundle, const Dataset& data, std::size_t i);
double eif_pi_gamma1(const NuisanceBundle& bundle, const Dataset& data, std::size_t i);

// Instrument EIFs at instrument value z
double eif_lambda(const NuisanceBundle& bundle, const Dataset& data, std::size_t i, int z);
double eif_kappa(const NuisanceBundle& bundle, const Dataset& data, std::size_t i, int z);

// Smoothed-intersection EIF pair (phi_dlo, phi_dhi) for the log-sum-exp
// bounds on pi0(X) delta(X); gradient-weighted centered corrections.
std::pair<double, double> eif_iv_bounds(const NuisanceBundle& bundle, const Dataset& data,
                                        std::size_t i, double alpha);

// Plug-in confounding bounds (dlo, dhi) on the delta scale at arbitrary x.
std::pair<double, double> confounding_bounds_at(const Vec& x, const BoundingSpec& spec,
                                                const NuisanceBundle& bundle, int fold);

struct EifTerms {
  double phi_mu = 0.0;
  double phi_pi_mu = 0.0;
  // contributions to the endpoints of E[pi0(X) delta(X)] (overall bounds,
  // pseudo-outcome regression): population endpoints are E[lo] and E[hi]
  double lo = 0.0;
  double hi = 0.0;
  // box on the free per-observation term in the fractional program, with its
  // weight in the numerator/denominator sums
  double lfp_lo = 0.0;
  double lfp_hi = 0.0;
  double lfp_weight = 0.0;
};

// Resolved smoothing parameter for ProxyGeneral: alpha = 20 / (data range of
// the absolute-value arguments) unless set explicitly.
double resolve_alpha(const BoundingSpec& spec, const NuisanceBundle& bundle,
                     const Dataset& data);

// Computes all terms for one record. `alpha` must come from resolve_alpha for
// ProxyGeneral, or spec.alpha otherwise.
EifTerms eif_terms_at(const NuisanceBundle& bundle, const Dataset& data, std::size_t i,
                      const BoundingSpec& spec, double alpha);

// Convenience: all records. Emits a warning to stderr when the ProxySimple
// validity conditions fail on plug-in averages.
std::vector<EifTerms> compute_eif_terms(const Dataset& data, const NuisanceBundle& bundle,
                                        const BoundingSpec& spec, bool warn = true);

}  // namespace riskbounds
