#pragma once

// Researcher-specified restrictions on the confounding function
// delta(x) = P(Y*=1 | D=0, X=x) - P(Y*=1 | D=1, X=x).

#include <optional>
#include <stdexcept>
#include <string>

namespace riskbounds {

enum class BoundingFamily {
  Unconfounded,           // delta == 0
  WorstCase,              // [-mu1, 1 - mu1]
  NonparametricOutcome,   // [(gamma_lo - 1) mu1, (gamma_hi - 1) mu1]
  ProxySimple,            // proxy outcome, restricted form
  ProxyGeneral,           // proxy outcome, absolute-value form (smoothed)
  IvFixed,                // instrument at a single value z
  IvSmoothed,             // log-sum-exp intersection over all z
};

struct BoundingSpec {
  BoundingFamily family = BoundingFamily::Unconfounded;
  double gamma_lo = 1.0;          // NonparametricOutcome
  double gamma_hi = 1.0;
  int z = 0;                      // IvFixed
  double alpha = 20.0;            // IvSmoothed / ProxyGeneral smoothing
  bool alpha_explicit = false;    // ProxyGeneral defaults alpha from the data range

  static BoundingSpec unconfounded() { return {}; }
  static BoundingSpec worst_case() { return {BoundingFamily::WorstCase}; }
  static BoundingSpec nonparametric(double gamma_lo, double gamma_hi) {
    if (!(gamma_lo > 0.0) || !(gamma_hi >= gamma_lo))
      throw std::invalid_argument("nonparametric bounds require 0 < gamma_lo <= gamma_hi");
    BoundingSpec s{BoundingFamily::NonparametricOutcome};
    s.gamma_lo = gamma_lo;
    s.gamma_hi = gamma_hi;
    return s;
  }
  static BoundingSpec proxy_simple() { return {BoundingFamily::ProxySimple}; }
  static BoundingSpec proxy_general(std::optional<double> alpha = std::nullopt) {
    BoundingSpec s{BoundingFamily::ProxyGeneral};
    if (alpha) {
      if (!(*alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
      s.alpha = *alpha;
      s.alpha_explicit = true;
    }
    return s;
  }
  static BoundingSpec iv_fixed(int z) {
    BoundingSpec s{BoundingFamily::IvFixed};
    s.z = z;
    return s;
  }
  static BoundingSpec iv_smoothed(double alpha) {
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
    BoundingSpec s{BoundingFamily::IvSmoothed};
    s.alpha = alpha;
    s.alpha_explicit = true;
    return s;
  }

  bool needs_proxy() const {
    return family == BoundingFamily::ProxySimple || family == BoundingFamily::ProxyGeneral;
  }
  bool needs_instrument() const {
    return family == BoundingFamily::IvFixed || family == BoundingFamily::IvSmoothed;
  }

  std::string family_name() const;
};

}  // namespace riskbounds
