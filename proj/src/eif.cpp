#include "riskbounds/eif.hpp"

#include <algorithm>
#include <iostream>

namespace riskbounds {

double lse(const Vec& values, double alpha) {
  if (values.empty()) throw std::invalid_argument("lse: empty vector");
  if (alpha == 0.0) throw std::invalid_argument("lse: alpha must be nonzero");
  // shift by the extreme argument in v-space: the correction log(s)/alpha is
  // then exactly signed, so max(v) <= g_a(v) (resp. g_{-a}(v) <= min(v))
  // holds in floating point, not just in exact arithmetic
  double vext = values[0];
  for (double v : values) vext = alpha > 0.0 ? std::max(vext, v) : std::min(vext, v);
  double s = 0.0;
  for (double v : values) s += std::exp(alpha * (v - vext));
  return vext + std::log(s) / alpha;
}

Vec softmax_weights(const Vec& values, double alpha) {
  if (values.empty()) throw std::invalid_argument("softmax_weights: empty vector");
  double m = alpha * values[0];
  for (double v : values) m = std::max(m, alpha * v);
  Vec w(values.size());
  double s = 0.0;
  for (std::size_t j = 0; j < values.size(); ++j) {
    w[j] = std::exp(alpha * values[j] - m);
    s += w[j];
  }
  for (double& x : w) x /= s;
  return w;
}

namespace {

struct Obs {
  double d, y;
  double mu1, pi1, pi0;
};

Obs obs_at(const NuisanceBundle& b, const Dataset& data, std::size_t i) {
  const Record& r = data.records[i];
  Obs o;
  o.d = static_cast<double>(r.d_sel);
  o.y = static_cast<double>(r.y_obs);
  o.mu1 = b.mu1[i];
  o.pi1 = b.pi1[i];
  o.pi0 = 1.0 - o.pi1;
  return o;
}

}  // namespace

double eif_mu(const NuisanceBundle& b, const Dataset& data, std::size_t i) {
  Obs o = obs_at(b, data, i);
  return o.mu1 + o.d / o.pi1 * (o.y - o.mu1);
}

double eif_pi_mu(const NuisanceBundle& b, const Dataset& data, std::size_t i) {
  Obs o = obs_at(b, data, i);
  return ((1.0 - o.d) - o.pi0) * o.mu1 + o.d / o.pi1 * (o.y - o.mu1) * o.pi0 + o.pi0 * o.mu1;
}

double eif_mu0_proxy(const NuisanceBundle& b, const Dataset& data, std::size_t i) {
  Obs o = obs_at(b, data, i);
  double yp = static_cast<double>(*data.records[i].y_proxy);
  double mu0p = b.mu0_proxy[i];
  return mu0p + (1.0 - o.d) / (1.0 - o.pi1) * (yp - mu0p);
}

double eif_gamma1(const NuisanceBundle& b, const Dataset& data, std::size_t i) {
  Obs o = obs_at(b, data, i);
  double yp = static_cast<double>(*data.records[i].y_proxy);
  double agree = (o.y == yp) ? 1.0 : 0.0;
  double g1 = b.gamma1[i];
  return g1 + o.d / o.pi1 * (agree - g1);
}

double eif_pi_mu0_proxy(const NuisanceBundle& b, const Dataset& data, std::size_t i) {
  Obs o = obs_at(b, data, i);
  double yp = static_cast<double>(*data.records[i].y_proxy);
  double mu0p = b.mu0_proxy[i];
  return o.pi0 * mu0p + ((1.0 - o.d) - o.pi0) * mu0p +
         (1.0 - o.d) / (1.0 - o.pi1) * (yp - mu0p) * o.pi0;
}

double eif_pi_gamma1(const NuisanceBundle& b, const Dataset& data, std::size_t i) {
  Obs o = obs_at(b, data, i);
  double yp = static_cast<double>(*data.records[i].y_proxy);
  double agree = (o.y == yp) ? 1.0 : 0.0;
  double g1 = b.gamma1[i];
  return o.pi0 * g1 + ((1.0 - o.d) - o.pi0) * g1 + o.d / o.pi1 * (agree - g1) * o.pi0;
}

double eif_lambda(const NuisanceBundle& b, const Dataset& data, std::size_t i, int z) {
  const Record& r = data.records[i];
  std::size_t zi = b.z_index(z);
  double ind = (*r.z == z) ? 1.0 : 0.0;
  double lam = b.lambda_col[zi][i];
  double pz = b.pz_col[zi][i];
  double yd = static_cast<double>(r.d_sel * r.y_obs);
  return ind / pz * (yd - lam) + lam;
}

double eif_kappa(const NuisanceBundle& b, const Dataset& data, std::size_t i, int z) {
  const Record& r = data.records[i];
  std::size_t zi = b.z_index(z);
  double ind = (*r.z == z) ? 1.0 : 0.0;
  double kap = b.kappa_col[zi][i];
  double pz = b.pz_col[zi][i];
  return ind / pz * ((1.0 - static_cast<double>(r.d_sel)) - kap) + kap;
}

std::pair<double, double> eif_iv_bounds(const NuisanceBundle& b, const Dataset& data,
                                        std::size_t i, double alpha) {
  if (b.z_values.empty()) throw std::invalid_argument("eif_iv_bounds: no instrument nuisances");
  const std::size_t p = b.z_values.size();
  double phi_m = eif_mu(b, data, i);
  double mu1 = b.mu1[i];

  Vec v_lo(p), v_hi(p), phi_lo(p), phi_hi(p);
  for (std::size_t zi = 0; zi < p; ++zi) {
    int z = b.z_values[zi];
    double lam = b.lambda_col[zi][i];
    double kap = b.kappa_col[zi][i];
    v_lo[zi] = lam - mu1;
    v_hi[zi] = kap + lam - mu1;
    phi_lo[zi] = eif_lambda(b, data, i, z) - phi_m;
    phi_hi[zi] = eif_kappa(b, data, i, z) + eif_lambda(b, data, i, z) - phi_m;
  }
  Vec w_lo = softmax_weights(v_lo, alpha);
  Vec w_hi = softmax_weights(v_hi, -alpha);
  double lo = lse(v_lo, alpha);
  double hi = lse(v_hi, -alpha);
  for (std::size_t zi = 0; zi < p; ++zi) {
    lo += w_lo[zi] * (phi_lo[zi] - v_lo[zi]);
    hi += w_hi[zi] * (phi_hi[zi] - v_hi[zi]);
  }
  return {lo, hi};
}

std::pair<double, double> confounding_bounds_at(const Vec& x, const BoundingSpec& spec,
                                                const NuisanceBundle& b, int fold) {
  switch (spec.family) {
    case BoundingFamily::Unconfounded:
      return {0.0, 0.0};
    case BoundingFamily::WorstCase: {
      double mu1 = b.mu1_at(x, fold);
      return {-mu1, 1.0 - mu1};
    }
    case BoundingFamily::NonparametricOutcome: {
      double mu1 = b.mu1_at(x, fold);
      return {(spec.gamma_lo - 1.0) * mu1, (spec.gamma_hi - 1.0) * mu1};
    }
    case BoundingFamily::ProxySimple: {
      double mu1 = b.mu1_at(x, fold);
      double g1 = b.gamma1_at(x, fold);
      double m0 = b.mu0_proxy_at(x, fold);
      return {1.0 - g1 - m0 - mu1, 1.0 - g1 + m0 - mu1};
    }
    case BoundingFamily::ProxyGeneral: {
      double mu1 = b.mu1_at(x, fold);
      double g1 = b.gamma1_at(x, fold);
      double m0 = b.mu0_proxy_at(x, fold);
      return {std::abs(1.0 - g1 - m0) - mu1, 1.0 - std::abs(g1 - m0) - mu1};
    }
    case BoundingFamily::IvFixed: {
      double mu1 = b.mu1_at(x, fold);
      double pi0 = 1.0 - b.pi1_at(x, fold);
      double lam = b.lambda_at(spec.z, x, fold);
      double kap = b.kappa_at(spec.z, x, fold);
      return {(lam - mu1) / pi0, (kap + lam - mu1) / pi0};
    }
    case BoundingFamily::IvSmoothed: {
      double mu1 = b.mu1_at(x, fold);
      double pi0 = 1.0 - b.pi1_at(x, fold);
      Vec v_lo, v_hi;
      for (int z : b.z_values) {
        double lam = b.lambda_at(z, x, fold);
        double kap = b.kappa_at(z, x, fold);
        v_lo.push_back(lam - mu1);
        v_hi.push_back(kap + lam - mu1);
      }
      return {lse(v_lo, spec.alpha) / pi0, lse(v_hi, -spec.alpha) / pi0};
    }
  }
  throw std::logic_error("confounding_bounds_at: unknown family");
}

double resolve_alpha(const BoundingSpec& spec, const NuisanceBundle& b, const Dataset& data) {
  if (spec.family != BoundingFamily::ProxyGeneral || spec.alpha_explicit) return spec.alpha;
  double lo = 1e300, hi = -1e300;
  for (std::size_t i = 0; i < data.n(); ++i) {
    double t = 1.0 - b.gamma1[i] - b.mu0_proxy[i];
    double r = b.gamma1[i] - b.mu0_proxy[i];
    lo = std::min({lo, t, -t, r, -r});
    hi = std::max({hi, t, -t, r, -r});
  }
  double range = std::max(hi - lo, 0.05);
  return 20.0 / range;
}

EifTerms eif_terms_at(const NuisanceBundle& b, const Dataset& data, std::size_t i,
                      const BoundingSpec& spec, double alpha) {
  EifTerms t;
  t.phi_mu = eif_mu(b, data, i);
  t.phi_pi_mu = eif_pi_mu(b, data, i);
  const double one_minus_d = 1.0 - static_cast<double>(data.records[i].d_sel);

  switch (spec.family) {
    case BoundingFamily::Unconfounded:
      t.lo = t.hi = 0.0;
      t.lfp_lo = t.lfp_hi = 0.0;
      t.lfp_weight = one_minus_d;
      break;
    case BoundingFamily::WorstCase:
      t.lo = -t.phi_pi_mu;
      t.hi = one_minus_d - t.phi_pi_mu;
      t.lfp_lo = -t.phi_mu;
      t.lfp_hi = 1.0 - t.phi_mu;
      t.lfp_weight = one_minus_d;
      break;
    case BoundingFamily::NonparametricOutcome:
      t.lo = (spec.gamma_lo - 1.0) * t.phi_pi_mu;
      t.hi = (spec.gamma_hi - 1.0) * t.phi_pi_mu;
      t.lfp_lo = (spec.gamma_lo - 1.0) * t.phi_mu;
      t.lfp_hi = (spec.gamma_hi - 1.0) * t.phi_mu;
      t.lfp_weight = one_minus_d;
      break;
    case BoundingFamily::ProxySimple: {
      double pg = eif_pi_gamma1(b, data, i);
      double pm = eif_pi_mu0_proxy(b, data, i);
      t.lo = one_minus_d - pg - pm - t.phi_pi_mu;
      t.hi = one_minus_d - pg + pm - t.phi_pi_mu;
      double g = eif_gamma1(b, data, i);
      double m = eif_mu0_proxy(b, data, i);
      t.lfp_lo = 1.0 - g - m - t.phi_mu;
      t.lfp_hi = 1.0 - g + m - t.phi_mu;
      t.lfp_weight = one_minus_d;
      break;
    }
    case BoundingFamily::ProxyGeneral: {
      const Record& r = data.records[i];
      double d = static_cast<double>(r.d_sel);
      double y = static_cast<double>(r.y_obs);
      double yp = static_cast<double>(*r.y_proxy);
      double g1 = b.gamma1[i], m0 = b.mu0_proxy[i];
      double pi1 = b.pi1[i], pi0 = 1.0 - pi1;
      double agree = (y == yp) ? 1.0 : 0.0;
      // centered residual corrections of gamma1 and mu0_proxy
      double cg = d / pi1 * (agree - g1);
      double cm = (1.0 - d) / (1.0 - pi1) * (yp - m0);

      double tt = 1.0 - g1 - m0;  // |tt| approximated by g_alpha(tt, -tt)
      Vec v{tt, -tt};
      Vec sv = softmax_weights(v, alpha);
      double abs_lo = lse(v, alpha);
      double corr_lo = (sv[1] - sv[0]) * (cg + cm);

      double rr = g1 - m0;  // |rr|
      Vec w{rr, -rr};
      Vec sw = softmax_weights(w, alpha);
      double abs_hi = lse(w, alpha);
      double corr_hi = (sw[0] - sw[1]) * (cg - cm);

      // delta-scale terms for the fractional program
      t.lfp_lo = abs_lo + corr_lo - t.phi_mu;
      t.lfp_hi = 1.0 - abs_hi - corr_hi - t.phi_mu;
      t.lfp_weight = one_minus_d;
      // pi0-delta scale: EIF of E[pi0 f] is (1-D) f + pi0 * (corrections of f)
      t.lo = one_minus_d * abs_lo + pi0 * corr_lo - t.phi_pi_mu;
      t.hi = one_minus_d * (1.0 - abs_hi) - pi0 * corr_hi - t.phi_pi_mu;
      break;
    }
    case BoundingFamily::IvFixed: {
      double lam = eif_lambda(b, data, i, spec.z);
      double kap = eif_kappa(b, data, i, spec.z);
      t.lo = lam - t.phi_mu;
      t.hi = kap + lam - t.phi_mu;
      t.lfp_lo = t.lo;
      t.lfp_hi = t.hi;
      t.lfp_weight = 1.0;
      break;
    }
    case BoundingFamily::IvSmoothed: {
      auto [lo, hi] = eif_iv_bounds(b, data, i, alpha);
      t.lo = lo;
      t.hi = hi;
      t.lfp_lo = lo;
      t.lfp_hi = hi;
      t.lfp_weight = 1.0;
      break;
    }
  }
  return t;
}

std::vector<EifTerms> compute_eif_terms(const Dataset& data, const NuisanceBundle& b,
                                        const BoundingSpec& spec, bool warn) {
  if (spec.needs_proxy() && !b.has_proxy())
    throw std::invalid_argument("bounding family needs proxy nuisances");
  if (spec.needs_instrument() && !b.has_instrument())
    throw std::invalid_argument("bounding family needs instrument nuisances");

  if (warn && spec.family == BoundingFamily::ProxySimple) {
    double g_bar = mean(b.gamma1), m_bar = mean(b.mu0_proxy);
    if (m_bar > g_bar || m_bar + g_bar > 1.0)
      std::cerr << "warning: proxy validity conditions fail on plug-in averages "
                << "(mean mu0_proxy=" << m_bar << ", mean gamma1=" << g_bar
                << "); consider the general proxy family\n";
  }

  double alpha = resolve_alpha(spec, b, data);
  std::vector<EifTerms> out;
  out.reserve(data.n());
  for (std::size_t i = 0; i < data.n(); ++i)
    out.push_back(eif_terms_at(b, data, i, spec, alpha));
  return out;
}

}  // namespace riskbounds
