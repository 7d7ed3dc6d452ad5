#include "riskbounds/mu_learner.hpp"

namespace riskbounds {

std::vector<PseudoOutcomePair> build_pseudo_outcomes(const Dataset& data,
                                                     const NuisanceBundle& bundle,
                                                     const BoundingSpec& bounding) {
  auto terms = compute_eif_terms(data, bundle, bounding);
  std::vector<PseudoOutcomePair> out(data.n());
  for (std::size_t i = 0; i < data.n(); ++i) {
    out[i].psi_lo = terms[i].phi_mu + terms[i].lo;
    out[i].psi_hi = terms[i].phi_mu + terms[i].hi;
  }
  return out;
}

namespace {

double average_parts(const std::vector<SmootherFit>& parts, const Vec& x, bool clip01) {
  if (parts.empty()) throw std::logic_error("BoundRegressors: not fitted");
  double acc = 0.0;
  for (const auto& p : parts) acc += p.predict(x);
  acc /= static_cast<double>(parts.size());
  return clip01 ? clip(acc, 0.0, 1.0) : acc;
}

}  // namespace

double BoundRegressors::mu_lo(const Vec& x) const {
  if (lo_direct) return clip01 ? clip(lo_direct(x), 0.0, 1.0) : lo_direct(x);
  return average_parts(lo_parts, x, clip01);
}

double BoundRegressors::mu_hi(const Vec& x) const {
  if (hi_direct) return clip01 ? clip(hi_direct(x), 0.0, 1.0) : hi_direct(x);
  return average_parts(hi_parts, x, clip01);
}

BoundRegressors fit_bound_regressors(const std::vector<PseudoOutcomePair>& pseudo,
                                     const Matrix& covariates, const SmootherConfig& smoother) {
  if (pseudo.size() != covariates.size())
    throw std::invalid_argument("fit_bound_regressors: length mismatch");
  Vec ylo(pseudo.size()), yhi(pseudo.size());
  for (std::size_t i = 0; i < pseudo.size(); ++i) {
    ylo[i] = pseudo[i].psi_lo;
    yhi[i] = pseudo[i].psi_hi;
  }
  BoundRegressors out;
  out.lo_parts.push_back(fit_smoother(covariates, ylo, smoother));
  out.hi_parts.push_back(fit_smoother(covariates, yhi, smoother));
  return out;
}

namespace {

BoundRegressors two_fold_fit(const Dataset& data, const NuisanceBundle& bundle,
                             const BoundingSpec& bounding, const SmootherConfig& smoother,
                             int K, bool swap_folds) {
  auto pseudo = build_pseudo_outcomes(data, bundle, bounding);
  BoundRegressors out;
  for (int k = swap_folds ? 1 : 2; k <= K; ++k) {
    Matrix X;
    std::vector<PseudoOutcomePair> pp;
    for (std::size_t i = 0; i < data.n(); ++i) {
      if (bundle.fold_of(i) != k) continue;
      X.push_back(data.records[i].x);
      pp.push_back(pseudo[i]);
    }
    if (X.empty()) throw std::runtime_error("learn_mu_bounds: empty regression fold");
    BoundRegressors part = fit_bound_regressors(pp, X, smoother);
    out.lo_parts.push_back(std::move(part.lo_parts.front()));
    out.hi_parts.push_back(std::move(part.hi_parts.front()));
  }
  return out;
}

}  // namespace

BoundRegressors learn_mu_bounds(const Dataset& data, const FoldAssignment& folds,
                                const LearnerConfig& learner, const BoundingSpec& bounding,
                                const SmootherConfig& smoother, double eps, bool swap_folds) {
  NuisanceBundle bundle = cross_fit_nuisances(data, folds, learner, bounding, eps);
  return two_fold_fit(data, bundle, bounding, smoother, folds.K, swap_folds);
}

BoundRegressors fit_mu_bounds_from_bundle(const Dataset& data, const NuisanceBundle& bundle,
                                          const BoundingSpec& bounding,
                                          const SmootherConfig& smoother, bool swap_folds) {
  return two_fold_fit(data, bundle, bounding, smoother, bundle.K, swap_folds);
}

BoundRegressors oracle_fit(const Dataset& data, const AnalyticNuisances& truth,
                           const FoldAssignment& folds, const BoundingSpec& bounding,
                           const SmootherConfig& smoother, double eps, bool swap_folds) {
  NuisanceBundle bundle = oracle_nuisances(data, truth, folds, bounding, eps);
  return two_fold_fit(data, bundle, bounding, smoother, folds.K, swap_folds);
}

BoundRegressors plugin_fit(const Dataset& data, const LearnerConfig& learner,
                           const BoundingSpec& bounding, double eps) {
  // fit every required nuisance once on the full sample
  Matrix x_all, x_sel, x_unsel;
  std::vector<int> d_all, y_sel, yp_unsel, agree_sel;
  for (const Record& r : data.records) {
    x_all.push_back(r.x);
    d_all.push_back(r.d_sel);
    if (r.d_sel == 1) {
      x_sel.push_back(r.x);
      y_sel.push_back(r.y_obs);
      if (r.y_proxy) agree_sel.push_back(r.y_obs == *r.y_proxy ? 1 : 0);
    } else if (r.y_proxy) {
      x_unsel.push_back(r.x);
      yp_unsel.push_back(*r.y_proxy);
    }
  }
  LearnerConfig cfg = learner;
  cfg.seed = mix_seed(learner.seed, 0x706c7567);  // "plug"
  FittedModel mu1 = fit_learner(x_sel, y_sel, cfg);
  cfg.seed = mix_seed(learner.seed, 0x706c7567 + 1);
  FittedModel pi1 = fit_learner(x_all, d_all, cfg);

  AnalyticNuisances fitted;
  fitted.mu1 = [mu1](const Vec& x) { return mu1.predict(x); };
  fitted.pi1 = [pi1](const Vec& x) { return pi1.predict(x); };
  if (bounding.needs_proxy()) {
    cfg.seed = mix_seed(learner.seed, 0x706c7567 + 2);
    FittedModel m0 = fit_learner(x_unsel, yp_unsel, cfg);
    cfg.seed = mix_seed(learner.seed, 0x706c7567 + 3);
    FittedModel g1 = fit_learner(x_sel, agree_sel, cfg);
    fitted.mu0_proxy = [m0](const Vec& x) { return m0.predict(x); };
    fitted.gamma1 = [g1](const Vec& x) { return g1.predict(x); };
  }
  if (bounding.needs_instrument()) {
    auto lam_models = std::make_shared<std::vector<FittedModel>>();
    auto kap_models = std::make_shared<std::vector<FittedModel>>();
    auto pz_models = std::make_shared<std::vector<FittedModel>>();
    auto zv = std::make_shared<std::vector<int>>(data.z_support);
    for (std::size_t zi = 0; zi < zv->size(); ++zi) {
      int z = (*zv)[zi];
      Matrix xz;
      std::vector<int> yd, notd, isz;
      for (const Record& r : data.records) {
        isz.push_back(*r.z == z ? 1 : 0);
        if (*r.z != z) continue;
        xz.push_back(r.x);
        yd.push_back(r.d_sel * r.y_obs);
        notd.push_back(1 - r.d_sel);
      }
      cfg.seed = mix_seed(learner.seed, 0x70600 + 3 * zi);
      lam_models->push_back(fit_learner(xz, yd, cfg));
      cfg.seed = mix_seed(learner.seed, 0x70600 + 3 * zi + 1);
      kap_models->push_back(fit_learner(xz, notd, cfg));
      cfg.seed = mix_seed(learner.seed, 0x70600 + 3 * zi + 2);
      pz_models->push_back(fit_learner(x_all, isz, cfg));
    }
    auto index_of = [zv](int z) {
      for (std::size_t i = 0; i < zv->size(); ++i)
        if ((*zv)[i] == z) return i;
      throw std::invalid_argument("plugin_fit: unknown instrument value");
    };
    fitted.lambda_z = [lam_models, index_of](int z, const Vec& x) {
      return (*lam_models)[index_of(z)].predict(x);
    };
    fitted.kappa_z = [kap_models, index_of](int z, const Vec& x) {
      return (*kap_models)[index_of(z)].predict(x);
    };
    fitted.pz = [pz_models, index_of](int z, const Vec& x) {
      return (*pz_models)[index_of(z)].predict(x);
    };
  }

  FoldAssignment trivial;
  trivial.K = 1;
  trivial.fold_of.assign(data.n(), 1);
  auto bundle = std::make_shared<NuisanceBundle>(
      oracle_nuisances(data, fitted, trivial, bounding, eps));
  BoundingSpec spec = bounding;
  if (spec.family == BoundingFamily::ProxyGeneral && !spec.alpha_explicit) {
    spec.alpha = resolve_alpha(spec, *bundle, data);
    spec.alpha_explicit = true;
  }

  BoundRegressors out;
  out.lo_direct = [bundle, spec](const Vec& x) {
    double dlo = confounding_bounds_at(x, spec, *bundle, 1).first;
    double mu1 = bundle->mu1_at(x, 1);
    double pi0 = 1.0 - bundle->pi1_at(x, 1);
    return mu1 + pi0 * dlo;
  };
  out.hi_direct = [bundle, spec](const Vec& x) {
    double dhi = confounding_bounds_at(x, spec, *bundle, 1).second;
    double mu1 = bundle->mu1_at(x, 1);
    double pi0 = 1.0 - bundle->pi1_at(x, 1);
    return mu1 + pi0 * dhi;
  };
  return out;
}

double imse(const std::function<double(const Vec&)>& predictor,
            const std::function<double(const Vec&)>& truth, const Matrix& eval_sample) {
  if (eval_sample.empty()) throw std::invalid_argument("imse: empty evaluation sample");
  double acc = 0.0;
  for (const Vec& x : eval_sample) {
    double d = predictor(x) - truth(x);
    acc += d * d;
  }
  return acc / static_cast<double>(eval_sample.size());
}

}  // namespace riskbounds
