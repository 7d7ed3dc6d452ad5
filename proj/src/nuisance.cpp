#include "riskbounds/nuisance.hpp"

#include <algorithm>

namespace riskbounds {

std::size_t NuisanceBundle::z_index(int z) const {
  auto it = std::find(z_values.begin(), z_values.end(), z);
  if (it == z_values.end()) throw std::invalid_argument("instrument value not in support");
  return static_cast<std::size_t>(it - z_values.begin());
}

const FittedModel& NuisanceBundle::model_for(const std::vector<FittedModel>& m, int fold) const {
  if (m.empty()) throw std::logic_error("nuisance model not fitted for this bounding family");
  if (fold < 1 || fold > static_cast<int>(m.size()))
    throw std::out_of_range("fold id out of range");
  return m[static_cast<std::size_t>(fold - 1)];
}

double NuisanceBundle::mu1_at(const Vec& x, int fold) const {
  return model_for(mu1_m_, fold).predict(x);
}
double NuisanceBundle::pi1_at(const Vec& x, int fold) const {
  return clip(model_for(pi1_m_, fold).predict(x), eps, 1.0 - eps);
}
double NuisanceBundle::mu0_proxy_at(const Vec& x, int fold) const {
  return clip(model_for(mu0p_m_, fold).predict(x), eps, 1.0 - eps);
}
double NuisanceBundle::gamma1_at(const Vec& x, int fold) const {
  return clip(model_for(gamma1_m_, fold).predict(x), eps, 1.0 - eps);
}
double NuisanceBundle::lambda_at(int z, const Vec& x, int fold) const {
  return model_for(lambda_m_[z_index(z)], fold).predict(x);
}
double NuisanceBundle::kappa_at(int z, const Vec& x, int fold) const {
  return model_for(kappa_m_[z_index(z)], fold).predict(x);
}
double NuisanceBundle::pz_at(int z, const Vec& x, int fold) const {
  return clip(model_for(pz_m_[z_index(z)], fold).predict(x), eps, 1.0 - eps);
}

namespace {

// Trains one nuisance for every fold on the rows outside the fold that pass
// `in_stratum`, with label `label_of`. Seeds are derived from (seed, tag,
// fold) so a fold's model is independent of that fold's records.
std::vector<FittedModel> fit_per_fold(const Dataset& data, const FoldAssignment& folds,
                                      const LearnerConfig& config, std::uint64_t tag,
                                      const std::function<bool(const Record&)>& in_stratum,
                                      const std::function<int(const Record&)>& label_of,
                                      const char* what) {
  std::vector<FittedModel> out(static_cast<std::size_t>(folds.K));
  for (int k = 1; k <= folds.K; ++k) {
    Matrix X;
    std::vector<int> y;
    for (std::size_t i = 0; i < data.n(); ++i) {
      if (folds.fold_of[i] == k) continue;
      const Record& r = data.records[i];
      if (!in_stratum(r)) continue;
      X.push_back(r.x);
      y.push_back(label_of(r));
    }
    if (X.empty())
      throw std::runtime_error(std::string("cross_fit_nuisances: empty training stratum for ") +
                               what + " in fold " + std::to_string(k));
    LearnerConfig cfg = config;
    cfg.seed = mix_seed(config.seed, mix_seed(tag, static_cast<std::uint64_t>(k)));
    out[static_cast<std::size_t>(k - 1)] = fit_learner(X, y, cfg);
  }
  return out;
}

Vec cache_column(const Dataset& data, const FoldAssignment& folds,
                 const std::vector<FittedModel>& models,
                 double lo = -1.0, double hi = 2.0) {
  Vec col(data.n());
  for (std::size_t i = 0; i < data.n(); ++i) {
    double raw = models[static_cast<std::size_t>(folds.fold_of[i] - 1)].predict(data.records[i].x);
    col[i] = clip(raw, lo, hi);
  }
  return col;
}

}  // namespace

NuisanceBundle cross_fit_nuisances(const Dataset& data, const FoldAssignment& folds,
                                   const LearnerConfig& config, const BoundingSpec& bounding,
                                   double eps) {
  if (!(eps > 0.0 && eps < 0.5)) throw std::invalid_argument("clip eps must lie in (0, 0.5)");
  if (folds.fold_of.size() != data.n())
    throw std::invalid_argument("fold assignment does not match dataset");
  if (bounding.needs_proxy() && !data.has_proxy())
    throw std::invalid_argument("proxy outcome required for this bounding family");
  if (bounding.needs_instrument() && !data.has_instrument())
    throw std::invalid_argument("instrument column required for this bounding family");

  NuisanceBundle b;
  b.eps = eps;
  b.K = folds.K;
  b.fold_of_ = folds.fold_of;

  auto all = [](const Record&) { return true; };
  auto selected = [](const Record& r) { return r.d_sel == 1; };
  auto unselected = [](const Record& r) { return r.d_sel == 0; };

  b.mu1_m_ = fit_per_fold(data, folds, config, 1, selected,
                          [](const Record& r) { return r.y_obs; }, "mu1");
  b.pi1_m_ = fit_per_fold(data, folds, config, 2, all,
                          [](const Record& r) { return r.d_sel; }, "pi1");
  b.mu1 = cache_column(data, folds, b.mu1_m_, 0.0, 1.0);
  b.pi1 = cache_column(data, folds, b.pi1_m_, eps, 1.0 - eps);

  if (bounding.needs_proxy()) {
    b.mu0p_m_ = fit_per_fold(data, folds, config, 3, unselected,
                             [](const Record& r) { return *r.y_proxy; }, "mu0_proxy");
    b.gamma1_m_ = fit_per_fold(data, folds, config, 4, selected,
                               [](const Record& r) { return r.y_obs == *r.y_proxy ? 1 : 0; },
                               "gamma1");
    b.mu0_proxy = cache_column(data, folds, b.mu0p_m_, eps, 1.0 - eps);
    b.gamma1 = cache_column(data, folds, b.gamma1_m_, eps, 1.0 - eps);
  }

  if (bounding.needs_instrument()) {
    b.z_values = data.z_support;
    if (bounding.family == BoundingFamily::IvFixed) {
      if (std::find(b.z_values.begin(), b.z_values.end(), bounding.z) == b.z_values.end())
        throw std::invalid_argument("fixed instrument value not in support");
    }
    for (std::size_t zi = 0; zi < b.z_values.size(); ++zi) {
      int z = b.z_values[zi];
      auto at_z = [z](const Record& r) { return *r.z == z; };
      std::uint64_t base = 16 + 4 * static_cast<std::uint64_t>(zi);
      b.lambda_m_.push_back(fit_per_fold(
          data, folds, config, base, at_z,
          [](const Record& r) { return r.d_sel * r.y_obs; }, "lambda_z"));
      b.kappa_m_.push_back(fit_per_fold(
          data, folds, config, base + 1, at_z,
          [](const Record& r) { return 1 - r.d_sel; }, "kappa_z"));
      b.pz_m_.push_back(fit_per_fold(
          data, folds, config, base + 2, all,
          [z](const Record& r) { return *r.z == z ? 1 : 0; }, "pz"));
      b.lambda_col.push_back(cache_column(data, folds, b.lambda_m_.back(), 0.0, 1.0));
      b.kappa_col.push_back(cache_column(data, folds, b.kappa_m_.back(), 0.0, 1.0));
      b.pz_col.push_back(cache_column(data, folds, b.pz_m_.back(), eps, 1.0 - eps));
    }
  }
  return b;
}

NuisanceBundle oracle_nuisances(const Dataset& data, const AnalyticNuisances& truth,
                                const FoldAssignment& folds, const BoundingSpec& bounding,
                                double eps) {
  if (!(eps > 0.0 && eps < 0.5)) throw std::invalid_argument("clip eps must lie in (0, 0.5)");
  if (!truth.mu1 || !truth.pi1)
    throw std::invalid_argument("oracle_nuisances: mu1 and pi1 closures required");
  if (bounding.needs_proxy() && (!truth.mu0_proxy || !truth.gamma1))
    throw std::invalid_argument("oracle_nuisances: proxy closures required");
  if (bounding.needs_instrument() && (!truth.lambda_z || !truth.kappa_z || !truth.pz))
    throw std::invalid_argument("oracle_nuisances: instrument closures required");

  NuisanceBundle b;
  b.eps = eps;
  b.K = folds.K;
  b.fold_of_ = folds.fold_of;

  auto replicate = [&](std::function<double(const Vec&)> fn) {
    return std::vector<FittedModel>(static_cast<std::size_t>(folds.K), FittedModel(std::move(fn)));
  };

  b.mu1_m_ = replicate(truth.mu1);
  b.pi1_m_ = replicate(truth.pi1);
  FoldAssignment fa;  // cache_column needs fold ids only
  fa.K = folds.K;
  fa.fold_of = folds.fold_of;
  b.mu1 = cache_column(data, fa, b.mu1_m_, 0.0, 1.0);
  b.pi1 = cache_column(data, fa, b.pi1_m_, eps, 1.0 - eps);

  if (bounding.needs_proxy()) {
    b.mu0p_m_ = replicate(truth.mu0_proxy);
    b.gamma1_m_ = replicate(truth.gamma1);
    b.mu0_proxy = cache_column(data, fa, b.mu0p_m_, eps, 1.0 - eps);
    b.gamma1 = cache_column(data, fa, b.gamma1_m_, eps, 1.0 - eps);
  }
  if (bounding.needs_instrument()) {
    b.z_values = data.z_support;
    for (int z : b.z_values) {
      auto lam = truth.lambda_z, kap = truth.kappa_z, pz = truth.pz;
      b.lambda_m_.push_back(replicate([lam, z](const Vec& x) { return lam(z, x); }));
      b.kappa_m_.push_back(replicate([kap, z](const Vec& x) { return kap(z, x); }));
      b.pz_m_.push_back(replicate([pz, z](const Vec& x) { return pz(z, x); }));
      b.lambda_col.push_back(cache_column(data, fa, b.lambda_m_.back(), 0.0, 1.0));
      b.kappa_col.push_back(cache_column(data, fa, b.kappa_m_.back(), 0.0, 1.0));
      b.pz_col.push_back(cache_column(data, fa, b.pz_m_.back(), eps, 1.0 - eps));
    }
  }
  return b;
}

}  // namespace riskbounds
