#pragma once

// Cross-fitted estimation of the identified nuisance functions. The bundle
// caches per-record predictions evaluated with the fold-appropriate model
// (trained without that fold) and keeps the fitted models for prediction at
// arbitrary covariate points.

#include <functional>
#include <optional>

#include "riskbounds/bounding.hpp"
#include "riskbounds/data.hpp"
#include "riskbounds/learners.hpp"

namespace riskbounds {

inline double predict_clipped(const FittedModel& model, const Vec& x, double eps) {
  if (!(eps > 0.0 && eps < 0.5)) throw std::invalid_argument("clip eps must lie in (0, 0.5)");
  return clip(model.predict(x), eps, 1.0 - eps);
}

// Analytic nuisances for oracle mode (simulation injects these).
struct AnalyticNuisances {
  std::function<double(const Vec&)> mu1;   // P(Y*=1 | D=1, x)
  std::function<double(const Vec&)> pi1;   // P(D=1 | x)
  std::function<double(const Vec&)> mu0_proxy;          // P(Yproxy=1 | D=0, x)
  std::function<double(const Vec&)> gamma1;             // P(Y*=Yproxy | D=1, x)
  std::function<double(int, const Vec&)> lambda_z;      // E[Y D | x, Z=z]
  std::function<double(int, const Vec&)> kappa_z;       // P(D=0 | x, Z=z)
  std::function<double(int, const Vec&)> pz;            // P(Z=z | x)
};

class NuisanceBundle {
 public:
  double eps = 0.01;
  int K = 0;

  // fold-resolved predictions aligned with the dataset
  Vec mu1, pi1;                       // pi1 clipped to [eps, 1-eps]
  Vec mu0_proxy, gamma1;              // clipped; empty unless proxy nuisances fitted
  std::vector<int> z_values;          // instrument support, empty unless IV fitted
  std::vector<Vec> lambda_col, kappa_col, pz_col;  // indexed [z][record]; pz clipped

  bool has_proxy() const { return !mu0_proxy.empty(); }
  bool has_instrument() const { return !z_values.empty(); }
  std::size_t z_index(int z) const;

  int fold_of(std::size_t i) const { return fold_of_[i]; }

  // model-level prediction for arbitrary covariates (fold in 1..K)
  double mu1_at(const Vec& x, int fold) const;
  double pi1_at(const Vec& x, int fold) const;        // clipped
  double mu0_proxy_at(const Vec& x, int fold) const;  // clipped
  double gamma1_at(const Vec& x, int fold) const;     // clipped
  double lambda_at(int z, const Vec& x, int fold) const;
  double kappa_at(int z, const Vec& x, int fold) const;
  double pz_at(int z, const Vec& x, int fold) const;  // clipped

  friend NuisanceBundle cross_fit_nuisances(const Dataset&, const FoldAssignment&,
                                            const LearnerConfig&, const BoundingSpec&, double);
  friend NuisanceBundle oracle_nuisances(const Dataset&, const AnalyticNuisances&,
                                         const FoldAssignment&, const BoundingSpec&, double);

 private:
  std::vector<int> fold_of_;
  std::vector<FittedModel> mu1_m_, pi1_m_, mu0p_m_, gamma1_m_;        // one per fold
  std::vector<std::vector<FittedModel>> lambda_m_, kappa_m_, pz_m_;    // [z][fold]

  const FittedModel& model_for(const std::vector<FittedModel>& m, int fold) const;
};

// Fits every nuisance the bounding family requires, fold by fold, training
// each fold's models only on observations outside that fold.
NuisanceBundle cross_fit_nuisances(const Dataset& data, const FoldAssignment& folds,
                                   const LearnerConfig& config, const BoundingSpec& bounding,
                                   double eps = 0.01);

// Oracle bypass: wraps analytic nuisance functions behind the same interface,
// so downstream estimators consume them identically to fitted models.
NuisanceBundle oracle_nuisances(const Dataset& data, const AnalyticNuisances& truth,
                                const FoldAssignment& folds, const BoundingSpec& bounding,
                                double eps = 0.01);

}  // namespace riskbounds
