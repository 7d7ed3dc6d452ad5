#pragma once

// Second-stage regression menu, restricted to linear smoothers (k-NN
// averaging and ridge on raw or squared-augmented features) so the
// pseudo-outcome regression stability condition holds by construction.

#include <cstdint>

#include "riskbounds/common.hpp"

namespace riskbounds {

enum class SmootherKind { Knn, Ridge };

struct SmootherConfig {
  SmootherKind kind = SmootherKind::Ridge;
  int knn_k = 50;
  double ridge_lambda = 1e-3;  // scaled by n inside the solver; intercept free
  int degree = 1;              // 1 = linear, 2 = adds per-coordinate squares
  std::uint64_t seed = 0;

  static SmootherConfig knn(int k);
  static SmootherConfig ridge(double lambda, int degree = 1);
};

class SmootherFit {
 public:
  double predict(const Vec& x) const;

  SmootherKind kind() const { return cfg_.kind; }
  const SmootherConfig& config() const { return cfg_; }
  std::size_t input_dim() const { return input_dim_; }

  // ridge internals exposed for serialization
  const Vec& coefficients() const { return coef_; }
  double intercept() const { return intercept_; }
  const Vec& feature_means() const { return means_; }
  const Vec& feature_sds() const { return sds_; }
  const Matrix& train_x() const { return train_x_; }
  const Vec& train_y() const { return train_y_; }

  static SmootherFit make_ridge(SmootherConfig cfg, std::size_t input_dim, Vec means, Vec sds,
                                Vec coef, double intercept);
  static SmootherFit make_knn(SmootherConfig cfg, Matrix train_x, Vec train_y);

  friend SmootherFit fit_smoother(const Matrix& X, const Vec& y, const SmootherConfig& cfg);

 private:
  SmootherConfig cfg_;
  std::size_t input_dim_ = 0;
  // ridge state (standardized expanded features)
  Vec means_, sds_, coef_;
  double intercept_ = 0.0;
  // knn state
  Matrix train_x_;
  Vec train_y_;

  Vec expand(const Vec& x) const;
};

SmootherFit fit_smoother(const Matrix& X, const Vec& y, const SmootherConfig& cfg);

}  // namespace riskbounds
