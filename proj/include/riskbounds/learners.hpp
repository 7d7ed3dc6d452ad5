#pragma once

// In-repo supervised learners for nuisance estimation. Three families:
// ridge-penalized logistic regression, k-nearest-neighbor, and gradient
// boosted stumps. All predict probabilities in [0,1].

#include <cstdint>
#include <functional>
#include <memory>

#include "riskbounds/common.hpp"

namespace riskbounds {

enum class LearnerFamily { RegularizedLogistic, KNearestNeighbor, BoostedStumps };

struct LearnerConfig {
  LearnerFamily family = LearnerFamily::RegularizedLogistic;
  double logistic_penalty = 1e-3;  // ridge penalty on slopes (intercept free)
  int knn_k = 25;
  int boost_rounds = 200;
  double boost_learning_rate = 0.1;
  int boost_min_leaf = 10;
  std::uint64_t seed = 0;

  static LearnerConfig logistic(double penalty = 1e-3);
  static LearnerConfig knn(int k);
  static LearnerConfig boosted(int rounds = 200, double lr = 0.1);
};

class FittedModel {
 public:
  FittedModel() = default;
  explicit FittedModel(std::function<double(const Vec&)> fn) : fn_(std::move(fn)) {}

  double predict(const Vec& x) const {
    if (!fn_) throw std::logic_error("FittedModel: predict on empty model");
    return fn_(x);
  }
  bool valid() const { return static_cast<bool>(fn_); }

  static FittedModel constant(double p);

 private:
  std::function<double(const Vec&)> fn_;
};

// Fits one learner on (features, binary labels). Single-class label sets fall
// back to a constant predictor at the clipped class rate. Throws on empty
// input or length mismatch.
FittedModel fit_learner(const Matrix& features, const std::vector<int>& labels,
                        const LearnerConfig& config, double clip_eps = 1e-3);

}  // namespace riskbounds
