#pragma once

// Data model shared by every estimator: records with a selection indicator
// and a selectively observed binary outcome, performance-measure specs, and
// deterministic fold assignment for cross-fitting.

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "riskbounds/common.hpp"

namespace riskbounds {

struct Record {
  Vec x;                         // covariates, length d
  int d_sel = 0;                 // selection indicator, outcome observed iff 1
  int y_obs = 0;                 // observed outcome, forced to 0 when d_sel == 0
  std::optional<int> z;          // instrument value (small finite support)
  std::optional<int> y_proxy;    // always-observed proxy outcome
  std::optional<int> g;          // binary group attribute
};

class Dataset {
 public:
  std::vector<Record> records;
  std::size_t d = 0;             // covariate dimension
  std::vector<int> z_support;    // sorted distinct instrument values, empty if none

  std::size_t n() const { return records.size(); }
  std::size_t n_selected() const;
  bool has_instrument() const { return !z_support.empty(); }
  bool has_proxy() const;
  bool has_group() const;
};

// Validates raw records against the observation model: binary fields,
// y = d * y*, consistent dimension, both selection classes present.
Dataset validate_dataset(std::vector<Record> raw);

// A score is either a fitted map x -> [0,1] or a precomputed column aligned
// with record order (alignment is the caller's contract).
class Score {
 public:
  static Score from_function(std::function<double(const Vec&)> fn);
  static Score from_column(Vec values);

  double at(const Record& r, std::size_t index) const;

 private:
  std::function<double(const Vec&)> fn_;
  Vec column_;
};

enum class PerfKind {
  Mse,
  Calibration,     // E[Y* | r1 <= s <= r2]
  Accuracy,        // P(1{s >= tau} = Y*)
  GeneralizedTpr,  // E[s | Y* = 1]
  GeneralizedFpr,  // E[s | Y* = 0]
  ThresholdTpr,    // P(s >= tau | Y* = 1)
  ThresholdFpr,    // P(s >= tau | Y* = 0)
  Precision,       // P(Y* = 1 | s >= tau)
  FailureRate,     // P(Y* = 1, s <= tau)
  CustomOverall,
  CustomPositive,
  CustomNegative,
};

enum class EstimandClass { Overall, PositiveClass, NegativeClass };

struct PerformanceSpec {
  PerfKind kind = PerfKind::Mse;
  double tau = 0.5;          // threshold kinds
  double r1 = 0.0, r2 = 1.0; // calibration bin
  double beta0_const = 0.0, beta1_const = 0.0;  // custom kinds

  EstimandClass estimand_class() const;
  bool needs_aux() const { return kind == PerfKind::Calibration || kind == PerfKind::Precision; }

  static PerformanceSpec mse();
  static PerformanceSpec calibration(double r1, double r2);
  static PerformanceSpec accuracy(double tau);
  static PerformanceSpec generalized_tpr();
  static PerformanceSpec generalized_fpr();
  static PerformanceSpec threshold_tpr(double tau);
  static PerformanceSpec threshold_fpr(double tau);
  static PerformanceSpec precision(double tau);
  static PerformanceSpec failure_rate(double tau);
  static PerformanceSpec custom_overall(double beta0, double beta1);
  static PerformanceSpec custom_positive(double beta0);
  static PerformanceSpec custom_negative(double beta0);
};

struct BetaTerms {
  double beta0 = 0.0;
  double beta1 = 0.0;      // meaningful only for overall-class kinds
  bool has_beta1 = false;
};

// Evaluates the per-observation beta functions at a score value. `aux` is the
// empirical bin/tail probability required by Calibration and Precision.
BetaTerms beta_terms(const PerformanceSpec& spec, double score_value, double aux = 1.0);

// Empirical probability of the spec's conditioning event over the dataset
// (share of scores in the calibration bin, or above the precision threshold).
// Returns 1 for kinds that need no auxiliary probability.
double aux_probability(const PerformanceSpec& spec, const Dataset& data, const Score& score);

struct FoldAssignment {
  std::vector<int> fold_of;  // record index -> fold id in {1..K}
  int K = 0;
  std::uint64_t seed = 0;

  std::vector<std::vector<std::size_t>> fold_indices() const;
};

// Random partition into K folds with sizes differing by at most one,
// deterministic given the seed.
FoldAssignment split_folds(std::size_t n, int K, std::uint64_t seed);

}  // namespace riskbounds
