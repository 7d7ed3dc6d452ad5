#include "riskbounds/data.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace riskbounds {

std::size_t Dataset::n_selected() const {
  std::size_t c = 0;
  for (const auto& r : records) c += static_cast<std::size_t>(r.d_sel);
  return c;
}

bool Dataset::has_proxy() const {
  return !records.empty() && records.front().y_proxy.has_value();
}

bool Dataset::has_group() const {
  return !records.empty() && records.front().g.has_value();
}

Dataset validate_dataset(std::vector<Record> raw) {
  if (raw.empty()) throw std::invalid_argument("validate_dataset: empty record sequence");

  Dataset data;
  data.d = raw.front().x.size();
  std::set<int> zs;
  bool first_has_proxy = raw.front().y_proxy.has_value();
  bool first_has_group = raw.front().g.has_value();
  bool first_has_z = raw.front().z.has_value();

  std::size_t n_sel = 0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const Record& r = raw[i];
    if (r.x.size() != data.d)
      throw std::invalid_argument("record " + std::to_string(i) + ": covariate dimension " +
                                  std::to_string(r.x.size()) + " != " + std::to_string(data.d));
    if (r.d_sel != 0 && r.d_sel != 1)
      throw std::invalid_argument("record " + std::to_string(i) + ": d must be 0 or 1");
    if (r.y_obs != 0 && r.y_obs != 1)
      throw std::invalid_argument("record " + std::to_string(i) + ": y must be 0 or 1");
    if (r.d_sel == 0 && r.y_obs == 1)
      throw std::invalid_argument("record " + std::to_string(i) +
                                  ": outcome observed without selection (y=1 with d=0)");
    if (r.y_proxy.has_value() != first_has_proxy)
      throw std::invalid_argument("record " + std::to_string(i) + ": y_proxy present on some records only");
    if (r.y_proxy && *r.y_proxy != 0 && *r.y_proxy != 1)
      throw std::invalid_argument("record " + std::to_string(i) + ": y_proxy must be 0 or 1");
    if (r.g.has_value() != first_has_group)
      throw std::invalid_argument("record " + std::to_string(i) + ": g present on some records only");
    if (r.g && *r.g != 0 && *r.g != 1)
      throw std::invalid_argument("record " + std::to_string(i) + ": g must be 0 or 1");
    if (r.z.has_value() != first_has_z)
      throw std::invalid_argument("record " + std::to_string(i) + ": z present on some records only");
    if (r.z) zs.insert(*r.z);
    n_sel += static_cast<std::size_t>(r.d_sel);
  }
  if (n_sel == 0) throw std::invalid_argument("validate_dataset: no selected records (d=1)");
  if (n_sel == raw.size()) throw std::invalid_argument("validate_dataset: no unselected records (d=0)");

  data.records = std::move(raw);
  data.z_support.assign(zs.begin(), zs.end());
  return data;
}

Score Score::from_function(std::function<double(const Vec&)> fn) {
  Score s;
  s.fn_ = std::move(fn);
  return s;
}

Score Score::from_column(Vec values) {
  Score s;
  s.column_ = std::move(values);
  return s;
}

double Score::at(const Record& r, std::size_t index) const {
  double v;
  if (fn_) {
    v = fn_(r.x);
  } else {
    if (index >= column_.size()) throw std::out_of_range("Score column shorter than dataset");
    v = column_[index];
  }
  if (!(v >= 0.0 && v <= 1.0)) throw std::domain_error("score value outside [0,1]");
  return v;
}

EstimandClass PerformanceSpec::estimand_class() const {
  switch (kind) {
    case PerfKind::GeneralizedTpr:
    case PerfKind::ThresholdTpr:
    case PerfKind::CustomPositive:
      return EstimandClass::PositiveClass;
    case PerfKind::GeneralizedFpr:
    case PerfKind::ThresholdFpr:
    case PerfKind::CustomNegative:
      return EstimandClass::NegativeClass;
    default:
      return EstimandClass::Overall;
  }
}

PerformanceSpec PerformanceSpec::mse() { return {PerfKind::Mse}; }

PerformanceSpec PerformanceSpec::calibration(double r1, double r2) {
  if (!(0.0 <= r1 && r1 <= r2 && r2 <= 1.0))
    throw std::invalid_argument("calibration bin requires 0 <= r1 <= r2 <= 1");
  PerformanceSpec s{PerfKind::Calibration};
  s.r1 = r1;
  s.r2 = r2;
  return s;
}

PerformanceSpec PerformanceSpec::accuracy(double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw std::invalid_argument("tau must be in [0,1]");
  PerformanceSpec s{PerfKind::Accuracy};
  s.tau = tau;
  return s;
}

PerformanceSpec PerformanceSpec::generalized_tpr() { return {PerfKind::GeneralizedTpr}; }
PerformanceSpec PerformanceSpec::generalized_fpr() { return {PerfKind::GeneralizedFpr}; }

PerformanceSpec PerformanceSpec::threshold_tpr(double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw std::invalid_argument("tau must be in [0,1]");
  PerformanceSpec s{PerfKind::ThresholdTpr};
  s.tau = tau;
  return s;
}

PerformanceSpec PerformanceSpec::threshold_fpr(double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw std::invalid_argument("tau must be in [0,1]");
  PerformanceSpec s{PerfKind::ThresholdFpr};
  s.tau = tau;
  return s;
}

PerformanceSpec PerformanceSpec::precision(double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw std::invalid_argument("tau must be in [0,1]");
  PerformanceSpec s{PerfKind::Precision};
  s.tau = tau;
  return s;
}

PerformanceSpec PerformanceSpec::failure_rate(double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw std::invalid_argument("tau must be in [0,1]");
  PerformanceSpec s{PerfKind::FailureRate};
  s.tau = tau;
  return s;
}

PerformanceSpec PerformanceSpec::custom_overall(double beta0, double beta1) {
  PerformanceSpec s{PerfKind::CustomOverall};
  s.beta0_const = beta0;
  s.beta1_const = beta1;
  return s;
}

PerformanceSpec PerformanceSpec::custom_positive(double beta0) {
  PerformanceSpec s{PerfKind::CustomPositive};
  s.beta0_const = beta0;
  return s;
}

PerformanceSpec PerformanceSpec::custom_negative(double beta0) {
  PerformanceSpec s{PerfKind::CustomNegative};
  s.beta0_const = beta0;
  return s;
}

BetaTerms beta_terms(const PerformanceSpec& spec, double s, double aux) {
  BetaTerms out;
  switch (spec.kind) {
    case PerfKind::Mse:
      out = {s * s, 1.0 - 2.0 * s, true};
      break;
    case PerfKind::Calibration: {
      if (!(aux > 0.0)) throw std::domain_error("empty prediction bin");
      double in_bin = (spec.r1 <= s && s <= spec.r2) ? 1.0 : 0.0;
      out = {0.0, in_bin / aux, true};
      break;
    }
    case PerfKind::Accuracy: {
      double above = (s >= spec.tau) ? 1.0 : 0.0;
      out = {1.0 - above, 2.0 * above - 1.0, true};
      break;
    }
    case PerfKind::Precision: {
      if (!(aux > 0.0)) throw std::domain_error("empty prediction bin");
      double above = (s >= spec.tau) ? 1.0 : 0.0;
      out = {0.0, above / aux, true};
      break;
    }
    case PerfKind::FailureRate:
      out = {0.0, (s <= spec.tau) ? 1.0 : 0.0, true};
      break;
    case PerfKind::CustomOverall:
      out = {spec.beta0_const, spec.beta1_const, true};
      break;
    case PerfKind::GeneralizedTpr:
    case PerfKind::GeneralizedFpr:
      out = {s, 0.0, false};
      break;
    case PerfKind::ThresholdTpr:
    case PerfKind::ThresholdFpr:
      out = {(s >= spec.tau) ? 1.0 : 0.0, 0.0, false};
      break;
    case PerfKind::CustomPositive:
    case PerfKind::CustomNegative:
      out = {spec.beta0_const, 0.0, false};
      break;
  }
  return out;
}

double aux_probability(const PerformanceSpec& spec, const Dataset& data, const Score& score) {
  if (!spec.needs_aux()) return 1.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < data.n(); ++i) {
    double s = score.at(data.records[i], i);
    bool in;
    if (spec.kind == PerfKind::Calibration)
      in = (spec.r1 <= s && s <= spec.r2);
    else
      in = (s >= spec.tau);
    hits += in ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(data.n());
}

std::vector<std::vector<std::size_t>> FoldAssignment::fold_indices() const {
  std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(K));
  for (std::size_t i = 0; i < fold_of.size(); ++i)
    out[static_cast<std::size_t>(fold_of[i] - 1)].push_back(i);
  return out;
}

FoldAssignment split_folds(std::size_t n, int K, std::uint64_t seed) {
  if (K < 2) throw std::invalid_argument("split_folds: K must be >= 2");
  if (static_cast<std::size_t>(K) > n) throw std::invalid_argument("split_folds: K exceeds n");

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(mix_seed(seed, 0x666f6c64));  // "fold"
  std::shuffle(perm.begin(), perm.end(), rng);

  FoldAssignment fa;
  fa.K = K;
  fa.seed = seed;
  fa.fold_of.assign(n, 0);
  for (std::size_t pos = 0; pos < n; ++pos)
    fa.fold_of[perm[pos]] = static_cast<int>(pos % static_cast<std::size_t>(K)) + 1;
  return fa;
}

}  // namespace riskbounds
