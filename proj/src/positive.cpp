#include "riskbounds/positive.hpp"

#include <algorithm>

namespace riskbounds {

namespace {

struct FoldedInstances {
  std::vector<LfpInstance> per_fold;  // box/base terms, beta0 filled by caller
  std::vector<std::vector<std::size_t>> members;
};

// Groups EIF terms into per-fold LFP instances. `negative` applies the
// complement transform. `keep` restricts to a subset (group disparities).
FoldedInstances build_instances(const Dataset& data, const NuisanceBundle& bundle,
                                const std::vector<EifTerms>& terms, const Vec& beta0,
                                bool negative,
                                const std::function<bool(std::size_t)>& keep = nullptr) {
  FoldedInstances out;
  out.per_fold.resize(static_cast<std::size_t>(bundle.K));
  out.members.resize(static_cast<std::size_t>(bundle.K));
  for (std::size_t i = 0; i < data.n(); ++i) {
    if (keep && !keep(i)) continue;
    std::size_t k = static_cast<std::size_t>(bundle.fold_of(i) - 1);
    LfpInstance& ins = out.per_fold[k];
    const EifTerms& t = terms[i];
    if (negative) {
      ins.a.push_back(1.0 - t.phi_mu);
      ins.lo.push_back(-t.lfp_hi);
      ins.hi.push_back(-t.lfp_lo);
    } else {
      ins.a.push_back(t.phi_mu);
      ins.lo.push_back(t.lfp_lo);
      ins.hi.push_back(t.lfp_hi);
    }
    ins.w.push_back(t.lfp_weight);
    ins.beta0.push_back(beta0[i]);
    out.members[k].push_back(i);
  }
  return out;
}

BoundsEstimate solve_folds(FoldedInstances& folded, std::size_t n_total) {
  BoundsEstimate est;
  est.n = n_total;
  for (auto& ins : folded.per_fold) {
    if (ins.size() == 0)
      throw std::runtime_error("positive-class bounds: a fold has no usable observations");
    ins.direction = LfpDirection::Maximize;
    LfpSolution up = solve_fold_lfp(ins);
    ins.direction = LfpDirection::Minimize;
    LfpSolution dn = solve_fold_lfp(ins);
    est.fold_upper.push_back(up.value);
    est.fold_lower.push_back(dn.value);
    est.swapped_boxes += up.swapped_boxes;
  }
  est.upper = mean(est.fold_upper);
  est.lower = mean(est.fold_lower);
  return est;
}

Vec beta0_column(const Dataset& data, const Score& score, const PerformanceSpec& spec) {
  Vec b(data.n());
  for (std::size_t i = 0; i < data.n(); ++i)
    b[i] = beta_terms(spec, score.at(data.records[i], i)).beta0;
  return b;
}

}  // namespace

BoundsEstimate estimate_positive_class_bounds(const Dataset& data, const Score& score,
                                              const PerformanceSpec& spec,
                                              const BoundingSpec& bounding,
                                              const NuisanceBundle& bundle) {
  if (spec.estimand_class() != EstimandClass::PositiveClass)
    throw std::invalid_argument("estimate_positive_class_bounds: spec is not positive-class");
  auto terms = compute_eif_terms(data, bundle, bounding);
  auto folded = build_instances(data, bundle, terms, beta0_column(data, score, spec), false);
  return solve_folds(folded, data.n());
}

BoundsEstimate estimate_negative_class_bounds(const Dataset& data, const Score& score,
                                              const PerformanceSpec& spec,
                                              const BoundingSpec& bounding,
                                              const NuisanceBundle& bundle) {
  if (spec.estimand_class() != EstimandClass::NegativeClass)
    throw std::invalid_argument("estimate_negative_class_bounds: spec is not negative-class");
  auto terms = compute_eif_terms(data, bundle, bounding);
  auto folded = build_instances(data, bundle, terms, beta0_column(data, score, spec), true);
  return solve_folds(folded, data.n());
}

std::vector<RocPoint> roc_bounds(const Dataset& data, const Score& score, const Vec& thresholds,
                                 const BoundingSpec& bounding, const NuisanceBundle& bundle) {
  if (!std::is_sorted(thresholds.begin(), thresholds.end()))
    throw std::invalid_argument("roc_bounds: threshold grid must be sorted");
  for (double t : thresholds)
    if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("roc_bounds: tau outside [0,1]");

  auto terms = compute_eif_terms(data, bundle, bounding);
  Vec scores(data.n());
  for (std::size_t i = 0; i < data.n(); ++i) scores[i] = score.at(data.records[i], i);

  std::vector<RocPoint> out;
  out.reserve(thresholds.size());
  for (double tau : thresholds) {
    Vec b0(data.n());
    for (std::size_t i = 0; i < data.n(); ++i) b0[i] = scores[i] >= tau ? 1.0 : 0.0;
    auto pos = build_instances(data, bundle, terms, b0, false);
    auto neg = build_instances(data, bundle, terms, b0, true);
    BoundsEstimate tpr = solve_folds(pos, data.n());
    BoundsEstimate fpr = solve_folds(neg, data.n());
    out.push_back({tau, tpr.lower, tpr.upper, fpr.lower, fpr.upper});
  }
  return out;
}

double auc_from_curve(const std::vector<RocPoint>& points, CurveSide side) {
  std::vector<std::pair<double, double>> pts;
  pts.reserve(points.size() + 2);
  for (const RocPoint& p : points) {
    if (side == CurveSide::Hi)
      pts.emplace_back(p.fpr_lo, p.tpr_hi);
    else
      pts.emplace_back(p.fpr_hi, p.tpr_lo);
  }
  pts.emplace_back(0.0, 0.0);
  pts.emplace_back(1.0, 1.0);
  std::sort(pts.begin(), pts.end());
  double auc = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    auc += (pts[i + 1].first - pts[i].first) * (pts[i].second + pts[i + 1].second) / 2.0;
  return auc;
}

BoundsEstimate positive_class_disparity_bounds(const Dataset& data, const Score& score,
                                               const PerformanceSpec& spec,
                                               const BoundingSpec& bounding,
                                               const NuisanceBundle& bundle) {
  if (spec.estimand_class() != EstimandClass::PositiveClass)
    throw std::invalid_argument("positive-class disparity: spec is not positive-class");
  if (!data.has_group()) throw std::invalid_argument("positive-class disparity: group column missing");

  auto terms = compute_eif_terms(data, bundle, bounding);
  Vec b0 = beta0_column(data, score, spec);

  auto solve_group = [&](int g) {
    auto folded = build_instances(data, bundle, terms, b0, false,
                                  [&](std::size_t i) { return *data.records[i].g == g; });
    for (const auto& ins : folded.per_fold)
      if (ins.size() == 0)
        throw std::runtime_error("positive-class disparity: empty group in a fold");
    return solve_folds(folded, data.n());
  };
  BoundsEstimate g1 = solve_group(1);
  BoundsEstimate g0 = solve_group(0);

  BoundsEstimate est;
  est.n = data.n();
  est.upper = g1.upper - g0.lower;
  est.lower = g1.lower - g0.upper;
  est.swapped_boxes = g1.swapped_boxes + g0.swapped_boxes;
  for (std::size_t k = 0; k < g1.fold_upper.size(); ++k) {
    est.fold_upper.push_back(g1.fold_upper[k] - g0.fold_lower[k]);
    est.fold_lower.push_back(g1.fold_lower[k] - g0.fold_upper[k]);
  }
  return est;
}

std::pair<double, double> bootstrap_positive_class_sd(const Dataset& data, const Score& score,
                                                      const PerformanceSpec& spec,
                                                      const BoundingSpec& bounding,
                                                      const NuisanceBundle& bundle, int B,
                                                      std::uint64_t seed) {
  if (B < 2) throw std::invalid_argument("bootstrap: need B >= 2");
  auto terms = compute_eif_terms(data, bundle, bounding);
  Vec b0 = beta0_column(data, score, spec);
  auto folded = build_instances(data, bundle, terms, b0, false);

  Vec ups, downs;
  for (int rep = 0; rep < B; ++rep) {
    std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(rep)));
    double up_acc = 0.0, dn_acc = 0.0;
    for (auto& ins : folded.per_fold) {
      std::uniform_int_distribution<std::size_t> pick(0, ins.size() - 1);
      LfpInstance res;
      res.tol_den = ins.tol_den;
      for (std::size_t j = 0; j < ins.size(); ++j) {
        std::size_t i = pick(rng);
        res.a.push_back(ins.a[i]);
        res.w.push_back(ins.w[i]);
        res.lo.push_back(ins.lo[i]);
        res.hi.push_back(ins.hi[i]);
        res.beta0.push_back(ins.beta0[i]);
      }
      res.direction = LfpDirection::Maximize;
      up_acc += solve_fold_lfp(res).value;
      res.direction = LfpDirection::Minimize;
      dn_acc += solve_fold_lfp(res).value;
    }
    ups.push_back(up_acc / static_cast<double>(folded.per_fold.size()));
    downs.push_back(dn_acc / static_cast<double>(folded.per_fold.size()));
  }
  return {sample_sd(downs), sample_sd(ups)};
}

}  // namespace riskbounds
