#include "riskbounds/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <numeric>
#include <thread>

namespace riskbounds {

void DgpConfig::validate() const {
  if (n < 10) throw std::invalid_argument("dgp: n too small");
  if (d < 1 || d_pi < 1 || d_mu < 1 || d_pi > d || d_mu > d)
    throw std::invalid_argument("dgp: require 1 <= d_pi, d_mu <= d");
  if (!(gamma_true > 0.0 && gamma_true < 1.0))
    throw std::invalid_argument("dgp: gamma_true must lie in (0,1)");
  if (!(proxy_q > 0.5 && proxy_q <= 1.0))
    throw std::invalid_argument("dgp: proxy_q must lie in (0.5, 1]");
  if (with_instrument && instrument_shift.size() < 2)
    throw std::invalid_argument("dgp: instrument needs at least two support points");
}

namespace {

double index_sum(const Vec& x, int take) {
  double s = 0.0;
  for (int j = 0; j < take; ++j) s += x[static_cast<std::size_t>(j)];
  return s / (2.0 * std::sqrt(static_cast<double>(take)));
}

struct Mechanism {
  DgpConfig cfg;

  double sig_pi(const Vec& x) const { return sigmoid(index_sum(x, cfg.d_pi)); }
  double mu1(const Vec& x) const { return sigmoid(index_sum(x, cfg.d_mu)); }

  // P(Y*=1 | x): under the base mechanism mu1 (pi + gamma pi0); the
  // instrument mechanism draws Y* from this same marginal first
  double mu_star(const Vec& x) const {
    double p = sig_pi(x), m = mu1(x);
    return m * (p + cfg.gamma_true * (1.0 - p));
  }

  double sig_z(const Vec& x, std::size_t zi) const {
    return sigmoid(index_sum(x, cfg.d_pi) + cfg.instrument_shift[zi]);
  }
  double mean_sig_z(const Vec& x) const {
    double s = 0.0;
    for (std::size_t zi = 0; zi < cfg.instrument_shift.size(); ++zi) s += sig_z(x, zi);
    return s / static_cast<double>(cfg.instrument_shift.size());
  }

  // instrument mechanism: D | Y*, X, Z is Bernoulli of sig_z scaled for Y*=0
  // by r0 so that P(Y*=1 | D=1, x, z) = mu1(x) for every z (exclusion holds
  // exactly while selection stays confounded)
  double r0(const Vec& x) const {
    double m = mu1(x), ms = mu_star(x);
    return (1.0 - m) * ms / (m * (1.0 - ms));
  }
  double pi1_given_z(const Vec& x, std::size_t zi) const {
    return sig_z(x, zi) * mu_star(x) / mu1(x);
  }
  double pi1_marginal(const Vec& x) const {
    if (!cfg.with_instrument) return sig_pi(x);
    double s = 0.0;
    for (std::size_t zi = 0; zi < cfg.instrument_shift.size(); ++zi) s += pi1_given_z(x, zi);
    return s / static_cast<double>(cfg.instrument_shift.size());
  }
  double p_y1_given_d0(const Vec& x) const {
    if (!cfg.with_instrument) return cfg.gamma_true * mu1(x);
    return mu_star(x) * (1.0 - mean_sig_z(x)) / (1.0 - pi1_marginal(x));
  }
  double delta(const Vec& x) const { return p_y1_given_d0(x) - mu1(x); }
  double lambda_given_z(const Vec& x, std::size_t zi) const {
    return mu_star(x) * sig_z(x, zi);
  }
  double mu0_proxy(const Vec& x) const {
    double p = p_y1_given_d0(x);
    return cfg.proxy_q * p + (1.0 - cfg.proxy_q) * (1.0 - p);
  }
};

SimTruth make_truth(const Mechanism& mech) {
  SimTruth t;
  auto m = std::make_shared<Mechanism>(mech);
  t.mu1 = [m](const Vec& x) { return m->mu1(x); };
  t.pi1 = [m](const Vec& x) { return m->pi1_marginal(x); };
  t.mu_star = [m](const Vec& x) {
    return m->mu1(x) * m->pi1_marginal(x) + m->p_y1_given_d0(x) * (1.0 - m->pi1_marginal(x));
  };
  t.delta = [m](const Vec& x) { return m->delta(x); };

  t.nuisances.mu1 = t.mu1;
  t.nuisances.pi1 = t.pi1;
  if (mech.cfg.with_proxy) {
    double q = mech.cfg.proxy_q;
    t.nuisances.gamma1 = [q](const Vec&) { return q; };
    t.nuisances.mu0_proxy = [m](const Vec& x) { return m->mu0_proxy(x); };
  }
  if (mech.cfg.with_instrument) {
    std::size_t p = mech.cfg.instrument_shift.size();
    t.z_count = static_cast<int>(p);
    t.nuisances.lambda_z = [m](int z, const Vec& x) {
      return m->lambda_given_z(x, static_cast<std::size_t>(z - 1));
    };
    t.nuisances.kappa_z = [m](int z, const Vec& x) {
      return 1.0 - m->pi1_given_z(x, static_cast<std::size_t>(z - 1));
    };
    t.nuisances.pz = [p](int, const Vec&) { return 1.0 / static_cast<double>(p); };
  }
  return t;
}

// (lo, hi) bounds on pi0(x) delta(x) at the true nuisances, per family
std::pair<double, double> true_pidelta_bounds(const Mechanism& mech, const SimTruth& truth,
                                              const BoundingSpec& bounding, const Vec& x) {
  double m1 = truth.mu1(x);
  double pi0 = 1.0 - truth.pi1(x);
  switch (bounding.family) {
    case BoundingFamily::Unconfounded:
      return {0.0, 0.0};
    case BoundingFamily::WorstCase:
      return {-pi0 * m1, pi0 * (1.0 - m1)};
    case BoundingFamily::NonparametricOutcome:
      return {(bounding.gamma_lo - 1.0) * pi0 * m1, (bounding.gamma_hi - 1.0) * pi0 * m1};
    case BoundingFamily::ProxySimple: {
      double g1 = truth.nuisances.gamma1(x), m0 = truth.nuisances.mu0_proxy(x);
      return {pi0 * (1.0 - g1 - m0 - m1), pi0 * (1.0 - g1 + m0 - m1)};
    }
    case BoundingFamily::ProxyGeneral: {
      double g1 = truth.nuisances.gamma1(x), m0 = truth.nuisances.mu0_proxy(x);
      return {pi0 * (std::abs(1.0 - g1 - m0) - m1), pi0 * (1.0 - std::abs(g1 - m0) - m1)};
    }
    case BoundingFamily::IvFixed: {
      double lam = truth.nuisances.lambda_z(bounding.z, x);
      double kap = truth.nuisances.kappa_z(bounding.z, x);
      return {lam - m1, kap + lam - m1};
    }
    case BoundingFamily::IvSmoothed: {
      Vec v_lo, v_hi;
      for (std::size_t zi = 0; zi < mech.cfg.instrument_shift.size(); ++zi) {
        int z = static_cast<int>(zi) + 1;
        double lam = truth.nuisances.lambda_z(z, x);
        double kap = truth.nuisances.kappa_z(z, x);
        v_lo.push_back(lam - m1);
        v_hi.push_back(kap + lam - m1);
      }
      return {lse(v_lo, bounding.alpha), lse(v_hi, -bounding.alpha)};
    }
  }
  throw std::logic_error("true_pidelta_bounds: unknown family");
}

}  // namespace

BoundFn SimTruth::true_mu_lo(const BoundingSpec& bounding) const {
  auto self = *this;
  return [self, bounding](const Vec& x) {
    double m1 = self.mu1(x), pi0 = 1.0 - self.pi1(x);
    switch (bounding.family) {
      case BoundingFamily::Unconfounded:
        return m1;
      case BoundingFamily::WorstCase:
        return m1 - pi0 * m1;
      case BoundingFamily::NonparametricOutcome:
        return m1 + pi0 * (bounding.gamma_lo - 1.0) * m1;
      case BoundingFamily::ProxySimple:
        return m1 + pi0 * (1.0 - self.nuisances.gamma1(x) - self.nuisances.mu0_proxy(x) - m1);
      case BoundingFamily::ProxyGeneral:
        return m1 +
               pi0 * (std::abs(1.0 - self.nuisances.gamma1(x) - self.nuisances.mu0_proxy(x)) - m1);
      case BoundingFamily::IvFixed:
        return m1 + self.nuisances.lambda_z(bounding.z, x) - m1;
      case BoundingFamily::IvSmoothed: {
        Vec v;
        for (int z = 1; z <= self.z_count; ++z)
          v.push_back(self.nuisances.lambda_z(z, x) - m1);
        return m1 + lse(v, bounding.alpha);
      }
    }
    throw std::invalid_argument("true_mu_lo: unknown family");
  };
}

BoundFn SimTruth::true_mu_hi(const BoundingSpec& bounding) const {
  auto self = *this;
  return [self, bounding](const Vec& x) {
    double m1 = self.mu1(x), pi0 = 1.0 - self.pi1(x);
    switch (bounding.family) {
      case BoundingFamily::Unconfounded:
        return m1;
      case BoundingFamily::WorstCase:
        return m1 + pi0 * (1.0 - m1);
      case BoundingFamily::NonparametricOutcome:
        return m1 + pi0 * (bounding.gamma_hi - 1.0) * m1;
      case BoundingFamily::ProxySimple:
        return m1 + pi0 * (1.0 - self.nuisances.gamma1(x) + self.nuisances.mu0_proxy(x) - m1);
      case BoundingFamily::ProxyGeneral:
        return m1 +
               pi0 * (1.0 - std::abs(self.nuisances.gamma1(x) - self.nuisances.mu0_proxy(x)) - m1);
      case BoundingFamily::IvFixed:
        return m1 + self.nuisances.kappa_z(bounding.z, x) +
               self.nuisances.lambda_z(bounding.z, x) - m1;
      case BoundingFamily::IvSmoothed: {
        Vec v;
        for (int z = 1; z <= self.z_count; ++z)
          v.push_back(self.nuisances.kappa_z(z, x) + self.nuisances.lambda_z(z, x) - m1);
        return m1 + lse(v, -bounding.alpha);
      }
    }
    throw std::invalid_argument("true_mu_hi: unknown family");
  };
}

SimulatedData generate_dgp(const DgpConfig& config) {
  config.validate();
  Mechanism mech{config};

  std::mt19937_64 rng(mix_seed(config.seed, 0x64677020));  // "dgp"
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  SimulatedData out;
  out.truth = make_truth(mech);
  out.y_star.resize(static_cast<std::size_t>(config.n));

  std::vector<Record> recs(static_cast<std::size_t>(config.n));
  const std::size_t p_z = config.instrument_shift.size();
  for (std::size_t i = 0; i < recs.size(); ++i) {
    Record& r = recs[i];
    r.x.resize(static_cast<std::size_t>(config.d));
    for (double& v : r.x) v = gauss(rng);

    int ystar;
    if (config.with_instrument) {
      std::size_t zi = static_cast<std::size_t>(
          std::min<double>(unif(rng) * static_cast<double>(p_z), static_cast<double>(p_z - 1)));
      r.z = static_cast<int>(zi) + 1;
      ystar = unif(rng) < mech.mu_star(r.x) ? 1 : 0;
      double p_sel = mech.sig_z(r.x, zi) * (ystar == 1 ? 1.0 : mech.r0(r.x));
      r.d_sel = unif(rng) < p_sel ? 1 : 0;
    } else {
      r.d_sel = unif(rng) < mech.sig_pi(r.x) ? 1 : 0;
      double p_y = r.d_sel == 1 ? mech.mu1(r.x) : config.gamma_true * mech.mu1(r.x);
      ystar = unif(rng) < p_y ? 1 : 0;
    }
    out.y_star[i] = ystar;
    r.y_obs = r.d_sel == 1 ? ystar : 0;

    if (config.with_proxy) r.y_proxy = unif(rng) < config.proxy_q ? ystar : 1 - ystar;
    if (config.with_group) r.g = r.x[0] > 0.0 ? 1 : 0;
  }
  out.data = validate_dataset(std::move(recs));
  return out;
}

Matrix draw_covariates(const DgpConfig& config, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(mix_seed(seed, 0x636f7673));  // "covs"
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix out(n, Vec(static_cast<std::size_t>(config.d)));
  for (auto& row : out)
    for (double& v : row) v = gauss(rng);
  return out;
}

Score fit_sim_score(const DgpConfig& config, int n_train, const LearnerConfig& learner,
                    std::uint64_t seed) {
  DgpConfig train_cfg = config;
  train_cfg.n = n_train;
  train_cfg.seed = mix_seed(seed, 0x747261696e);  // "train"
  SimulatedData train = generate_dgp(train_cfg);

  Matrix X;
  std::vector<int> y;
  for (const Record& r : train.data.records) {
    if (r.d_sel != 1) continue;
    X.push_back(r.x);
    y.push_back(r.y_obs);
  }
  LearnerConfig cfg = learner;
  cfg.seed = mix_seed(seed, 0x73636f7265);  // "score"
  FittedModel model = fit_learner(X, y, cfg);
  return Score::from_function([model](const Vec& x) { return clip(model.predict(x), 0.0, 1.0); });
}

TrueBounds compute_true_overall_bounds(const PerformanceSpec& spec, const BoundingSpec& bounding,
                                       const DgpConfig& config, const Score& score,
                                       std::size_t n_draws, std::uint64_t seed) {
  Mechanism mech{config};
  SimTruth truth = make_truth(mech);
  Matrix xs = draw_covariates(config, n_draws, seed);

  double aux = 1.0;
  if (spec.needs_aux()) {
    std::size_t hits = 0;
    Record tmp;
    for (const Vec& x : xs) {
      tmp.x = x;
      double s = score.at(tmp, 0);
      bool in = spec.kind == PerfKind::Calibration ? (spec.r1 <= s && s <= spec.r2)
                                                   : (s >= spec.tau);
      hits += in ? 1 : 0;
    }
    aux = static_cast<double>(hits) / static_cast<double>(n_draws);
    if (!(aux > 0.0)) throw std::domain_error("empty prediction bin in truth computation");
  }

  Vec lo_draw(n_draws), hi_draw(n_draws);
  Record tmp;
  for (std::size_t i = 0; i < n_draws; ++i) {
    tmp.x = xs[i];
    BetaTerms bt = beta_terms(spec, score.at(tmp, 0), aux);
    double m1 = truth.mu1(xs[i]);
    auto [plo, phi] = true_pidelta_bounds(mech, truth, bounding, xs[i]);
    double up_sel = bt.beta1 > 0.0 ? phi : plo;
    double lo_sel = bt.beta1 > 0.0 ? plo : phi;
    hi_draw[i] = bt.beta0 + bt.beta1 * m1 + bt.beta1 * up_sel;
    lo_draw[i] = bt.beta0 + bt.beta1 * m1 + bt.beta1 * lo_sel;
  }
  TrueBounds tb;
  tb.lower = mean(lo_draw);
  tb.upper = mean(hi_draw);
  double rootn = std::sqrt(static_cast<double>(n_draws));
  tb.se_lower = sample_sd(lo_draw) / rootn;
  tb.se_upper = sample_sd(hi_draw) / rootn;
  return tb;
}

namespace {

// Ratio scan over the drawn population: monotone-in-beta0 vertex assignments,
// both orientations. Written independently of the sample solver.
struct PopulationScan {
  double value = 0.0;
  Vec chosen;  // realized pi0*delta per draw
};

PopulationScan population_ratio_opt(const Vec& beta0, const Vec& num_base, const Vec& den_base,
                                    const Vec& box_lo, const Vec& box_hi, bool maximize) {
  const std::size_t n = beta0.size();
  std::vector<std::size_t> ord(n);
  std::iota(ord.begin(), ord.end(), std::size_t{0});
  std::sort(ord.begin(), ord.end(),
            [&](std::size_t a, std::size_t b) { return beta0[a] < beta0[b]; });

  double num0 = 0.0, den0 = 0.0;
  Vec pre_nlo(n + 1, 0.0), pre_nhi(n + 1, 0.0), pre_dlo(n + 1, 0.0), pre_dhi(n + 1, 0.0);
  for (std::size_t pos = 0; pos < n; ++pos) {
    std::size_t i = ord[pos];
    num0 += beta0[i] * num_base[i];
    den0 += den_base[i];
    pre_nlo[pos + 1] = pre_nlo[pos] + beta0[i] * box_lo[i];
    pre_nhi[pos + 1] = pre_nhi[pos] + beta0[i] * box_hi[i];
    pre_dlo[pos + 1] = pre_dlo[pos] + box_lo[i];
    pre_dhi[pos + 1] = pre_dhi[pos] + box_hi[i];
  }
  bool found = false;
  double best = 0.0;
  std::size_t best_m = 0;
  bool best_asc = true;
  for (std::size_t m = 0; m <= n; ++m) {
    double n_asc = num0 + pre_nlo[m] + (pre_nhi[n] - pre_nhi[m]);
    double d_asc = den0 + pre_dlo[m] + (pre_dhi[n] - pre_dhi[m]);
    double n_desc = num0 + pre_nhi[m] + (pre_nlo[n] - pre_nlo[m]);
    double d_desc = den0 + pre_dhi[m] + (pre_dlo[n] - pre_dlo[m]);
    for (int orient = 0; orient < 2; ++orient) {
      double nn = orient == 0 ? n_asc : n_desc;
      double dd = orient == 0 ? d_asc : d_desc;
      if (!(dd > 1e-8)) continue;
      double v = nn / dd;
      if (!found || (maximize ? v > best : v < best)) {
        found = true;
        best = v;
        best_m = m;
        best_asc = orient == 0;
      }
    }
  }
  if (!found) throw infeasibility_error("population scan: denominator condition violated");

  PopulationScan out;
  out.value = best;
  out.chosen.assign(n, 0.0);
  for (std::size_t pos = 0; pos < n; ++pos) {
    std::size_t i = ord[pos];
    bool first = pos < best_m;
    bool at_lo = best_asc ? first : !first;
    out.chosen[i] = at_lo ? box_lo[i] : box_hi[i];
  }
  return out;
}

}  // namespace

TrueBounds compute_true_positive_bounds(const PerformanceSpec& spec, const BoundingSpec& bounding,
                                        const DgpConfig& config, const Score& score,
                                        std::size_t n_draws, std::uint64_t seed) {
  bool negative = spec.estimand_class() == EstimandClass::NegativeClass;
  if (spec.estimand_class() == EstimandClass::Overall)
    throw std::invalid_argument("compute_true_positive_bounds: overall-class spec");

  Mechanism mech{config};
  SimTruth truth = make_truth(mech);
  Matrix xs = draw_covariates(config, n_draws, seed);

  Vec beta0(n_draws), base(n_draws), blo(n_draws), bhi(n_draws);
  Record tmp;
  for (std::size_t i = 0; i < n_draws; ++i) {
    tmp.x = xs[i];
    beta0[i] = beta_terms(spec, score.at(tmp, 0)).beta0;
    double m1 = truth.mu1(xs[i]);
    auto [plo, phi] = true_pidelta_bounds(mech, truth, bounding, xs[i]);
    if (negative) {
      base[i] = 1.0 - m1;
      blo[i] = -phi;
      bhi[i] = -plo;
    } else {
      base[i] = m1;
      blo[i] = plo;
      bhi[i] = phi;
    }
  }

  auto ratio_se = [&](const PopulationScan& scan) {
    // delta-method MC error at the optimal assignment (envelope argument:
    // first-order assignment perturbations vanish)
    double nbar = 0.0, dbar = 0.0;
    Vec nv(n_draws), dv(n_draws);
    for (std::size_t i = 0; i < n_draws; ++i) {
      nv[i] = beta0[i] * (base[i] + scan.chosen[i]);
      dv[i] = base[i] + scan.chosen[i];
      nbar += nv[i];
      dbar += dv[i];
    }
    nbar /= static_cast<double>(n_draws);
    dbar /= static_cast<double>(n_draws);
    double r = nbar / dbar;
    double var = 0.0;
    for (std::size_t i = 0; i < n_draws; ++i) {
      double infl = (nv[i] - r * dv[i]) / dbar;
      var += infl * infl;
    }
    var /= static_cast<double>(n_draws) * static_cast<double>(n_draws - 1);
    return std::sqrt(var);
  };

  PopulationScan up = population_ratio_opt(beta0, base, base, blo, bhi, true);
  PopulationScan dn = population_ratio_opt(beta0, base, base, blo, bhi, false);
  TrueBounds tb;
  tb.upper = up.value;
  tb.lower = dn.value;
  tb.se_upper = ratio_se(up);
  tb.se_lower = ratio_se(dn);
  return tb;
}

namespace {

struct RepOutcome {
  bool ok = false;
  Vec lower, upper;          // per estimand-cell values
  Vec se_lower, se_upper;    // overall-class only, else 0
  std::vector<int> cover_lower, cover_upper;  // -1 when no CI
  double imse_feasible = 0.0, imse_oracle = 0.0, imse_plugin = 0.0;
  double regret_value = 0.0;
};

std::string bounding_label(const BoundingSpec& b) {
  switch (b.family) {
    case BoundingFamily::Unconfounded:
      return "unconfounded";
    case BoundingFamily::WorstCase:
      return "worst_case";
    case BoundingFamily::NonparametricOutcome: {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "nonparametric[%.4g,%.4g]", b.gamma_lo, b.gamma_hi);
      return buf;
    }
    case BoundingFamily::ProxySimple:
      return "proxy_simple";
    case BoundingFamily::ProxyGeneral:
      return "proxy_general";
    case BoundingFamily::IvFixed:
      return "iv_fixed(z=" + std::to_string(b.z) + ")";
    case BoundingFamily::IvSmoothed: {
      char buf[48];
      std::snprintf(buf, sizeof(buf), "iv_smoothed(alpha=%.4g)", b.alpha);
      return buf;
    }
  }
  return "?";
}

}  // namespace

std::string bounding_spec_label(const BoundingSpec& b) { return bounding_label(b); }

SimulationReport run_replications(const ExperimentConfig& config) {
  if (config.reps < 2) throw std::invalid_argument("run_replications: reps must be >= 2");
  if (config.estimands.empty() && !config.learner_study && !config.decision_study)
    throw std::invalid_argument("run_replications: nothing to do");
  config.dgp.validate();

  Score score = fit_sim_score(config.dgp, config.n_train, config.learner,
                              mix_seed(config.seed, 0x73));

  const std::size_t n_cells = config.boundings.size() * config.estimands.size();

  // truth per (bounding, estimand), shared across n
  std::vector<TrueBounds> truths(n_cells);
  for (std::size_t bi = 0; bi < config.boundings.size(); ++bi) {
    for (std::size_t ei = 0; ei < config.estimands.size(); ++ei) {
      const auto& est = config.estimands[ei];
      std::uint64_t tseed = mix_seed(config.seed, 0x74727574 + bi * 97 + ei);
      if (est.spec.estimand_class() == EstimandClass::Overall)
        truths[bi * config.estimands.size() + ei] = compute_true_overall_bounds(
            est.spec, config.boundings[bi], config.dgp, score, config.truth_draws, tseed);
      else
        truths[bi * config.estimands.size() + ei] = compute_true_positive_bounds(
            est.spec, config.boundings[bi], config.dgp, score, config.truth_draws, tseed);
    }
  }

  Matrix eval_grid;
  std::vector<BoundFn> truth_hi_fns;
  Mechanism mech{config.dgp};
  SimTruth sim_truth = make_truth(mech);
  if (config.learner_study || config.decision_study) {
    eval_grid = draw_covariates(config.dgp, 2000, mix_seed(config.seed, 0x6576616c));
    for (const auto& b : config.boundings) truth_hi_fns.push_back(sim_truth.true_mu_hi(b));
  }

  SimulationReport report;
  report.total_reps = config.reps * static_cast<int>(config.n_grid.size());

  for (std::size_t ni = 0; ni < config.n_grid.size(); ++ni) {
    int n = config.n_grid[ni];
    std::vector<std::vector<RepOutcome>> outcomes(
        config.boundings.size(), std::vector<RepOutcome>(static_cast<std::size_t>(config.reps)));

    auto run_rep = [&](std::size_t bi, int rep) {
      RepOutcome& out = outcomes[bi][static_cast<std::size_t>(rep)];
      try {
        DgpConfig dgp = config.dgp;
        dgp.n = n;
        dgp.seed = mix_seed(config.seed, (static_cast<std::uint64_t>(ni) << 32) +
                                             static_cast<std::uint64_t>(rep) * 31 + bi * 7919);
        SimulatedData sim = generate_dgp(dgp);
        FoldAssignment folds =
            split_folds(sim.data.n(), config.folds, mix_seed(dgp.seed, 0x666f));
        const BoundingSpec& bounding = config.boundings[bi];
        const bool need_fitted = (!config.estimands.empty() && !config.use_oracle_nuisances) ||
                                 config.learner_study || config.decision_study;
        const bool need_oracle = !config.estimands.empty() && config.use_oracle_nuisances;
        NuisanceBundle fitted_bundle, oracle_bundle;
        if (need_fitted)
          fitted_bundle =
              cross_fit_nuisances(sim.data, folds, config.learner, bounding, config.eps_clip);
        if (need_oracle)
          oracle_bundle = oracle_nuisances(sim.data, sim.truth.nuisances, folds, bounding,
                                           config.eps_clip);
        const NuisanceBundle& bundle = need_oracle ? oracle_bundle : fitted_bundle;

        for (const auto& est : config.estimands) {
          if (est.spec.estimand_class() == EstimandClass::Overall) {
            BoundsEstimate be = estimate_overall_bounds(sim.data, score, est.spec, bounding,
                                                        bundle, config.level);
            out.lower.push_back(be.lower);
            out.upper.push_back(be.upper);
            double se_u = std::sqrt(std::max(be.cov[0][0], 0.0) / static_cast<double>(be.n));
            double se_l = std::sqrt(std::max(be.cov[1][1], 0.0) / static_cast<double>(be.n));
            out.se_lower.push_back(se_l);
            out.se_upper.push_back(se_u);
            out.cover_lower.push_back(0);  // filled by aggregation against truth
            out.cover_upper.push_back(0);
          } else if (est.spec.estimand_class() == EstimandClass::PositiveClass) {
            BoundsEstimate be =
                estimate_positive_class_bounds(sim.data, score, est.spec, bounding, bundle);
            out.lower.push_back(be.lower);
            out.upper.push_back(be.upper);
            out.se_lower.push_back(0.0);
            out.se_upper.push_back(0.0);
            out.cover_lower.push_back(-1);
            out.cover_upper.push_back(-1);
          } else {
            BoundsEstimate be =
                estimate_negative_class_bounds(sim.data, score, est.spec, bounding, bundle);
            out.lower.push_back(be.lower);
            out.upper.push_back(be.upper);
            out.se_lower.push_back(0.0);
            out.se_upper.push_back(0.0);
            out.cover_lower.push_back(-1);
            out.cover_upper.push_back(-1);
          }
        }

        if (config.learner_study || config.decision_study) {
          const BoundingSpec& b = config.boundings[bi];
          BoundRegressors feas =
              fit_mu_bounds_from_bundle(sim.data, fitted_bundle, b, config.smoother);
          if (config.learner_study) {
            BoundRegressors orac = oracle_fit(sim.data, sim.truth.nuisances, folds, b,
                                              config.smoother, config.eps_clip);
            BoundRegressors plug = plugin_fit(sim.data, config.learner, b, config.eps_clip);
            BoundFn truth_hi = truth_hi_fns[bi];
            out.imse_feasible =
                imse([&](const Vec& x) { return feas.mu_hi(x); }, truth_hi, eval_grid);
            out.imse_oracle =
                imse([&](const Vec& x) { return orac.mu_hi(x); }, truth_hi, eval_grid);
            out.imse_plugin =
                imse([&](const Vec& x) { return plug.mu_hi(x); }, truth_hi, eval_grid);
          }
          if (config.decision_study) {
            UtilitySpec util = UtilitySpec::uniform();
            BoundRegressors clipped = feas;
            clipped.clip01 = true;
            DecisionRule rule = maxmin_rule([&](const Vec& x) { return clipped.mu_lo(x); },
                                            [&](const Vec& x) { return clipped.mu_hi(x); }, util);
            out.regret_value = regret(rule, sim_truth.true_mu_lo(b), sim_truth.true_mu_hi(b),
                                      util, eval_grid);
          }
        }
        out.ok = true;
      } catch (const std::exception&) {
        out.ok = false;
      }
    };

    unsigned hw = config.threads > 0 ? static_cast<unsigned>(config.threads)
                                     : std::max(1u, std::thread::hardware_concurrency());
    for (std::size_t bi = 0; bi < config.boundings.size(); ++bi) {
      if (hw <= 1) {
        for (int rep = 0; rep < config.reps; ++rep) run_rep(bi, rep);
      } else {
        std::vector<std::thread> pool;
        std::atomic<int> next{0};
        for (unsigned t = 0; t < hw; ++t)
          pool.emplace_back([&] {
            for (int rep = next.fetch_add(1); rep < config.reps; rep = next.fetch_add(1))
              run_rep(bi, rep);
          });
        for (auto& th : pool) th.join();
      }
    }

    // aggregate in replication order
    for (std::size_t bi = 0; bi < config.boundings.size(); ++bi) {
      int fails = 0;
      for (const auto& o : outcomes[bi]) fails += o.ok ? 0 : 1;
      report.failed_reps += fails;
      if (fails > config.reps / 10)
        throw std::runtime_error("run_replications: more than 10% of replications failed");

      for (std::size_t ei = 0; ei < config.estimands.size(); ++ei) {
        const TrueBounds& tb = truths[bi * config.estimands.size() + ei];
        Vec lo, up, sel, seu;
        int cov_l = 0, cov_u = 0, cov_n = 0;
        bool has_ci = false;
        double z = normal_quantile(1.0 - (1.0 - config.level) / 2.0);
        for (const auto& o : outcomes[bi]) {
          if (!o.ok) continue;
          lo.push_back(o.lower[ei]);
          up.push_back(o.upper[ei]);
          sel.push_back(o.se_lower[ei]);
          seu.push_back(o.se_upper[ei]);
          if (o.cover_lower[ei] >= 0) {
            has_ci = true;
            ++cov_n;
            if (std::abs(o.lower[ei] - tb.lower) <= z * o.se_lower[ei]) ++cov_l;
            if (std::abs(o.upper[ei] - tb.upper) <= z * o.se_upper[ei]) ++cov_u;
          }
        }
        auto push_cell = [&](const std::string& side, const Vec& v, const Vec& se, double truth,
                             int covered) {
          ReportCell c;
          c.estimand = config.estimands[ei].name;
          c.bounding = bounding_label(config.boundings[bi]);
          c.side = side;
          c.n = n;
          c.truth = truth;
          c.mean_estimate = mean(v);
          c.bias = c.mean_estimate - truth;
          c.sd = v.size() > 1 ? sample_sd(v) : 0.0;
          c.mean_se = mean(se);
          c.coverage = has_ci ? static_cast<double>(covered) / static_cast<double>(cov_n) : -1.0;
          c.reps = static_cast<int>(v.size());
          report.cells.push_back(c);
        };
        push_cell("lower", lo, sel, tb.lower, cov_l);
        push_cell("upper", up, seu, tb.upper, cov_u);
      }

      if (config.learner_study) {
        LearnerCell lc;
        lc.bounding = bounding_label(config.boundings[bi]);
        lc.n = n;
        int cnt = 0;
        for (const auto& o : outcomes[bi]) {
          if (!o.ok) continue;
          lc.imse_feasible += o.imse_feasible;
          lc.imse_oracle += o.imse_oracle;
          lc.imse_plugin += o.imse_plugin;
          ++cnt;
        }
        lc.imse_feasible /= cnt;
        lc.imse_oracle /= cnt;
        lc.imse_plugin /= cnt;
        lc.reps = cnt;
        report.learner_cells.push_back(lc);
      }
      if (config.decision_study) {
        DecisionCell dc;
        dc.bounding = bounding_label(config.boundings[bi]);
        dc.n = n;
        int cnt = 0;
        dc.min_regret = 1e300;
        dc.max_regret = -1e300;
        for (const auto& o : outcomes[bi]) {
          if (!o.ok) continue;
          dc.mean_regret += o.regret_value;
          dc.min_regret = std::min(dc.min_regret, o.regret_value);
          dc.max_regret = std::max(dc.max_regret, o.regret_value);
          ++cnt;
        }
        dc.mean_regret /= cnt;
        dc.reps = cnt;
        report.decision_cells.push_back(dc);
      }
    }
  }
  return report;
}

}  // namespace riskbounds
