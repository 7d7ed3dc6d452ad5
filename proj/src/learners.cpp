#include "riskbounds/learners.hpp"

#include <algorithm>
#include <numeric>

namespace riskbounds {

LearnerConfig LearnerConfig::logistic(double penalty) {
  LearnerConfig c;
  c.family = LearnerFamily::RegularizedLogistic;
  c.logistic_penalty = penalty;
  return c;
}

LearnerConfig LearnerConfig::knn(int k) {
  LearnerConfig c;
  c.family = LearnerFamily::KNearestNeighbor;
  c.knn_k = k;
  return c;
}

LearnerConfig LearnerConfig::boosted(int rounds, double lr) {
  LearnerConfig c;
  c.family = LearnerFamily::BoostedStumps;
  c.boost_rounds = rounds;
  c.boost_learning_rate = lr;
  return c;
}

FittedModel FittedModel::constant(double p) {
  return FittedModel([p](const Vec&) { return p; });
}

namespace {

// Ridge-penalized logistic regression via Newton iterations. The intercept is
// unpenalized. Solves the (d+1)-dimensional normal equations by Cholesky.
FittedModel fit_logistic(const Matrix& X, const std::vector<int>& y, double penalty) {
  const std::size_t n = X.size();
  const std::size_t d = X.front().size();
  const std::size_t p = d + 1;  // intercept first

  Vec beta(p, 0.0);
  Vec eta(n, 0.0), mu(n, 0.5);

  auto solve_spd = [p](std::vector<Vec>& A, Vec& b) {
    // in-place Cholesky A = LL', then two triangular solves
    for (std::size_t j = 0; j < p; ++j) {
      double diag = A[j][j];
      for (std::size_t k = 0; k < j; ++k) diag -= A[j][k] * A[j][k];
      if (diag <= 0.0) diag = 1e-12;
      A[j][j] = std::sqrt(diag);
      for (std::size_t i = j + 1; i < p; ++i) {
        double s = A[i][j];
        for (std::size_t k = 0; k < j; ++k) s -= A[i][k] * A[j][k];
        A[i][j] = s / A[j][j];
      }
    }
    for (std::size_t i = 0; i < p; ++i) {
      double s = b[i];
      for (std::size_t k = 0; k < i; ++k) s -= A[i][k] * b[k];
      b[i] = s / A[i][i];
    }
    for (std::size_t ii = p; ii-- > 0;) {
      double s = b[ii];
      for (std::size_t k = ii + 1; k < p; ++k) s -= A[k][ii] * b[k];
      b[ii] = s / A[ii][ii];
    }
  };

  const int max_iter = 50;
  for (int it = 0; it < max_iter; ++it) {
    // gradient of penalized negative log-likelihood and Hessian
    Vec grad(p, 0.0);
    std::vector<Vec> H(p, Vec(p, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
      double r = mu[i] - static_cast<double>(y[i]);
      double w = std::max(mu[i] * (1.0 - mu[i]), 1e-6);
      grad[0] += r;
      H[0][0] += w;
      for (std::size_t j = 0; j < d; ++j) {
        double xj = X[i][j];
        grad[j + 1] += r * xj;
        H[j + 1][0] += w * xj;
        for (std::size_t k = 0; k <= j; ++k) H[j + 1][k + 1] += w * xj * X[i][k];
      }
    }
    for (std::size_t j = 1; j < p; ++j) {
      grad[j] += penalty * static_cast<double>(n) * beta[j];
      H[j][j] += penalty * static_cast<double>(n);
    }
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = i + 1; j < p; ++j) H[i][j] = H[j][i];

    Vec step = grad;
    solve_spd(H, step);
    double max_step = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      beta[j] -= step[j];
      max_step = std::max(max_step, std::abs(step[j]));
    }
    for (std::size_t i = 0; i < n; ++i) {
      double e = beta[0];
      for (std::size_t j = 0; j < d; ++j) e += beta[j + 1] * X[i][j];
      eta[i] = e;
      mu[i] = sigmoid(e);
    }
    if (max_step < 1e-8) break;
  }

  return FittedModel([beta, d](const Vec& x) {
    if (x.size() != d) throw std::invalid_argument("logistic predict: dimension mismatch");
    double e = beta[0];
    for (std::size_t j = 0; j < d; ++j) e += beta[j + 1] * x[j];
    return sigmoid(e);
  });
}

FittedModel fit_knn(const Matrix& X, const std::vector<int>& y, int k) {
  if (k < 1) throw std::invalid_argument("knn: k must be >= 1");
  auto Xs = std::make_shared<Matrix>(X);
  auto ys = std::make_shared<std::vector<int>>(y);
  int kk = std::min<int>(k, static_cast<int>(X.size()));
  return FittedModel([Xs, ys, kk](const Vec& q) {
    const std::size_t n = Xs->size();
    std::vector<std::pair<double, std::size_t>> dist(n);
    for (std::size_t i = 0; i < n; ++i) {
      const Vec& xi = (*Xs)[i];
      double s = 0.0;
      for (std::size_t j = 0; j < q.size(); ++j) {
        double dd = xi[j] - q[j];
        s += dd * dd;
      }
      dist[i] = {s, i};
    }
    std::nth_element(dist.begin(), dist.begin() + (kk - 1), dist.end());
    double acc = 0.0;
    for (int i = 0; i < kk; ++i) acc += static_cast<double>((*ys)[dist[static_cast<std::size_t>(i)].second]);
    return acc / static_cast<double>(kk);
  });
}

struct Stump {
  std::size_t feature = 0;
  double threshold = 0.0;
  double left = 0.0;   // x[feature] <= threshold
  double right = 0.0;
};

// Gradient boosting with depth-1 trees on logistic loss. Fits stumps to the
// gradient residuals; leaf values are Newton steps. Feature thresholds come
// from presorted columns.
FittedModel fit_boosted_stumps(const Matrix& X, const std::vector<int>& y,
                               const LearnerConfig& cfg) {
  const std::size_t n = X.size();
  const std::size_t d = X.front().size();
  const double lr = cfg.boost_learning_rate;
  const int min_leaf = std::max(1, cfg.boost_min_leaf);

  double ybar = 0.0;
  for (int v : y) ybar += v;
  ybar /= static_cast<double>(n);
  ybar = clip(ybar, 1e-3, 1.0 - 1e-3);
  const double f0 = std::log(ybar / (1.0 - ybar));

  // presort each feature once
  std::vector<std::vector<std::size_t>> order(d, std::vector<std::size_t>(n));
  for (std::size_t j = 0; j < d; ++j) {
    std::iota(order[j].begin(), order[j].end(), std::size_t{0});
    std::stable_sort(order[j].begin(), order[j].end(),
                     [&X, j](std::size_t a, std::size_t b) { return X[a][j] < X[b][j]; });
  }

  Vec f(n, f0);
  std::vector<Stump> stumps;
  stumps.reserve(static_cast<std::size_t>(cfg.boost_rounds));

  Vec g(n), h(n);
  for (int round = 0; round < cfg.boost_rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      double p = sigmoid(f[i]);
      g[i] = p - static_cast<double>(y[i]);      // gradient
      h[i] = std::max(p * (1.0 - p), 1e-6);      // hessian
    }
    double g_tot = std::accumulate(g.begin(), g.end(), 0.0);
    double h_tot = std::accumulate(h.begin(), h.end(), 0.0);

    double best_gain = 0.0;
    Stump best;
    bool found = false;
    for (std::size_t j = 0; j < d; ++j) {
      double gl = 0.0, hl = 0.0;
      const auto& ord = order[j];
      for (std::size_t pos = 0; pos + 1 < n; ++pos) {
        std::size_t i = ord[pos];
        gl += g[i];
        hl += h[i];
        if (X[ord[pos]][j] == X[ord[pos + 1]][j]) continue;
        if (pos + 1 < static_cast<std::size_t>(min_leaf) ||
            n - pos - 1 < static_cast<std::size_t>(min_leaf))
          continue;
        double gr = g_tot - gl, hr = h_tot - hl;
        double gain = gl * gl / hl + gr * gr / hr - g_tot * g_tot / h_tot;
        if (gain > best_gain + 1e-12) {
          best_gain = gain;
          best.feature = j;
          best.threshold = 0.5 * (X[ord[pos]][j] + X[ord[pos + 1]][j]);
          best.left = -gl / hl;
          best.right = -gr / hr;
          found = true;
        }
      }
    }
    if (!found) break;
    best.left *= lr;
    best.right *= lr;
    stumps.push_back(best);
    for (std::size_t i = 0; i < n; ++i)
      f[i] += (X[i][best.feature] <= best.threshold) ? best.left : best.right;
  }

  return FittedModel([f0, stumps, d](const Vec& x) {
    if (x.size() != d) throw std::invalid_argument("boosted predict: dimension mismatch");
    double e = f0;
    for (const Stump& s : stumps) e += (x[s.feature] <= s.threshold) ? s.left : s.right;
    return sigmoid(e);
  });
}

}  // namespace

FittedModel fit_learner(const Matrix& features, const std::vector<int>& labels,
                        const LearnerConfig& config, double clip_eps) {
  if (features.empty()) throw std::invalid_argument("fit_learner: empty input");
  if (features.size() != labels.size())
    throw std::invalid_argument("fit_learner: feature/label length mismatch");

  bool any0 = false, any1 = false;
  for (int v : labels) {
    if (v == 0) any0 = true;
    else if (v == 1) any1 = true;
    else throw std::invalid_argument("fit_learner: labels must be 0/1");
  }
  if (!any0 || !any1) {
    double rate = any1 ? 1.0 : 0.0;
    return FittedModel::constant(clip(rate, clip_eps, 1.0 - clip_eps));
  }
  if (features.size() < 2) throw std::invalid_argument("fit_learner: need >= 2 observations");

  switch (config.family) {
    case LearnerFamily::RegularizedLogistic:
      return fit_logistic(features, labels, config.logistic_penalty);
    case LearnerFamily::KNearestNeighbor:
      return fit_knn(features, labels, config.knn_k);
    case LearnerFamily::BoostedStumps:
      return fit_boosted_stumps(features, labels, config);
  }
  throw std::logic_error("fit_learner: unknown family");
}

}  // namespace riskbounds
