#include "riskbounds/smoother.hpp"

#include <algorithm>
#include <numeric>

namespace riskbounds {

SmootherConfig SmootherConfig::knn(int k) {
  SmootherConfig c;
  c.kind = SmootherKind::Knn;
  c.knn_k = k;
  return c;
}

SmootherConfig SmootherConfig::ridge(double lambda, int degree) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("ridge lambda must be nonnegative");
  if (degree != 1 && degree != 2) throw std::invalid_argument("ridge degree must be 1 or 2");
  SmootherConfig c;
  c.kind = SmootherKind::Ridge;
  c.ridge_lambda = lambda;
  c.degree = degree;
  return c;
}

Vec SmootherFit::expand(const Vec& x) const {
  if (cfg_.degree == 1) return x;
  Vec out = x;
  out.reserve(2 * x.size());
  for (double v : x) out.push_back(v * v);
  return out;
}

double SmootherFit::predict(const Vec& x) const {
  if (x.size() != input_dim_) throw std::invalid_argument("smoother predict: dimension mismatch");
  if (cfg_.kind == SmootherKind::Ridge) {
    Vec f = expand(x);
    double acc = intercept_;
    for (std::size_t j = 0; j < f.size(); ++j) acc += coef_[j] * (f[j] - means_[j]) / sds_[j];
    return acc;
  }
  const std::size_t n = train_x_.size();
  std::size_t k = static_cast<std::size_t>(std::min<int>(cfg_.knn_k, static_cast<int>(n)));
  std::vector<std::pair<double, std::size_t>> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      double dd = train_x_[i][j] - x[j];
      s += dd * dd;
    }
    dist[i] = {s, i};
  }
  std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k - 1), dist.end());
  double acc = 0.0;
  for (std::size_t i = 0; i < k; ++i) acc += train_y_[dist[i].second];
  return acc / static_cast<double>(k);
}

SmootherFit SmootherFit::make_ridge(SmootherConfig cfg, std::size_t input_dim, Vec means, Vec sds,
                                    Vec coef, double intercept) {
  SmootherFit f;
  f.cfg_ = cfg;
  f.input_dim_ = input_dim;
  f.means_ = std::move(means);
  f.sds_ = std::move(sds);
  f.coef_ = std::move(coef);
  f.intercept_ = intercept;
  return f;
}

SmootherFit SmootherFit::make_knn(SmootherConfig cfg, Matrix train_x, Vec train_y) {
  SmootherFit f;
  f.cfg_ = cfg;
  f.input_dim_ = train_x.empty() ? 0 : train_x.front().size();
  f.train_x_ = std::move(train_x);
  f.train_y_ = std::move(train_y);
  return f;
}

SmootherFit fit_smoother(const Matrix& X, const Vec& y, const SmootherConfig& cfg) {
  if (X.empty() || X.size() != y.size())
    throw std::invalid_argument("fit_smoother: empty input or length mismatch");

  if (cfg.kind == SmootherKind::Knn) return SmootherFit::make_knn(cfg, X, y);

  SmootherFit tmp;
  tmp.cfg_ = cfg;
  const std::size_t n = X.size();
  const std::size_t d_in = X.front().size();

  Matrix F(n);
  for (std::size_t i = 0; i < n; ++i) {
    tmp.input_dim_ = d_in;
    F[i] = tmp.expand(X[i]);
  }
  const std::size_t p = F.front().size();

  Vec means(p, 0.0), sds(p, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t i = 0; i < n; ++i) means[j] += F[i][j];
    means[j] /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      double d = F[i][j] - means[j];
      sds[j] += d * d;
    }
    sds[j] = std::sqrt(sds[j] / static_cast<double>(n));
    if (sds[j] < 1e-12) {
      if (cfg.ridge_lambda <= 0.0)
        throw std::invalid_argument("fit_smoother: degenerate constant feature without penalty");
      sds[j] = 1.0;  // constant column; penalty keeps its coefficient at zero
    }
  }

  double ybar = mean(y);
  // normal equations on standardized features, ridge on slopes only
  std::vector<Vec> A(p, Vec(p, 0.0));
  Vec b(p, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    Vec zi(p);
    for (std::size_t j = 0; j < p; ++j) zi[j] = (F[i][j] - means[j]) / sds[j];
    double yc = y[i] - ybar;
    for (std::size_t j = 0; j < p; ++j) {
      b[j] += zi[j] * yc;
      for (std::size_t k = 0; k <= j; ++k) A[j][k] += zi[j] * zi[k];
    }
  }
  double lam = cfg.ridge_lambda * static_cast<double>(n);
  for (std::size_t j = 0; j < p; ++j) {
    A[j][j] += lam + 1e-10;
    for (std::size_t k = j + 1; k < p; ++k) A[j][k] = A[k][j];
  }
  // Cholesky solve
  for (std::size_t j = 0; j < p; ++j) {
    double diag = A[j][j];
    for (std::size_t k = 0; k < j; ++k) diag -= A[j][k] * A[j][k];
    A[j][j] = std::sqrt(std::max(diag, 1e-12));
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

  return SmootherFit::make_ridge(cfg, d_in, std::move(means), std::move(sds), std::move(b), ybar);
}

}  // namespace riskbounds
