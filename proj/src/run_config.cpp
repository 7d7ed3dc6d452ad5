#include "riskbounds/run_config.hpp"

#include <fstream>

#include <json.hpp>

namespace riskbounds {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw std::invalid_argument("config error at " + path + ": " + msg);
}

template <typename T>
T get_or(const json& j, const std::string& key, const std::string& path, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(path + "." + key, e.what());
  }
}

BoundingSpec parse_bounding(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "must be an object");
  std::string family = get_or<std::string>(j, "family", path, "");
  if (family == "unconfounded") return BoundingSpec::unconfounded();
  if (family == "worst_case") return BoundingSpec::worst_case();
  if (family == "nonparametric") {
    double glo = get_or<double>(j, "gamma_lo", path, 1.0);
    double ghi = get_or<double>(j, "gamma_hi", path, 1.0);
    return BoundingSpec::nonparametric(glo, ghi);
  }
  if (family == "proxy") return BoundingSpec::proxy_simple();
  if (family == "proxy_general") {
    if (j.contains("alpha")) return BoundingSpec::proxy_general(get_or<double>(j, "alpha", path, 20.0));
    return BoundingSpec::proxy_general();
  }
  if (family == "iv_fixed") {
    if (!j.contains("z")) fail(path, "iv_fixed needs field 'z'");
    return BoundingSpec::iv_fixed(get_or<int>(j, "z", path, 0));
  }
  if (family == "iv_smoothed") return BoundingSpec::iv_smoothed(get_or<double>(j, "alpha", path, 20.0));
  fail(path + ".family",
       "unknown family '" + family +
           "' (supported: unconfounded, worst_case, nonparametric, proxy, proxy_general, "
           "iv_fixed, iv_smoothed)");
}

EstimandSpec parse_estimand(const json& j, const std::string& path) {
  if (j.is_string()) return parse_estimand(json{{"kind", j.get<std::string>()}}, path);
  if (!j.is_object()) fail(path, "must be an object or kind string");
  std::string kind = get_or<std::string>(j, "kind", path, "");
  double tau = get_or<double>(j, "tau", path, 0.5);
  EstimandSpec e;
  if (kind == "mse") {
    e = {"mse", PerformanceSpec::mse()};
  } else if (kind == "calibration") {
    double r1 = get_or<double>(j, "r1", path, 0.0);
    double r2 = get_or<double>(j, "r2", path, 1.0);
    e = {"calibration", PerformanceSpec::calibration(r1, r2)};
  } else if (kind == "accuracy") {
    e = {"accuracy", PerformanceSpec::accuracy(tau)};
  } else if (kind == "generalized_tpr") {
    e = {"generalized_tpr", PerformanceSpec::generalized_tpr()};
  } else if (kind == "generalized_fpr") {
    e = {"generalized_fpr", PerformanceSpec::generalized_fpr()};
  } else if (kind == "tpr" || kind == "threshold_tpr") {
    e = {"tpr", PerformanceSpec::threshold_tpr(tau)};
  } else if (kind == "fpr" || kind == "threshold_fpr") {
    e = {"fpr", PerformanceSpec::threshold_fpr(tau)};
  } else if (kind == "precision") {
    e = {"precision", PerformanceSpec::precision(tau)};
  } else if (kind == "failure_rate") {
    e = {"failure_rate", PerformanceSpec::failure_rate(tau)};
  } else if (kind == "custom_overall") {
    e = {"custom_overall", PerformanceSpec::custom_overall(get_or<double>(j, "beta0", path, 0.0),
                                                           get_or<double>(j, "beta1", path, 0.0))};
  } else if (kind == "custom_positive") {
    e = {"custom_positive", PerformanceSpec::custom_positive(get_or<double>(j, "beta0", path, 0.0))};
  } else if (kind == "custom_negative") {
    e = {"custom_negative", PerformanceSpec::custom_negative(get_or<double>(j, "beta0", path, 0.0))};
  } else {
    fail(path + ".kind", "unknown estimand kind '" + kind + "'");
  }
  if (j.contains("name")) e.name = j.at("name").get<std::string>();
  return e;
}

LearnerConfig parse_learner(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "must be an object");
  std::string family = get_or<std::string>(j, "family", path, "logistic");
  LearnerConfig c;
  if (family == "logistic")
    c = LearnerConfig::logistic(get_or<double>(j, "penalty", path, 1e-2));
  else if (family == "knn")
    c = LearnerConfig::knn(get_or<int>(j, "k", path, 25));
  else if (family == "boosted")
    c = LearnerConfig::boosted(get_or<int>(j, "rounds", path, 200),
                               get_or<double>(j, "learning_rate", path, 0.1));
  else
    fail(path + ".family", "unknown learner family '" + family +
                               "' (supported: logistic, knn, boosted)");
  c.boost_min_leaf = get_or<int>(j, "min_leaf", path, c.boost_min_leaf);
  return c;
}

SmootherConfig parse_smoother(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "must be an object");
  std::string kind = get_or<std::string>(j, "kind", path, "ridge");
  if (kind == "ridge")
    return SmootherConfig::ridge(get_or<double>(j, "lambda", path, 1e-2),
                                 get_or<int>(j, "degree", path, 1));
  if (kind == "knn") return SmootherConfig::knn(get_or<int>(j, "k", path, 50));
  fail(path + ".kind", "unknown smoother kind '" + kind + "' (supported: ridge, knn)");
}

DgpConfig parse_dgp(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "must be an object");
  DgpConfig c;
  c.n = get_or<int>(j, "n", path, c.n);
  c.d = get_or<int>(j, "d", path, c.d);
  c.d_pi = get_or<int>(j, "d_pi", path, c.d_pi);
  c.d_mu = get_or<int>(j, "d_mu", path, c.d_mu);
  c.gamma_true = get_or<double>(j, "gamma_true", path, c.gamma_true);
  c.with_proxy = get_or<bool>(j, "proxy", path, c.with_proxy);
  c.proxy_q = get_or<double>(j, "proxy_q", path, c.proxy_q);
  c.with_instrument = get_or<bool>(j, "instrument", path, c.with_instrument);
  if (j.contains("instrument_shift"))
    c.instrument_shift = j.at("instrument_shift").get<std::vector<double>>();
  c.with_group = get_or<bool>(j, "group", path, c.with_group);
  c.validate();
  return c;
}

}  // namespace

ExperimentConfig RunConfig::to_experiment() const {
  if (!simulate) throw std::invalid_argument("config: simulate block required for this command");
  ExperimentConfig e;
  e.dgp = *simulate;
  e.dgp.seed = seed;
  e.n_grid = n_grid;
  e.reps = reps;
  e.estimands = estimands;
  e.boundings = {bounding};
  e.learner = learner;
  e.smoother = smoother;
  e.folds = folds;
  e.eps_clip = eps_clip;
  e.level = level;
  e.n_train = n_train;
  e.truth_draws = truth_draws;
  e.use_oracle_nuisances = oracle_nuisances;
  e.learner_study = learner_study;
  e.decision_study = decision_study;
  e.seed = seed;
  e.threads = threads;
  return e;
}

RunConfig parse_config_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config error at $: must be an object");

  RunConfig c;
  bool has_input = j.contains("input");
  bool has_sim = j.contains("simulate");
  if (has_input == has_sim)
    throw std::invalid_argument("config error at $: exactly one of 'input' or 'simulate' required");
  if (has_input) c.input_path = j.at("input").get<std::string>();
  if (has_sim) c.simulate = parse_dgp(j.at("simulate"), "simulate");

  if (j.contains("bounding")) c.bounding = parse_bounding(j.at("bounding"), "bounding");
  if (j.contains("estimand")) c.estimands.push_back(parse_estimand(j.at("estimand"), "estimand"));
  if (j.contains("estimands")) {
    const json& arr = j.at("estimands");
    if (!arr.is_array()) throw std::invalid_argument("config error at estimands: must be an array");
    for (std::size_t i = 0; i < arr.size(); ++i)
      c.estimands.push_back(parse_estimand(arr[i], "estimands[" + std::to_string(i) + "]"));
  }
  if (j.contains("learner")) c.learner = parse_learner(j.at("learner"), "learner");
  if (j.contains("smoother")) c.smoother = parse_smoother(j.at("smoother"), "smoother");

  c.folds = get_or<int>(j, "folds", "$", c.folds);
  if (c.folds < 2) throw std::invalid_argument("config error at folds: must be >= 2");
  c.seed = get_or<std::uint64_t>(j, "seed", "$", c.seed);
  c.eps_clip = get_or<double>(j, "eps_clip", "$", c.eps_clip);
  c.level = get_or<double>(j, "level", "$", c.level);
  c.out_dir = get_or<std::string>(j, "out", "$", c.out_dir);
  if (j.contains("formats")) c.formats = j.at("formats").get<std::vector<std::string>>();

  if (j.contains("n_grid")) c.n_grid = j.at("n_grid").get<std::vector<int>>();
  else if (c.simulate) c.n_grid = {c.simulate->n};
  c.reps = get_or<int>(j, "reps", "$", c.reps);
  c.n_train = get_or<int>(j, "n_train", "$", c.n_train);
  c.truth_draws = get_or<std::size_t>(j, "truth_draws", "$", c.truth_draws);
  c.oracle_nuisances = get_or<bool>(j, "oracle_nuisances", "$", c.oracle_nuisances);
  c.learner_study = get_or<bool>(j, "learner_study", "$", c.learner_study);
  c.decision_study = get_or<bool>(j, "decision_study", "$", c.decision_study);
  c.threads = get_or<int>(j, "threads", "$", c.threads);

  if (j.contains("gamma_grid")) c.gamma_grid = j.at("gamma_grid").get<Vec>();
  c.breakdown_tol = get_or<double>(j, "breakdown_tol", "$", c.breakdown_tol);

  if (j.contains("utilities")) {
    const json& u = j.at("utilities");
    c.u11 = get_or<double>(u, "u11", "utilities", c.u11);
    c.u10 = get_or<double>(u, "u10", "utilities", c.u10);
    c.u00 = get_or<double>(u, "u00", "utilities", c.u00);
    c.u01 = get_or<double>(u, "u01", "utilities", c.u01);
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_config_json(text);
}

}  // namespace riskbounds
