#include "riskbounds/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace riskbounds {

using nlohmann::json;

std::string bounds_estimate_json(const BoundsEstimate& est, const std::string& estimand,
                                 const std::string& bounding) {
  json j;
  j["estimand"] = estimand;
  j["bounding"] = bounding;
  j["lower"] = est.lower;
  j["upper"] = est.upper;
  j["n"] = est.n;
  if (est.has_cov) {
    j["cov"] = {{est.cov[0][0], est.cov[0][1]}, {est.cov[1][0], est.cov[1][1]}};
  }
  if (est.has_ci) {
    j["level"] = est.level;
    j["ci_lower"] = {est.ci_lower.first, est.ci_lower.second};
    j["ci_upper"] = {est.ci_upper.first, est.ci_upper.second};
  }
  if (!est.fold_lower.empty()) {
    j["fold_lower"] = est.fold_lower;
    j["fold_upper"] = est.fold_upper;
    j["swapped_boxes"] = est.swapped_boxes;
  }
  return j.dump(2);
}

namespace {

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot write file: " + path);
  out << text;
}

}  // namespace

void emit_report(const SimulationReport& report, const std::string& out_dir,
                 const std::vector<std::string>& formats) {
  std::filesystem::create_directories(out_dir);
  bool want_json = false, want_csv = false;
  for (const auto& f : formats) {
    if (f == "json") want_json = true;
    else if (f == "csv") want_csv = true;
    else throw std::invalid_argument("unknown output format '" + f + "' (supported: json, csv)");
  }

  if (want_json) {
    json j;
    j["failed_reps"] = report.failed_reps;
    j["total_reps"] = report.total_reps;
    j["cells"] = json::array();
    for (const auto& c : report.cells) {
      json cj{{"estimand", c.estimand}, {"bounding", c.bounding}, {"side", c.side},
              {"n", c.n},               {"truth", c.truth},       {"mean_estimate", c.mean_estimate},
              {"bias", c.bias},         {"sd", c.sd},             {"mean_se", c.mean_se},
              {"coverage", c.coverage}, {"reps", c.reps}};
      j["cells"].push_back(cj);
    }
    j["learner_cells"] = json::array();
    for (const auto& c : report.learner_cells)
      j["learner_cells"].push_back(json{{"bounding", c.bounding},
                                        {"n", c.n},
                                        {"imse_feasible", c.imse_feasible},
                                        {"imse_oracle", c.imse_oracle},
                                        {"imse_plugin", c.imse_plugin},
                                        {"reps", c.reps}});
    j["decision_cells"] = json::array();
    for (const auto& c : report.decision_cells)
      j["decision_cells"].push_back(json{{"bounding", c.bounding},
                                         {"n", c.n},
                                         {"mean_regret", c.mean_regret},
                                         {"max_regret", c.max_regret},
                                         {"min_regret", c.min_regret},
                                         {"reps", c.reps}});
    write_text(out_dir + "/report.json", j.dump(2) + "\n");
  }

  if (want_csv) {
    std::string s = "estimand,bounding,side,n,truth,mean_estimate,bias,sd,mean_se,coverage,reps\n";
    char buf[512];
    for (const auto& c : report.cells) {
      std::snprintf(buf, sizeof(buf), "%s,%s,%s,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n",
                    c.estimand.c_str(), c.bounding.c_str(), c.side.c_str(), c.n, c.truth,
                    c.mean_estimate, c.bias, c.sd, c.mean_se, c.coverage, c.reps);
      s += buf;
    }
    write_text(out_dir + "/cells.csv", s);

    if (!report.learner_cells.empty()) {
      std::string t = "bounding,n,imse_feasible,imse_oracle,imse_plugin,reps\n";
      for (const auto& c : report.learner_cells) {
        std::snprintf(buf, sizeof(buf), "%s,%d,%.17g,%.17g,%.17g,%d\n", c.bounding.c_str(), c.n,
                      c.imse_feasible, c.imse_oracle, c.imse_plugin, c.reps);
        t += buf;
      }
      write_text(out_dir + "/learner.csv", t);
    }
    if (!report.decision_cells.empty()) {
      std::string t = "bounding,n,mean_regret,max_regret,min_regret,reps\n";
      for (const auto& c : report.decision_cells) {
        std::snprintf(buf, sizeof(buf), "%s,%d,%.17g,%.17g,%.17g,%d\n", c.bounding.c_str(), c.n,
                      c.mean_regret, c.max_regret, c.min_regret, c.reps);
        t += buf;
      }
      write_text(out_dir + "/decision.csv", t);
    }
  }
}

void write_gamma_sweep_csv(const std::string& path, const Vec& gammas, const Vec& lower,
                           const Vec& upper) {
  std::string s = "gamma,lower,upper\n";
  char buf[160];
  for (std::size_t i = 0; i < gammas.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", gammas[i], lower[i], upper[i]);
    s += buf;
  }
  write_text(path, s);
}

void write_xy_bounds_csv(const std::string& path, const Vec& x, const Vec& lower,
                         const Vec& upper) {
  std::string s = "x,lower,upper\n";
  char buf[160];
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", x[i], lower[i], upper[i]);
    s += buf;
  }
  write_text(path, s);
}

namespace {

json smoother_to_json(const SmootherFit& fit) {
  json j;
  if (fit.kind() == SmootherKind::Ridge) {
    j["kind"] = "ridge";
    j["degree"] = fit.config().degree;
    j["lambda"] = fit.config().ridge_lambda;
    j["input_dim"] = fit.input_dim();
    j["means"] = fit.feature_means();
    j["sds"] = fit.feature_sds();
    j["coef"] = fit.coefficients();
    j["intercept"] = fit.intercept();
  } else {
    j["kind"] = "knn";
    j["k"] = fit.config().knn_k;
    j["train_x"] = fit.train_x();
    j["train_y"] = fit.train_y();
  }
  return j;
}

SmootherFit smoother_from_json(const json& j) {
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "ridge") {
    SmootherConfig cfg = SmootherConfig::ridge(j.at("lambda").get<double>(),
                                               j.at("degree").get<int>());
    return SmootherFit::make_ridge(cfg, j.at("input_dim").get<std::size_t>(),
                                   j.at("means").get<Vec>(), j.at("sds").get<Vec>(),
                                   j.at("coef").get<Vec>(), j.at("intercept").get<double>());
  }
  if (kind == "knn") {
    SmootherConfig cfg = SmootherConfig::knn(j.at("k").get<int>());
    return SmootherFit::make_knn(cfg, j.at("train_x").get<Matrix>(), j.at("train_y").get<Vec>());
  }
  throw std::invalid_argument("model file: unknown smoother kind '" + kind + "'");
}

}  // namespace

void save_bound_regressors(const std::string& path, const BoundRegressors& model) {
  if (model.lo_direct || model.hi_direct)
    throw std::invalid_argument("save_bound_regressors: plug-in regressors are not serializable");
  json j;
  j["clip01"] = model.clip01;
  j["lo_parts"] = json::array();
  j["hi_parts"] = json::array();
  for (const auto& p : model.lo_parts) j["lo_parts"].push_back(smoother_to_json(p));
  for (const auto& p : model.hi_parts) j["hi_parts"].push_back(smoother_to_json(p));
  write_text(path, j.dump() + "\n");
}

BoundRegressors load_bound_regressors(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open model file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("model file is not valid JSON: ") + e.what());
  }
  BoundRegressors m;
  m.clip01 = j.at("clip01").get<bool>();
  for (const auto& p : j.at("lo_parts")) m.lo_parts.push_back(smoother_from_json(p));
  for (const auto& p : j.at("hi_parts")) m.hi_parts.push_back(smoother_from_json(p));
  return m;
}

}  // namespace riskbounds
