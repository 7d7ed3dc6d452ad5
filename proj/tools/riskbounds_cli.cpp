// Command-line surface: evaluate bounds on a supplied score, learn bound
// regressors, build max-min decision rules, run replication studies, and
// sweep confounding strength with a breakdown search.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "riskbounds/csv.hpp"
#include "riskbounds/report.hpp"
#include "riskbounds/run_config.hpp"

namespace rb = riskbounds;

namespace {

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> folds;
  std::optional<double> eps_clip;
  std::optional<int> reps;
  std::optional<std::string> out;
  std::optional<int> threads;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON run configuration")->required();
    cmd->add_option("--seed", seed, "override RNG seed");
    cmd->add_option("--folds", folds, "override cross-fitting fold count");
    cmd->add_option("--eps-clip", eps_clip, "override propensity clip");
    cmd->add_option("--reps", reps, "override replication count");
    cmd->add_option("--out", out, "override output directory");
    cmd->add_option("--threads", threads, "override worker thread count");
  }

  rb::RunConfig load() const {
    rb::RunConfig c = rb::load_config(config_path);
    if (seed) c.seed = *seed;
    if (folds) c.folds = *folds;
    if (eps_clip) c.eps_clip = *eps_clip;
    if (reps) c.reps = *reps;
    if (out) c.out_dir = *out;
    if (threads) c.threads = *threads;
    return c;
  }
};

struct LoadedData {
  rb::Dataset data;
  rb::Score score;
};

LoadedData obtain_data(const rb::RunConfig& cfg) {
  if (cfg.input_path) {
    rb::CsvData csv = rb::load_csv(*cfg.input_path);
    rb::Dataset data = rb::validate_dataset(std::move(csv.records));
    if (!csv.score)
      throw std::invalid_argument("input CSV needs a 'score' column for this command");
    return {std::move(data), rb::Score::from_column(std::move(*csv.score))};
  }
  rb::DgpConfig dgp = *cfg.simulate;
  dgp.seed = cfg.seed;
  rb::SimulatedData sim = rb::generate_dgp(dgp);
  rb::Score score = rb::fit_sim_score(dgp, cfg.n_train, cfg.learner, cfg.seed);
  return {std::move(sim.data), std::move(score)};
}

rb::BoundsEstimate bounds_for(const rb::Dataset& data, const rb::Score& score,
                              const rb::EstimandSpec& est, const rb::BoundingSpec& bounding,
                              const rb::NuisanceBundle& bundle, double level) {
  switch (est.spec.estimand_class()) {
    case rb::EstimandClass::Overall:
      return rb::estimate_overall_bounds(data, score, est.spec, bounding, bundle, level);
    case rb::EstimandClass::PositiveClass:
      return rb::estimate_positive_class_bounds(data, score, est.spec, bounding, bundle);
    case rb::EstimandClass::NegativeClass:
      return rb::estimate_negative_class_bounds(data, score, est.spec, bounding, bundle);
  }
  throw std::logic_error("unreachable");
}

int cmd_evaluate(const CommonFlags& flags) {
  rb::RunConfig cfg = flags.load();
  if (cfg.estimands.empty())
    throw std::invalid_argument("evaluate: at least one estimand required");
  LoadedData in = obtain_data(cfg);
  rb::FoldAssignment folds = rb::split_folds(in.data.n(), cfg.folds, cfg.seed);
  rb::NuisanceBundle bundle =
      rb::cross_fit_nuisances(in.data, folds, cfg.learner, cfg.bounding, cfg.eps_clip);

  std::filesystem::create_directories(cfg.out_dir);
  std::string all = "[\n";
  for (std::size_t i = 0; i < cfg.estimands.size(); ++i) {
    rb::BoundsEstimate est =
        bounds_for(in.data, in.score, cfg.estimands[i], cfg.bounding, bundle, cfg.level);
    std::string j = rb::bounds_estimate_json(est, cfg.estimands[i].name,
                                             rb::bounding_spec_label(cfg.bounding));
    all += j + (i + 1 < cfg.estimands.size() ? ",\n" : "\n");
  }
  all += "]\n";
  std::cout << all;
  std::ofstream out(cfg.out_dir + "/bounds.json", std::ios::binary);
  out << all;
  return 0;
}

int cmd_learn_bounds(const CommonFlags& flags) {
  rb::RunConfig cfg = flags.load();
  LoadedData in = obtain_data(cfg);
  rb::FoldAssignment folds = rb::split_folds(in.data.n(), cfg.folds, cfg.seed);
  rb::BoundRegressors model = rb::learn_mu_bounds(in.data, folds, cfg.learner, cfg.bounding,
                                                  cfg.smoother, cfg.eps_clip);
  std::filesystem::create_directories(cfg.out_dir);
  rb::save_bound_regressors(cfg.out_dir + "/model.json", model);

  // bound-function plot data along the first covariate
  std::vector<std::size_t> idx(in.data.n());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return in.data.records[a].x[0] < in.data.records[b].x[0];
  });
  rb::Vec xs, lo, hi;
  for (std::size_t i : idx) {
    const rb::Vec& x = in.data.records[i].x;
    xs.push_back(x[0]);
    lo.push_back(model.mu_lo(x));
    hi.push_back(model.mu_hi(x));
  }
  rb::write_xy_bounds_csv(cfg.out_dir + "/mu_bounds.csv", xs, lo, hi);
  std::cout << "model written to " << cfg.out_dir << "/model.json (" << in.data.n()
            << " records)\n";
  return 0;
}

int cmd_decide(const CommonFlags& flags, const std::string& model_path) {
  rb::RunConfig cfg = flags.load();
  rb::BoundRegressors model = rb::load_bound_regressors(model_path);
  model.clip01 = true;
  rb::UtilitySpec util = rb::UtilitySpec::constants(cfg.u11, cfg.u10, cfg.u00, cfg.u01);
  rb::DecisionRule rule = rb::maxmin_rule([&](const rb::Vec& x) { return model.mu_lo(x); },
                                          [&](const rb::Vec& x) { return model.mu_hi(x); }, util);

  LoadedData in = obtain_data(cfg);
  rb::Matrix sample;
  for (const auto& r : in.data.records) sample.push_back(r.x);
  auto [w_lo, w_hi] = rb::welfare_bounds(rule, [&](const rb::Vec& x) { return model.mu_lo(x); },
                                         [&](const rb::Vec& x) { return model.mu_hi(x); }, util,
                                         sample);

  std::filesystem::create_directories(cfg.out_dir);
  std::ofstream rj(cfg.out_dir + "/rule.json", std::ios::binary);
  rj << "{\n  \"model\": \"" << model_path << "\",\n  \"utilities\": {\"u11\": " << cfg.u11
     << ", \"u10\": " << cfg.u10 << ", \"u00\": " << cfg.u00 << ", \"u01\": " << cfg.u01
     << "},\n  \"rule\": \"decide 1 iff (u11+u10)*mu_hi(x) + (u00+u01)*mu_lo(x) <= u10+u00\",\n"
     << "  \"welfare_lower\": " << w_lo << ",\n  \"welfare_upper\": " << w_hi << "\n}\n";

  std::ofstream dc(cfg.out_dir + "/decisions.csv", std::ios::binary);
  dc << "index,decision\n";
  for (std::size_t i = 0; i < sample.size(); ++i)
    dc << i << "," << rule.decide(sample[i]) << "\n";
  std::cout << "worst-case welfare in [" << w_lo << ", " << w_hi << "], decisions written to "
            << cfg.out_dir << "\n";
  return 0;
}

int cmd_simulate(const CommonFlags& flags) {
  rb::RunConfig cfg = flags.load();
  rb::SimulationReport report = rb::run_replications(cfg.to_experiment());
  rb::emit_report(report, cfg.out_dir, cfg.formats);
  std::cout << "report written to " << cfg.out_dir << " (" << report.cells.size()
            << " cells, " << report.failed_reps << " failed reps)\n";
  return 0;
}

int cmd_sweep(const CommonFlags& flags) {
  rb::RunConfig cfg = flags.load();
  if (cfg.estimands.size() != 1)
    throw std::invalid_argument("sweep: exactly one estimand required");
  if (cfg.gamma_grid.empty())
    throw std::invalid_argument("sweep: gamma_grid required");
  if (cfg.bounding.family != rb::BoundingFamily::NonparametricOutcome)
    throw std::invalid_argument("sweep: bounding family must be nonparametric");
  LoadedData in = obtain_data(cfg);
  rb::FoldAssignment folds = rb::split_folds(in.data.n(), cfg.folds, cfg.seed);
  rb::NuisanceBundle bundle =
      rb::cross_fit_nuisances(in.data, folds, cfg.learner, cfg.bounding, cfg.eps_clip);
  const rb::EstimandSpec& est = cfg.estimands.front();

  auto bounds_at = [&](double gamma_hi, int group) -> std::pair<double, double> {
    rb::BoundingSpec b = rb::BoundingSpec::nonparametric(
        std::min(cfg.bounding.gamma_lo, gamma_hi), gamma_hi);
    if (group < 0) {
      rb::BoundsEstimate e = bounds_for(in.data, in.score, est, b, bundle, cfg.level);
      return {e.lower, e.upper};
    }
    if (est.spec.estimand_class() == rb::EstimandClass::Overall) {
      rb::BoundsEstimate full =
          rb::estimate_overall_bounds(in.data, in.score, est.spec, b, bundle, cfg.level);
      double lo = 0.0, hi = 0.0;
      std::size_t count = 0;
      for (std::size_t i = 0; i < in.data.n(); ++i) {
        if (*in.data.records[i].g != group) continue;
        lo += full.per_obs_lower[i];
        hi += full.per_obs_upper[i];
        ++count;
      }
      if (count == 0) throw std::invalid_argument("sweep: empty group");
      return {lo / static_cast<double>(count), hi / static_cast<double>(count)};
    }
    throw std::invalid_argument(
        "sweep breakdown currently supports overall-class estimands with a group column");
  };

  std::filesystem::create_directories(cfg.out_dir);
  rb::Vec lo_all, hi_all;
  for (double g : cfg.gamma_grid) {
    auto [lo, hi] = bounds_at(g, -1);
    lo_all.push_back(lo);
    hi_all.push_back(hi);
  }
  rb::write_gamma_sweep_csv(cfg.out_dir + "/sweep_" + est.name + ".csv", cfg.gamma_grid, lo_all,
                            hi_all);

  if (in.data.has_group()) {
    auto overlap = [&](double gamma_hi) {
      auto [lo0, hi0] = bounds_at(gamma_hi, 0);
      auto [lo1, hi1] = bounds_at(gamma_hi, 1);
      return std::max(lo0, lo1) <= std::min(hi0, hi1);
    };
    double a = cfg.gamma_grid.front(), b = cfg.gamma_grid.back();
    std::string verdict;
    if (overlap(a)) {
      verdict = "intervals already overlap at gamma_hi=" + std::to_string(a);
    } else if (!overlap(b)) {
      verdict = "no overlap up to gamma_hi=" + std::to_string(b);
    } else {
      while (b - a > cfg.breakdown_tol) {
        double mid = 0.5 * (a + b);
        (overlap(mid) ? b : a) = mid;
      }
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.4f", b);
      verdict = std::string("breakdown at gamma_hi=") + buf;
    }
    std::ofstream bf(cfg.out_dir + "/breakdown.txt", std::ios::binary);
    bf << verdict << "\n";
    std::cout << verdict << "\n";
  }
  std::cout << "sweep written to " << cfg.out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"partial-identification bounds for risk score performance under selective labels"};
  app.require_subcommand(1);

  CommonFlags f_eval, f_learn, f_decide, f_sim, f_sweep;
  std::string model_path;

  CLI::App* evaluate = app.add_subcommand("evaluate", "bounds on performance of a supplied score");
  f_eval.attach(evaluate);
  CLI::App* learn = app.add_subcommand("learn-bounds", "fit and serialize bound regressors");
  f_learn.attach(learn);
  CLI::App* decide = app.add_subcommand("decide", "max-min rule from serialized bounds");
  f_decide.attach(decide);
  decide->add_option("--model", model_path, "bound-regressor model file")->required();
  CLI::App* simulate = app.add_subcommand("simulate", "replication studies");
  f_sim.attach(simulate);
  CLI::App* sweep = app.add_subcommand("sweep", "confounding-strength sweeps and breakdown search");
  f_sweep.attach(sweep);

  CLI11_PARSE(app, argc, argv);

  try {
    if (evaluate->parsed()) return cmd_evaluate(f_eval);
    if (learn->parsed()) return cmd_learn_bounds(f_learn);
    if (decide->parsed()) return cmd_decide(f_decide, model_path);
    if (simulate->parsed()) return cmd_simulate(f_sim);
    if (sweep->parsed()) return cmd_sweep(f_sweep);
  } catch (const rb::infeasibility_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
