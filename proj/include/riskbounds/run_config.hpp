#pragma once

// JSON run configuration shared by the CLI subcommands.

#include <optional>
#include <string>

#include "riskbounds/simulation.hpp"

namespace riskbounds {

struct RunConfig {
  std::optional<std::string> input_path;   // exactly one of input_path / simulate
  std::optional<DgpConfig> simulate;

  BoundingSpec bounding;
  std::vector<EstimandSpec> estimands;
  LearnerConfig learner = LearnerConfig::logistic(1e-2);
  SmootherConfig smoother = SmootherConfig::ridge(1e-2);
  int folds = 2;
  std::uint64_t seed = 1;
  double eps_clip = 0.01;
  double level = 0.95;
  std::string out_dir = "out";
  std::vector<std::string> formats = {"json", "csv"};

  // simulate subcommand
  std::vector<int> n_grid = {1000};
  int reps = 200;
  int n_train = 1000;
  std::size_t truth_draws = 1000000;
  bool oracle_nuisances = false;
  bool learner_study = false;
  bool decision_study = false;
  int threads = 0;

  // sweep subcommand
  Vec gamma_grid;
  double breakdown_tol = 1e-3;

  // decide subcommand
  double u11 = 0.25, u10 = 0.25, u00 = 0.25, u01 = 0.25;

  ExperimentConfig to_experiment() const;
};

RunConfig load_config(const std::string& path);
RunConfig parse_config_json(const std::string& text);

}  // namespace riskbounds
