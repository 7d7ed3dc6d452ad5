#pragma once

// Report emission (JSON + CSV tables + plot-data CSVs) and JSON model files
// for fitted bound regressors.

#include <string>

#include "riskbounds/mu_learner.hpp"
#include "riskbounds/overall.hpp"
#include "riskbounds/simulation.hpp"

namespace riskbounds {

std::string bounds_estimate_json(const BoundsEstimate& est, const std::string& estimand,
                                 const std::string& bounding);

// Writes report.json plus cells.csv / learner.csv / decision.csv as requested
// by formats ("json", "csv").
void emit_report(const SimulationReport& report, const std::string& out_dir,
                 const std::vector<std::string>& formats);

// Plot-data CSV with header gamma,lower,upper (breakdown-style sweeps).
void write_gamma_sweep_csv(const std::string& path, const Vec& gammas, const Vec& lower,
                           const Vec& upper);

// Plot-data CSV with header x,lower,upper.
void write_xy_bounds_csv(const std::string& path, const Vec& x, const Vec& lower,
                         const Vec& upper);

// Bound-regressor model file (smoother-backed regressors only).
void save_bound_regressors(const std::string& path, const BoundRegressors& model);
BoundRegressors load_bound_regressors(const std::string& path);

}  // namespace riskbounds
