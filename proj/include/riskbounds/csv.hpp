#pragma once

// CSV ingestion and emission. Covariates are the columns prefixed `x_`;
// reserved column names: d, y, z, y_proxy, g, score.

#include <optional>
#include <string>

#include "riskbounds/data.hpp"

namespace riskbounds {

struct CsvData {
  std::vector<Record> records;
  std::optional<Vec> score;  // present when the file carries a score column
};

CsvData load_csv(const std::string& path);

// Locale-independent emission (dot decimal, %.17g, fixed column order),
// byte-stable for identical inputs.
void save_csv(const std::string& path, const Dataset& data,
              const std::optional<Vec>& score = std::nullopt);

}  // namespace riskbounds
