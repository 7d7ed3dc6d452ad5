#include "riskbounds/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace riskbounds {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

double parse_num(const std::string& s, const std::string& column, std::size_t row) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    while (used < s.size() && std::isspace(static_cast<unsigned char>(s[used]))) ++used;
    if (used != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("row " + std::to_string(row) + ", column '" + column +
                                "': unparsable numeric value '" + s + "'");
  }
}

int parse_binary(const std::string& s, const std::string& column, std::size_t row) {
  double v = parse_num(s, column, row);
  if (v != 0.0 && v != 1.0)
    throw std::invalid_argument("row " + std::to_string(row) + ", column '" + column +
                                "': value must be 0 or 1, got '" + s + "'");
  return static_cast<int>(v);
}

}  // namespace

CsvData load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open file: " + path);

  std::string header;
  if (!std::getline(in, header)) throw std::invalid_argument("empty file: " + path);
  if (!header.empty() && header.back() == '\r') header.pop_back();
  auto cols = split_line(header);

  std::vector<std::size_t> x_cols;
  std::ptrdiff_t c_d = -1, c_y = -1, c_z = -1, c_proxy = -1, c_g = -1, c_score = -1;
  for (std::size_t j = 0; j < cols.size(); ++j) {
    const std::string& name = cols[j];
    if (name.rfind("x_", 0) == 0)
      x_cols.push_back(j);
    else if (name == "d")
      c_d = static_cast<std::ptrdiff_t>(j);
    else if (name == "y")
      c_y = static_cast<std::ptrdiff_t>(j);
    else if (name == "z")
      c_z = static_cast<std::ptrdiff_t>(j);
    else if (name == "y_proxy")
      c_proxy = static_cast<std::ptrdiff_t>(j);
    else if (name == "g")
      c_g = static_cast<std::ptrdiff_t>(j);
    else if (name == "score")
      c_score = static_cast<std::ptrdiff_t>(j);
    else
      throw std::invalid_argument("unknown column '" + name +
                                  "' (covariates must be prefixed x_)");
  }
  if (c_d < 0) throw std::invalid_argument("missing required column 'd'");
  if (c_y < 0) throw std::invalid_argument("missing required column 'y'");
  if (x_cols.empty()) throw std::invalid_argument("no covariate columns (prefix x_) found");

  CsvData out;
  if (c_score >= 0) out.score = Vec{};
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_line(line);
    if (cells.size() != cols.size())
      throw std::invalid_argument("row " + std::to_string(row) + ": expected " +
                                  std::to_string(cols.size()) + " cells, got " +
                                  std::to_string(cells.size()));
    Record r;
    r.x.reserve(x_cols.size());
    for (std::size_t j : x_cols) r.x.push_back(parse_num(cells[j], cols[j], row));
    r.d_sel = parse_binary(cells[static_cast<std::size_t>(c_d)], "d", row);
    r.y_obs = parse_binary(cells[static_cast<std::size_t>(c_y)], "y", row);
    if (c_z >= 0) {
      double zv = parse_num(cells[static_cast<std::size_t>(c_z)], "z", row);
      if (zv != std::floor(zv))
        throw std::invalid_argument("row " + std::to_string(row) + ": z must be an integer");
      r.z = static_cast<int>(zv);
    }
    if (c_proxy >= 0)
      r.y_proxy = parse_binary(cells[static_cast<std::size_t>(c_proxy)], "y_proxy", row);
    if (c_g >= 0) r.g = parse_binary(cells[static_cast<std::size_t>(c_g)], "g", row);
    if (c_score >= 0) {
      double s = parse_num(cells[static_cast<std::size_t>(c_score)], "score", row);
      if (!(s >= 0.0 && s <= 1.0))
        throw std::invalid_argument("row " + std::to_string(row) + ": score outside [0,1]");
      out.score->push_back(s);
    }
    out.records.push_back(std::move(r));
  }
  if (out.records.empty()) throw std::invalid_argument("no data rows in " + path);
  return out;
}

void save_csv(const std::string& path, const Dataset& data, const std::optional<Vec>& score) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::invalid_argument("cannot write file: " + path);

  for (std::size_t j = 0; j < data.d; ++j) std::fprintf(f, "%sx_%zu", j ? "," : "", j);
  std::fprintf(f, ",d,y");
  bool has_z = !data.records.empty() && data.records.front().z.has_value();
  if (has_z) std::fprintf(f, ",z");
  if (data.has_proxy()) std::fprintf(f, ",y_proxy");
  if (data.has_group()) std::fprintf(f, ",g");
  if (score) std::fprintf(f, ",score");
  std::fprintf(f, "\n");

  for (std::size_t i = 0; i < data.n(); ++i) {
    const Record& r = data.records[i];
    for (std::size_t j = 0; j < data.d; ++j)
      std::fprintf(f, "%s%.17g", j ? "," : "", r.x[j]);
    std::fprintf(f, ",%d,%d", r.d_sel, r.y_obs);
    if (has_z) std::fprintf(f, ",%d", *r.z);
    if (data.has_proxy()) std::fprintf(f, ",%d", *r.y_proxy);
    if (data.has_group()) std::fprintf(f, ",%d", *r.g);
    if (score) std::fprintf(f, ",%.17g", (*score)[i]);
    std::fprintf(f, "\n");
  }
  std::fclose(f);
}

}  // namespace riskbounds
