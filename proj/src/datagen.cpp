#include "distkm/datagen.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>

#include "distkm/rng.hpp"

namespace distkm {

void GaussianMixtureSpec::validate() const {
  if (k < 1) throw std::invalid_argument("gaussian mixture: k must be positive");
  if (dim < 1) throw std::invalid_argument("gaussian mixture: dim must be positive");
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian mixture: sigma must be positive");
  if (n < 1) throw std::invalid_argument("gaussian mixture: n must be positive");
  if (!(cube_side > 0.0)) throw std::invalid_argument("gaussian mixture: cube side must be positive");
}

void HardInstanceSpec::validate() const {
  if (k < 2) throw std::invalid_argument("hard instance: k must be at least 2");
  if (z < 1) throw std::invalid_argument("hard instance: z must be positive");
  if (!(separation > 0.0)) throw std::invalid_argument("hard instance: separation must be positive");
}

PlantedDataset gen_gaussian_mixture(const GaussianMixtureSpec& spec) {
  spec.validate();
  RngStream rng(mix64(spec.seed));

  PlantedDataset out;
  out.planted_centers = CenterSet(spec.dim);
  std::vector<double> mean(spec.dim);
  for (int c = 0; c < spec.k; ++c) {
    for (double& v : mean) v = rng.uniform() * spec.cube_side;
    out.planted_centers.push_back(PointView(mean.data(), mean.size()));
  }

  // Component weights proportional to (i+1)^(-gamma), cumulative for draws.
  std::vector<double> cum(spec.k);
  double total = 0.0;
  for (int c = 0; c < spec.k; ++c) {
    total += std::pow(static_cast<double>(c + 1), -spec.zipf_gamma);
    cum[c] = total;
  }

  out.points = Dataset(spec.dim);
  out.points.reserve(static_cast<std::size_t>(spec.n));
  out.labels.reserve(static_cast<std::size_t>(spec.n));
  std::vector<double> p(spec.dim);
  for (std::int64_t i = 0; i < spec.n; ++i) {
    const double u = rng.uniform() * total;
    int c = 0;
    while (c + 1 < spec.k && u >= cum[c]) ++c;
    const PointView mu = out.planted_centers[c];
    for (int j = 0; j < spec.dim; ++j) p[j] = mu[j] + spec.sigma * rng.normal();
    out.points.push_back(PointView(p.data(), p.size()));
    out.labels.push_back(c);
  }
  out.planted_cost = cost(out.points, out.planted_centers);
  return out;
}

PlantedDataset gen_hard_instance(const HardInstanceSpec& spec) {
  spec.validate();
  constexpr double kRatio = 8.0;

  PlantedDataset out;
  out.planted_centers = CenterSet(1);
  std::vector<double> position(spec.k);
  for (int i = 0; i < spec.k; ++i) {
    position[i] = spec.separation * std::pow(kRatio, i);
    out.planted_centers.push_back({position[i]});
  }

  out.points = Dataset(1);
  out.points.reserve(static_cast<std::size_t>(spec.z) * (2 * spec.k - 2));
  for (int block = 0; block < spec.z; ++block) {
    for (int copy = 0; copy < spec.k - 1; ++copy) {
      out.points.push_back({position[0]});
      out.labels.push_back(0);
    }
    for (int i = 1; i < spec.k; ++i) {
      out.points.push_back({position[i]});
      out.labels.push_back(i);
    }
  }
  out.planted_cost = 0.0;
  return out;
}

namespace {

double parse_cell(const std::string& cell, std::size_t row, std::size_t col) {
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (end[-1] == ' ' || end[-1] == '\t' || end[-1] == '\r')) --end;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || begin == end) {
    throw CsvParseError("csv: non-numeric cell at row " + std::to_string(row) +
                            ", column " + std::to_string(col),
                        row, col);
  }
  if (!std::isfinite(value)) {
    throw CsvParseError("csv: non-finite value at row " + std::to_string(row) +
                            ", column " + std::to_string(col),
                        row, col);
  }
  return value;
}

std::vector<std::string> split(const std::string& line, char delimiter) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delimiter, start);
    if (pos == std::string::npos) {
      cells.push_back(line.substr(start));
      return cells;
    }
    cells.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace

Dataset load_csv(const std::string& path, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("csv: cannot open " + path);

  Dataset out;
  std::string line;
  std::size_t row = 0;
  bool skipped_header = false;
  while (std::getline(in, line)) {
    ++row;
    if (options.header && !skipped_header) {
      skipped_header = true;
      continue;
    }
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line, options.delimiter);
    std::vector<double> values;
    if (options.columns.empty()) {
      values.reserve(cells.size());
      for (std::size_t c = 0; c < cells.size(); ++c) {
        values.push_back(parse_cell(cells[c], row, c + 1));
      }
    } else {
      values.reserve(options.columns.size());
      for (int c : options.columns) {
        if (c < 0 || static_cast<std::size_t>(c) >= cells.size()) {
          throw CsvParseError("csv: missing column " + std::to_string(c + 1) +
                                  " at row " + std::to_string(row),
                              row, static_cast<std::size_t>(c + 1));
        }
        values.push_back(parse_cell(cells[c], row, static_cast<std::size_t>(c + 1)));
      }
    }
    if (!out.empty() && values.size() != out.dim()) {
      throw CsvParseError("csv: row " + std::to_string(row) + " has " +
                              std::to_string(values.size()) +
                              " fields, expected " + std::to_string(out.dim()),
                          row, values.size());
    }
    if (out.empty() && out.dim() == 0) out = Dataset(values.size());
    out.push_back(PointView(values.data(), values.size()));
  }
  if (out.empty()) throw std::runtime_error("csv: no data rows in " + path);
  return out;
}

void write_csv(const Dataset& points, const std::string& path) {
  std::ofstream outf(path);
  if (!outf) throw std::runtime_error("csv: cannot write " + path);
  outf.precision(17);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const PointView p = points[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      if (j) outf << ',';
      outf << p[j];
    }
    outf << '\n';
  }
  if (!outf) throw std::runtime_error("csv: write failed for " + path);
}

}  // namespace distkm
