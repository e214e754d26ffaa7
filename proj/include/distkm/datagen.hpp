#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "distkm/geometry.hpp"

namespace distkm {

// Spherical Gaussian mixture with component weights following a Zipf law
// (proportional to i^(-zipf_gamma)); means drawn uniformly from the cube
// [0, cube_side]^dim.
struct GaussianMixtureSpec {
  int k = 25;
  int dim = 15;
  double sigma = 0.001;
  double zipf_gamma = 1.5;
  std::int64_t n = 0;
  std::uint64_t seed = 0;
  double cube_side = 1.0;

  void validate() const;
};

// k distinct locations where location 0 appears k-1 times per block and each
// other location once; the whole block is duplicated z times, so
// n = z * (2k - 2) and the optimal k-means cost is exactly zero. Locations
// sit on a line at separation * ratio^i with ratio 8, which keeps every
// pairwise distance at least `separation` and concentrates the d^2 sampling
// mass on one location at a time.
struct HardInstanceSpec {
  int k = 10;
  int z = 1;
  double separation = 1000.0;

  void validate() const;
};

struct PlantedDataset {
  Dataset points;
  CenterSet planted_centers;
  double planted_cost = 0.0;          // cost(points, planted_centers)
  std::vector<std::int32_t> labels;   // generating component per point
};

PlantedDataset gen_gaussian_mixture(const GaussianMixtureSpec& spec);
PlantedDataset gen_hard_instance(const HardInstanceSpec& spec);

struct CsvOptions {
  char delimiter = ',';
  bool header = false;
  std::vector<int> columns;  // empty = all columns
};

class CsvParseError : public std::runtime_error {
 public:
  CsvParseError(const std::string& what, std::size_t row, std::size_t column)
      : std::runtime_error(what), row(row), column(column) {}
  std::size_t row;     // 1-based physical line
  std::size_t column;  // 1-based field
};

// One point per row; the dimension comes from the first data row. Rejects
// non-numeric cells, NaN/Inf, and inconsistent dimensions, naming the
// offending row and column.
Dataset load_csv(const std::string& path, const CsvOptions& options = {});

void write_csv(const Dataset& points, const std::string& path);

}  // namespace distkm
