#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace distkm {

// One point = one row of `dim` doubles. Datasets store rows contiguously;
// indices are stable for the lifetime of the object and duplicates are
// allowed.
using PointView = std::span<const double>;

class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::size_t dim) : dim_(dim) {}
  // Takes ownership of a flat row-major buffer; rejects non-finite values.
  Dataset(std::size_t dim, std::vector<double> flat);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return dim_ == 0 ? 0 : data_.size() / dim_; }
  bool empty() const { return data_.empty(); }

  PointView operator[](std::size_t i) const {
    return PointView(data_.data() + i * dim_, dim_);
  }
  std::span<double> mutable_row(std::size_t i) {
    return std::span<double>(data_.data() + i * dim_, dim_);
  }

  void push_back(PointView p);
  void push_back(std::initializer_list<double> p);
  void append(const Dataset& other);
  // New dataset holding the given rows, in order.
  Dataset take_rows(std::span<const std::uint32_t> rows) const;

  const std::vector<double>& flat() const { return data_; }
  void reserve(std::size_t rows) { data_.reserve(rows * dim_); }

  bool operator==(const Dataset&) const = default;

 private:
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

// Cluster centers share the dataset layout; they need not be members of any
// dataset.
using CenterSet = Dataset;

// Squared Euclidean distance. Throws on dimension mismatch.
double sq_dist(PointView a, PointView b);

// min over centers of sq_dist. Throws if `centers` is empty.
double dist_sq_to_set(PointView x, const CenterSet& centers);

// Per-point squared distance to the nearest center.
std::vector<double> sq_dists_to_set(const Dataset& s, const CenterSet& centers);

// Sum over all points (with multiplicity) of the squared distance to the
// nearest center. Compensated summation keeps ~1e7-term sums stable.
double cost(const Dataset& s, const CenterSet& centers);

// Cost after discarding the `drop` points farthest from the centers. Ties
// among equal distances are broken by dropping the lower index first (the
// value is the same under any tie-break). drop >= |s| gives 0.
double truncated_cost(const Dataset& s, const CenterSet& centers,
                      std::size_t drop);

// Index of a nearest center per point; ties go to the lowest center index.
std::vector<std::uint32_t> assign(const Dataset& s, const CenterSet& centers);

// Neumaier-compensated accumulator.
class StableSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Cumulative count of point-to-center distance evaluations on the calling
// thread. Feeds the simulation's reproducible "work counter" time mode.
std::uint64_t work_count();

}  // namespace distkm
