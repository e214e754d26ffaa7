#include "distkm/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace distkm {

namespace {
thread_local std::uint64_t t_work_count = 0;

void check_finite(PointView p) {
  for (double v : p) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("point has non-finite coordinate");
    }
  }
}
}  // namespace

std::uint64_t work_count() { return t_work_count; }

Dataset::Dataset(std::size_t dim, std::vector<double> flat)
    : dim_(dim), data_(std::move(flat)) {
  if (dim_ == 0) throw std::invalid_argument("dataset dimension must be positive");
  if (data_.size() % dim_ != 0) {
    throw std::invalid_argument("flat buffer size is not a multiple of dim");
  }
  check_finite(PointView(data_.data(), data_.size()));
}

void Dataset::push_back(PointView p) {
  if (dim_ == 0) dim_ = p.size();
  if (p.size() != dim_) {
    throw std::invalid_argument("point dimension does not match dataset");
  }
  check_finite(p);
  data_.insert(data_.end(), p.begin(), p.end());
}

void Dataset::push_back(std::initializer_list<double> p) {
  push_back(PointView(p.begin(), p.size()));
}

void Dataset::append(const Dataset& other) {
  if (other.empty()) return;
  if (dim_ == 0) dim_ = other.dim_;
  if (other.dim_ != dim_) {
    throw std::invalid_argument("dataset dimension mismatch in append");
  }
  data_.insert(data_.end(), other.data_.begin(), other.data_.end());
}

Dataset Dataset::take_rows(std::span<const std::uint32_t> rows) const {
  Dataset out(dim_);
  out.reserve(rows.size());
  for (std::uint32_t r : rows) {
    out.data_.insert(out.data_.end(), data_.begin() + r * dim_,
                     data_.begin() + (r + 1) * dim_);
  }
  return out;
}

double sq_dist(PointView a, PointView b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("sq_dist: dimension mismatch");
  }
  ++t_work_count;
  double acc = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double d = a[j] - b[j];
    acc += d * d;
  }
  return acc;
}

double dist_sq_to_set(PointView x, const CenterSet& centers) {
  if (centers.empty()) {
    throw std::invalid_argument("dist_sq_to_set: empty center set");
  }
  if (centers.dim() != x.size()) {
    throw std::invalid_argument("dist_sq_to_set: dimension mismatch");
  }
  const std::size_t d = centers.dim();
  const double* c = centers.flat().data();
  t_work_count += centers.size();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < centers.size(); ++i, c += d) {
    double acc = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double diff = x[j] - c[j];
      acc += diff * diff;
    }
    best = std::min(best, acc);
  }
  return best;
}

std::vector<double> sq_dists_to_set(const Dataset& s, const CenterSet& centers) {
  std::vector<double> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    out[i] = dist_sq_to_set(s[i], centers);
  }
  return out;
}

double cost(const Dataset& s, const CenterSet& centers) {
  StableSum acc;
  for (std::size_t i = 0; i < s.size(); ++i) {
    acc.add(dist_sq_to_set(s[i], centers));
  }
  return acc.value();
}

double truncated_cost(const Dataset& s, const CenterSet& centers,
                      std::size_t drop) {
  if (drop >= s.size()) {
    if (centers.empty()) {
      throw std::invalid_argument("truncated_cost: empty center set");
    }
    return 0.0;
  }
  std::vector<double> d2 = sq_dists_to_set(s, centers);
  // Keep the |s| - drop smallest distances; sum ascending for stability.
  std::sort(d2.begin(), d2.end());
  StableSum acc;
  for (std::size_t i = 0; i + drop < d2.size(); ++i) acc.add(d2[i]);
  return acc.value();
}

std::vector<std::uint32_t> assign(const Dataset& s, const CenterSet& centers) {
  if (centers.empty()) {
    throw std::invalid_argument("assign: empty center set");
  }
  const std::size_t d = centers.dim();
  std::vector<std::uint32_t> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const PointView x = s[i];
    const double* c = centers.flat().data();
    t_work_count += centers.size();
    double best = std::numeric_limits<double>::infinity();
    std::uint32_t best_idx = 0;
    for (std::size_t t = 0; t < centers.size(); ++t, c += d) {
      double acc = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double diff = x[j] - c[j];
        acc += diff * diff;
      }
      if (acc < best) {  // strict: ties keep the lowest center index
        best = acc;
        best_idx = static_cast<std::uint32_t>(t);
      }
    }
    out[i] = best_idx;
  }
  return out;
}

}  // namespace distkm
