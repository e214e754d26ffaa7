#include "distkm/blackbox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace distkm {

WeightedDataset WeightedDataset::unweighted(Dataset d) {
  WeightedDataset w;
  w.weights.assign(d.size(), 1.0);
  w.base = std::move(d);
  return w;
}

void WeightedDataset::validate() const {
  if (weights.size() != base.size()) {
    throw std::invalid_argument("weighted dataset: weight/point count mismatch");
  }
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("weighted dataset: weights must be positive");
    }
  }
}

double weighted_cost(const WeightedDataset& s, const CenterSet& centers) {
  StableSum acc;
  for (std::size_t i = 0; i < s.base.size(); ++i) {
    acc.add(s.weights[i] * dist_sq_to_set(s.base[i], centers));
  }
  return acc.value();
}

namespace {

// Draws an index with probability proportional to mass[i]; total > 0.
std::size_t draw_proportional(const std::vector<double>& mass, double total,
                              RngStream& rng) {
  const double u = rng.uniform() * total;
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < mass.size(); ++i) {
    if (mass[i] > 0.0) last_positive = i;
    acc += mass[i];
    if (u < acc) return i;
  }
  return last_positive;  // guard against accumulated rounding
}

}  // namespace

CenterSet kmeanspp_seed(const WeightedDataset& s, std::size_t k,
                        RngStream& rng) {
  s.validate();
  const std::size_t n = s.base.size();
  if (n == 0) throw std::invalid_argument("kmeanspp_seed: empty dataset");
  if (k == 0) throw std::invalid_argument("kmeanspp_seed: k must be positive");

  CenterSet centers(s.base.dim());

  double total_w = 0.0;
  for (double w : s.weights) total_w += w;
  const std::size_t first = draw_proportional(s.weights, total_w, rng);
  centers.push_back(s.base[first]);

  std::vector<double> min_d2(n);
  std::vector<double> mass(n);
  for (std::size_t i = 0; i < n; ++i) {
    min_d2[i] = sq_dist(s.base[i], s.base[first]);
  }

  while (centers.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mass[i] = s.weights[i] * min_d2[i];
      total += mass[i];
    }
    if (!(total > 0.0)) break;  // every distinct point is already a center
    const std::size_t pick = draw_proportional(mass, total, rng);
    const PointView p = s.base[pick];
    centers.push_back(p);
    for (std::size_t i = 0; i < n; ++i) {
      min_d2[i] = std::min(min_d2[i], sq_dist(s.base[i], p));
    }
  }
  return centers;
}

namespace {

void reseed_empty_clusters(const WeightedDataset& s, const CenterSet& current,
                           const std::vector<std::uint32_t>& labels,
                           const std::vector<double>& cluster_w,
                           Dataset& updated) {
  std::vector<double> contrib(s.base.size());
  for (std::size_t i = 0; i < s.base.size(); ++i) {
    contrib[i] = s.weights[i] * dist_sq_to_set(s.base[i], current);
  }
  (void)labels;
  for (std::size_t c = 0; c < current.size(); ++c) {
    if (cluster_w[c] > 0.0) continue;
    const auto it = std::max_element(contrib.begin(), contrib.end());
    if (!(*it > 0.0)) {
      // All points already sit on centers; keep the stale center.
      continue;
    }
    const std::size_t pick = static_cast<std::size_t>(it - contrib.begin());
    std::copy_n(s.base[pick].data(), s.base.dim(), updated.mutable_row(c).data());
    contrib[pick] = 0.0;
  }
}

CenterSet lloyd_update_centroid(const WeightedDataset& s,
                                const CenterSet& centers,
                                const std::vector<std::uint32_t>& labels) {
  const std::size_t d = s.base.dim();
  const std::size_t kc = centers.size();
  std::vector<double> sums(kc * d, 0.0);
  std::vector<double> cluster_w(kc, 0.0);
  for (std::size_t i = 0; i < s.base.size(); ++i) {
    const std::uint32_t c = labels[i];
    const PointView x = s.base[i];
    const double w = s.weights[i];
    cluster_w[c] += w;
    for (std::size_t j = 0; j < d; ++j) sums[c * d + j] += w * x[j];
  }
  std::vector<double> flat(kc * d);
  for (std::size_t c = 0; c < kc; ++c) {
    if (cluster_w[c] > 0.0) {
      for (std::size_t j = 0; j < d; ++j) flat[c * d + j] = sums[c * d + j] / cluster_w[c];
    } else {
      std::copy_n(centers[c].data(), d, flat.begin() + c * d);
    }
  }
  CenterSet updated(d, std::move(flat));
  reseed_empty_clusters(s, centers, labels, cluster_w, updated);
  return updated;
}

CenterSet lloyd_update_medoid(const WeightedDataset& s,
                              const CenterSet& centers,
                              const std::vector<std::uint32_t>& labels) {
  const std::size_t kc = centers.size();
  std::vector<std::vector<std::uint32_t>> members(kc);
  std::vector<double> cluster_w(kc, 0.0);
  for (std::size_t i = 0; i < s.base.size(); ++i) {
    members[labels[i]].push_back(static_cast<std::uint32_t>(i));
    cluster_w[labels[i]] += s.weights[i];
  }
  CenterSet updated(s.base.dim());
  for (std::size_t c = 0; c < kc; ++c) {
    if (members[c].empty()) {
      updated.push_back(centers[c]);
      continue;
    }
    double best = std::numeric_limits<double>::infinity();
    std::uint32_t best_idx = members[c].front();
    for (std::uint32_t cand : members[c]) {
      double acc = 0.0;
      for (std::uint32_t i : members[c]) {
        acc += s.weights[i] * sq_dist(s.base[i], s.base[cand]);
      }
      if (acc < best) {
        best = acc;
        best_idx = cand;
      }
    }
    updated.push_back(s.base[best_idx]);
  }
  reseed_empty_clusters(s, centers, labels, cluster_w, updated);
  return updated;
}

}  // namespace

CenterSet lloyd(const WeightedDataset& s, CenterSet init,
                const BlackBoxConfig& cfg) {
  s.validate();
  if (init.empty()) throw std::invalid_argument("lloyd: empty initial centers");

  CenterSet centers = std::move(init);
  double prev = weighted_cost(s, centers);
  for (int iter = 0; iter < cfg.max_lloyd_iters && prev > 0.0; ++iter) {
    const auto labels = assign(s.base, centers);
    CenterSet updated = cfg.mode == LloydMode::kCentroid
                            ? lloyd_update_centroid(s, centers, labels)
                            : lloyd_update_medoid(s, centers, labels);
    const double now = weighted_cost(s, updated);
    centers = std::move(updated);
    if (prev - now <= cfg.convergence_tol * prev) {
      prev = now;
      break;
    }
    prev = now;
  }
  return centers;
}

CenterSet cluster(const WeightedDataset& s, std::size_t k,
                  const BlackBoxConfig& cfg, RngStream& rng) {
  s.validate();
  if (s.base.empty()) throw std::invalid_argument("cluster: empty dataset");
  if (k == 0) throw std::invalid_argument("cluster: k must be positive");

  CenterSet best;
  double best_cost = std::numeric_limits<double>::infinity();
  const int restarts = std::max(1, cfg.n_init);
  for (int r = 0; r < restarts; ++r) {
    CenterSet c = lloyd(s, kmeanspp_seed(s, k, rng), cfg);
    const double cc = weighted_cost(s, c);
    if (cc < best_cost) {
      best_cost = cc;
      best = std::move(c);
    }
  }
  return best;
}

namespace {

void enumerate_subsets(const Dataset& s, std::size_t size, CenterSet& best,
                       double& best_cost) {
  const std::size_t n = s.size();
  std::vector<std::uint32_t> idx(size);
  for (std::size_t i = 0; i < size; ++i) idx[i] = static_cast<std::uint32_t>(i);
  while (true) {
    const CenterSet t = s.take_rows(idx);
    const double c = cost(s, t);
    if (c < best_cost) {
      best_cost = c;
      best = t;
    }
    // next combination
    std::size_t i = size;
    while (i > 0) {
      --i;
      if (idx[i] + (size - i) < n) {
        ++idx[i];
        for (std::size_t j = i + 1; j < size; ++j) idx[j] = idx[j - 1] + 1;
        break;
      }
      if (i == 0) return;
    }
  }
}

}  // namespace

std::pair<CenterSet, double> brute_force_optimal(const Dataset& s,
                                                 std::size_t k) {
  if (s.empty()) throw std::invalid_argument("brute_force_optimal: empty dataset");
  if (s.size() > 20) {
    throw std::invalid_argument("brute_force_optimal: |S| > 20 is combinatorially infeasible");
  }
  if (k == 0) throw std::invalid_argument("brute_force_optimal: k must be positive");
  CenterSet best;
  double best_cost = std::numeric_limits<double>::infinity();
  for (std::size_t size = 1; size <= std::min(k, s.size()); ++size) {
    enumerate_subsets(s, size, best, best_cost);
  }
  return {best, best_cost};
}

}  // namespace distkm
