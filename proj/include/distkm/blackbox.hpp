#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "distkm/geometry.hpp"
#include "distkm/rng.hpp"

namespace distkm {

// Points with positive multiplicities. Weighted cost of a center set is
// sum_i w_i * dist_sq_to_set(x_i).
struct WeightedDataset {
  Dataset base;
  std::vector<double> weights;

  static WeightedDataset unweighted(Dataset d);
  void validate() const;  // throws unless weights are positive and aligned
};

enum class LloydMode {
  kCentroid,  // centers are weighted means (default)
  kMedoid,    // centers constrained to input points
};

struct BlackBoxConfig {
  int max_lloyd_iters = 100;
  int n_init = 3;
  double convergence_tol = 1e-6;  // relative cost improvement
  LloydMode mode = LloydMode::kCentroid;
};

double weighted_cost(const WeightedDataset& s, const CenterSet& centers);

// D^2 seeding: first center drawn with probability proportional to weight,
// each subsequent one proportional to weight * squared distance to the
// current centers. Returns min(k, #distinct points) centers.
CenterSet kmeanspp_seed(const WeightedDataset& s, std::size_t k,
                        RngStream& rng);

// Iterates assignment and center update until the relative cost improvement
// drops below cfg.convergence_tol or cfg.max_lloyd_iters is reached. Empty
// clusters are re-seeded to the point with the largest current cost
// contribution, so the cost never increases across iterations.
CenterSet lloyd(const WeightedDataset& s, CenterSet init,
                const BlackBoxConfig& cfg);

// Best of cfg.n_init (seed + lloyd) restarts by weighted cost. Deterministic
// given the rng stream. Throws on empty input.
CenterSet cluster(const WeightedDataset& s, std::size_t k,
                  const BlackBoxConfig& cfg, RngStream& rng);

// Exact minimum of cost(s, T) over all T subseteq s with |T| <= k, by
// enumeration. Only for |s| <= 20.
std::pair<CenterSet, double> brute_force_optimal(const Dataset& s,
                                                 std::size_t k);

}  // namespace distkm
