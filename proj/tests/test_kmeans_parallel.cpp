#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <map>

#include "distkm/datagen.hpp"
#include "distkm/kmeans_parallel.hpp"
#include "doctest.h"

using namespace distkm;

namespace {

PlantedDataset small_gaussian(std::uint64_t seed, std::int64_t n = 5000,
                              int k = 25) {
  GaussianMixtureSpec spec;
  spec.k = k;
  spec.dim = 5;
  spec.sigma = 0.005;
  spec.n = n;
  spec.seed = seed;
  return gen_gaussian_mixture(spec);
}

}  // namespace

TEST_CASE("candidate count is exactly 1 + r*l") {
  const PlantedDataset data = small_gaussian(1);
  BlackBoxConfig bb;
  for (int r = 1; r <= 5; ++r) {
    KmppParams p;
    p.k = 25;
    p.rounds = r;
    p.oversampling = 50;
    const KmppResult res = run_kmeans_parallel(data.points, p, 10, bb, 77 + r);
    CHECK(res.candidates.size() == static_cast<std::size_t>(1 + r * 50));
    CHECK(res.reduced.size() <= 25);
    CHECK(res.phi_per_round.size() == static_cast<std::size_t>(r));
  }
}

TEST_CASE("oversampling defaults to 2k") {
  KmppParams p;
  p.k = 25;
  CHECK(p.l() == 50);
  p.oversampling = 7;
  CHECK(p.l() == 7);
}

TEST_CASE("r=0 degenerates to the single uniform center") {
  const PlantedDataset data = small_gaussian(2, 500, 5);
  KmppParams p;
  p.k = 5;
  p.rounds = 0;
  BlackBoxConfig bb;
  const KmppResult res = run_kmeans_parallel(data.points, p, 5, bb, 3);
  CHECK(res.candidates.size() == 1);
  CHECK(res.reduced.flat() == res.candidates.flat());
}

TEST_CASE("selection frequencies follow the d^2 law") {
  // Four points on a line; the initial center is always the duplicate-free
  // mass at 0 only if drawn, so condition by fixing a single-point dataset
  // geometry: three candidates at known distances from a heavy origin.
  Dataset x(1);
  x.push_back({0.0});
  x.push_back({0.0});  // doubles the chance the initial center sits at 0
  x.push_back({1.0});
  x.push_back({2.0});
  x.push_back({3.0});

  KmppParams p;
  p.k = 2;
  p.rounds = 1;
  p.oversampling = 1;
  BlackBoxConfig bb;

  std::map<double, int> counts;
  int conditioned = 0;
  for (int seed = 0; seed < 12000; ++seed) {
    const KmppResult res = run_kmeans_parallel(x, p, 1, bb, seed);
    REQUIRE(res.candidates.size() == 2);
    if (res.candidates[0][0] != 0.0) continue;  // condition on origin start
    ++conditioned;
    counts[res.candidates[1][0]] += 1;
  }
  REQUIRE(conditioned > 3000);
  // Given the origin start, the second point follows d^2/(1+4+9).
  const double denom = 14.0;
  for (const auto& [coord, expected_w] :
       std::map<double, double>{{1.0, 1.0}, {2.0, 4.0}, {3.0, 9.0}}) {
    const double pr = expected_w / denom;
    const double sigma = std::sqrt(conditioned * pr * (1 - pr));
    CHECK(std::abs(counts[coord] - conditioned * pr) < 4.0 * sigma + 1.0);
  }
}

TEST_CASE("cost medians do not rise with more rounds") {
  const PlantedDataset data = small_gaussian(7, 4000, 10);
  BlackBoxConfig bb;
  auto median_cost = [&](int rounds) {
    std::vector<double> costs;
    for (int seed = 0; seed < 21; ++seed) {
      KmppParams p;
      p.k = 10;
      p.rounds = rounds;
      const KmppResult res =
          run_kmeans_parallel(data.points, p, 8, bb, 100 + seed);
      costs.push_back(res.final_cost);
    }
    std::sort(costs.begin(), costs.end());
    return costs[costs.size() / 2];
  };
  const double one = median_cost(1);
  const double three = median_cost(3);
  CHECK(three <= one * 1.05 + 1e-12);
}

TEST_CASE("ledger counts the initial point, selections, and broadcasts") {
  const PlantedDataset data = small_gaussian(3, 2000, 5);
  KmppParams p;
  p.k = 5;
  p.rounds = 3;
  p.oversampling = 10;
  BlackBoxConfig bb;
  const KmppResult res = run_kmeans_parallel(data.points, p, 4, bb, 11);
  // Up: initial center plus r*l selections. Down: every candidate exactly once.
  CHECK(res.ledger.cumulative().points_to_coordinator == 1 + 3 * 10);
  CHECK(res.ledger.cumulative().points_broadcast ==
        static_cast<std::int64_t>(res.candidates.size()));

  int loop_rounds_seen = 0;
  for (const auto& entry : res.ledger.rounds()) {
    if (entry.kind == RoundKind::kLoop) ++loop_rounds_seen;
  }
  CHECK(loop_rounds_seen == 3);
}

TEST_CASE("deterministic given the seed, serial or parallel") {
  const PlantedDataset data = small_gaussian(4, 3000, 8);
  KmppParams p;
  p.k = 8;
  p.rounds = 2;
  BlackBoxConfig bb;
  const KmppResult a = run_kmeans_parallel(data.points, p, 6, bb, 5);
  p.exec = ExecMode::kParallel;
  const KmppResult b = run_kmeans_parallel(data.points, p, 6, bb, 5);
  CHECK(a.candidates.flat() == b.candidates.flat());
  CHECK(a.reduced.flat() == b.reduced.flat());
  CHECK(a.final_cost == b.final_cost);
}
