#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <numeric>
#include <set>

#include "distkm/datagen.hpp"
#include "distkm/soccer.hpp"
#include "doctest.h"

using namespace distkm;

namespace {

SoccerParams base_params(int k, double epsilon) {
  SoccerParams p;
  p.k = k;
  p.epsilon = epsilon;
  p.delta = 0.1;
  return p;
}

MachineState make_machine(Dataset shard, std::uint64_t seed) {
  MachineState m;
  m.id = 0;
  m.global_ids.resize(shard.size());
  std::iota(m.global_ids.begin(), m.global_ids.end(), 0);
  m.live.resize(shard.size());
  std::iota(m.live.begin(), m.live.end(), 0);
  m.shard = std::move(shard);
  m.rng = RngStream::child(seed, 0);
  return m;
}

}  // namespace

TEST_CASE("derived constants reproduce the published sample sizes") {
  // Experiment mode, n = 1e7, delta = 0.1.
  auto p1 = [&](int k, double eps) {
    return derive_constants(base_params(k, eps), 10000000).p1_size();
  };
  CHECK(p1(25, 0.2) == 126978);
  CHECK(p1(25, 0.05) == 11316);
  CHECK(p1(25, 0.01) == 5939);
  CHECK(p1(100, 0.05) == 56440);
}

TEST_CASE("theory mode uses the epsilon-scaled log argument") {
  SoccerParams p = base_params(25, 0.05);
  const DerivedConstants exp_c = derive_constants(p, 1000000);
  p.constants_mode = ConstantsMode::kTheory;
  const DerivedConstants thr_c = derive_constants(p, 1000000);
  CHECK(exp_c.log_arg == doctest::Approx(1.1 * 25 / 0.1));
  CHECK(thr_c.log_arg == doctest::Approx(1.1 * 25 / (0.1 * 0.05)));
  CHECK(thr_c.eta > exp_c.eta);
  CHECK(thr_c.k_plus > exp_c.k_plus);
  // d_k and k_plus stay consistent with the shared logarithm.
  CHECK(exp_c.d_k == doctest::Approx(6.5 * std::log(exp_c.log_arg)));
  CHECK(exp_c.k_plus == static_cast<int>(25 + 9 * std::log(exp_c.log_arg)));
}

TEST_CASE("derive_constants validates its inputs") {
  CHECK_THROWS_AS(derive_constants(base_params(1, 0.1), 100),
                  std::invalid_argument);
  CHECK_THROWS_AS(derive_constants(base_params(5, 1.5), 100),
                  std::invalid_argument);
  CHECK_THROWS_AS(derive_constants(base_params(5, 0.1), 0),
                  std::invalid_argument);
}

TEST_CASE("machine_sample: exact fraction sizes and alpha=1") {
  Dataset shard(1);
  for (int i = 0; i < 1000; ++i) shard.push_back({static_cast<double>(i)});
  MachineState mach = make_machine(shard, 3);

  auto full = machine_sample(mach, 1.0, SamplingMode::kExactFraction);
  CHECK(full.p1.size() == 1000);
  CHECK(full.p2.size() == 1000);

  auto tenth = machine_sample(mach, 0.1, SamplingMode::kExactFraction);
  CHECK(tenth.p1.size() == 100);
  CHECK(tenth.p2.size() == 100);

  CHECK_THROWS_AS(machine_sample(mach, 0.0, SamplingMode::kExactFraction),
                  std::invalid_argument);
}

TEST_CASE("machine_sample: bernoulli sizes match the binomial mean") {
  Dataset shard(1);
  for (int i = 0; i < 1000; ++i) shard.push_back({static_cast<double>(i)});
  MachineState mach = make_machine(shard, 11);
  const int trials = 1000;
  double total = 0.0;
  for (int t = 0; t < trials; ++t) {
    total += machine_sample(mach, 0.1, SamplingMode::kBernoulli).p1.size();
  }
  const double mean = total / trials;
  // sd of the trial mean: sqrt(1000 * 0.1 * 0.9) / sqrt(trials)
  CHECK(std::abs(mean - 100.0) < 3.0 * std::sqrt(90.0) / std::sqrt(trials) + 0.2);
}

TEST_CASE("coordinator_round: threshold formula and degenerate cases") {
  SoccerParams p = base_params(5, 0.5);
  DerivedConstants c;
  c.log_arg = 10.0;
  c.eta = 100.0;
  c.d_k = 2.0;
  c.k_plus = 1;
  CHECK(c.truncation_count(5) == 18);  // floor(1.5 * 6 * 2)

  Dataset p1(1);
  p1.push_back({0.0});
  BlackBoxConfig bb;
  RngStream rng(1);

  // 18 far points are truncated away; the one kept contributes 30.
  Dataset p2(1);
  for (int i = 0; i < 18; ++i) p2.push_back({10.0});
  p2.push_back({std::sqrt(30.0)});
  const CoordinatorRound r = coordinator_round(p1, p2, p, c, 0.5, bb, rng);
  REQUIRE(r.c_iter.size() == 1);
  CHECK(r.c_iter[0][0] == 0.0);
  CHECK(r.v == doctest::Approx(2.0 * 30.0 / (3.0 * 5 * 2.0)).epsilon(1e-12));
  CHECK(r.psi == doctest::Approx(r.v * 5 * 2.0 / 0.5));

  // P2 entirely on the centers: v = 0.
  Dataset on_center(1);
  for (int i = 0; i < 30; ++i) on_center.push_back({0.0});
  CHECK(coordinator_round(p1, on_center, p, c, 0.5, bb, rng).v == 0.0);

  // Truncation swallows all of P2: v = 0.
  Dataset few(1);
  few.push_back({5.0});
  CHECK(coordinator_round(p1, few, p, c, 0.5, bb, rng).v == 0.0);

  CHECK_THROWS_AS(coordinator_round(Dataset(1), p2, p, c, 0.5, bb, rng),
                  std::invalid_argument);
}

TEST_CASE("machine_remove keeps strictly-farther points only") {
  Dataset shard(2);
  shard.push_back({0.5, 0.5});  // d^2 = 0.5
  shard.push_back({1.0, 0.0});  // d^2 = 1.0, on the boundary
  shard.push_back({1.0, 1.0});  // d^2 = 2.0
  MachineState mach = make_machine(shard, 1);
  CenterSet origin(2);
  origin.push_back({0.0, 0.0});

  double removed_cost = 0.0;
  std::vector<std::int64_t> removed_ids;
  const auto removed = machine_remove(mach, origin, 1.0, &removed_cost, &removed_ids);
  CHECK(removed == 2);
  CHECK(mach.live == std::vector<std::uint32_t>{2});
  CHECK(removed_cost == doctest::Approx(1.5));
  CHECK(removed_ids == std::vector<std::int64_t>{0, 1});

  // v = 0 with no point on a center removes nothing.
  MachineState mach2 = make_machine(shard, 1);
  CHECK(machine_remove(mach2, origin, 0.0, nullptr, nullptr) == 0);
  CHECK(mach2.live.size() == 3);

  // A threshold above the maximum squared distance empties the shard.
  MachineState mach3 = make_machine(shard, 1);
  CHECK(machine_remove(mach3, origin, 100.0, nullptr, nullptr) == 3);
  CHECK(mach3.live.empty());
}

TEST_CASE("run_soccer stops immediately when the data fits the coordinator") {
  GaussianMixtureSpec spec;
  spec.k = 3;
  spec.dim = 2;
  spec.n = 50;
  spec.seed = 5;
  const PlantedDataset data = gen_gaussian_mixture(spec);
  SoccerParams p = base_params(3, 0.5);

  BlackBoxConfig bb;
  const SoccerResult res = run_soccer(data.points, p, 5, bb, 77);
  CHECK(res.constants.eta > 50.0);
  CHECK(res.loop_rounds == 0);
  CHECK(res.total_rounds == 1);
  CHECK(res.rounds.empty());
  CHECK(res.final_phase_n == 50);
  CHECK(res.c_out.size() <= 3);
  // c_out is exactly the final-phase black-box clustering here.
  CHECK(res.cost_c_out == doctest::Approx(res.final_phase_cost));
  CHECK(res.ledger.cumulative().points_to_coordinator == 50);
}

TEST_CASE("run_soccer on a planted mixture: accounting and invariants") {
  GaussianMixtureSpec spec;
  spec.k = 5;
  spec.dim = 5;
  spec.sigma = 0.01;
  spec.n = 20000;
  spec.seed = 21;
  const PlantedDataset data = gen_gaussian_mixture(spec);

  SoccerParams p = base_params(5, 0.1);
  p.trace_removed = true;
  BlackBoxConfig bb;
  const SoccerResult res = run_soccer(data.points, p, 20, bb, 4242);

  CHECK(res.loop_rounds >= 1);
  CHECK(res.loop_rounds < 1.0 / p.epsilon - 1.0);
  CHECK(res.total_rounds == res.loop_rounds + 1);
  CHECK(static_cast<int>(res.c_out.size()) <=
        res.total_rounds * res.constants.k_plus);

  // Stopping rule: live counts stay above eta until the last loop round.
  for (int i = 0; i + 1 < res.loop_rounds; ++i) {
    CHECK(static_cast<double>(res.rounds[i].remaining_n) > res.constants.eta);
  }
  CHECK(static_cast<double>(res.rounds.back().remaining_n) <= res.constants.eta);

  // Ledger bullets: per loop round, received = |P1|+|P2|, broadcast = |C_iter|.
  int loop_seen = 0;
  for (std::size_t r = 0; r < res.ledger.rounds().size(); ++r) {
    const auto& entry = res.ledger.rounds()[r];
    if (entry.kind != RoundKind::kLoop) continue;
    const RoundRecord& rec = res.rounds[loop_seen];
    CHECK(entry.counts.points_to_coordinator == rec.p1_size + rec.p2_size);
    CHECK(entry.counts.points_broadcast ==
          static_cast<std::int64_t>(rec.c_iter.size()));
    CHECK(entry.counts.scalars_broadcast == 1);
    ++loop_seen;
  }
  CHECK(loop_seen == res.loop_rounds);

  // psi identity.
  for (const RoundRecord& rec : res.rounds) {
    CHECK(rec.psi ==
          doctest::Approx(rec.v * p.k * res.constants.d_k / rec.alpha));
  }

  // Conservation: every removed id is unique and the leftovers account for
  // the rest of the dataset.
  std::set<std::int64_t> removed;
  std::int64_t removed_total = 0;
  for (const RoundRecord& rec : res.rounds) {
    CHECK(rec.removed_count == static_cast<std::int64_t>(rec.removed_ids.size()));
    removed_total += rec.removed_count;
    for (auto id : rec.removed_ids) CHECK(removed.insert(id).second);
  }
  CHECK(removed_total + res.final_phase_n ==
        static_cast<std::int64_t>(data.points.size()));

  // Cost decomposition: cost(X, C_out) is bounded by the per-round removal
  // costs plus the final-phase cost.
  double rhs = res.final_phase_cost;
  for (const RoundRecord& rec : res.rounds) rhs += rec.removed_cost;
  CHECK(res.cost_c_out <= rhs * (1.0 + 1e-9) + 1e-12);

  CHECK(res.reduced_centers.size() <= 5);
  CHECK(res.final_cost >= 0.0);
}

TEST_CASE("run_soccer is deterministic and parallel-independent") {
  GaussianMixtureSpec spec;
  spec.k = 4;
  spec.dim = 3;
  spec.sigma = 0.02;
  spec.n = 6000;
  spec.seed = 9;
  const PlantedDataset data = gen_gaussian_mixture(spec);
  SoccerParams p = base_params(4, 0.15);
  BlackBoxConfig bb;

  const SoccerResult a = run_soccer(data.points, p, 12, bb, 1001);
  const SoccerResult b = run_soccer(data.points, p, 12, bb, 1001);
  p.exec = ExecMode::kParallel;
  const SoccerResult c = run_soccer(data.points, p, 12, bb, 1001);

  CHECK(a.c_out.flat() == b.c_out.flat());
  CHECK(a.c_out.flat() == c.c_out.flat());
  CHECK(a.reduced_centers.flat() == c.reduced_centers.flat());
  CHECK(a.final_cost == c.final_cost);
  CHECK(a.ledger.cumulative().points_to_coordinator ==
        c.ledger.cumulative().points_to_coordinator);
  CHECK(a.loop_rounds == c.loop_rounds);
}

TEST_CASE("round guard raises instead of looping forever") {
  // Structureless uniform data keeps several rounds busy; a guard of one
  // round must trip.
  RngStream rng(8);
  Dataset x(1);
  for (int i = 0; i < 3000; ++i) x.push_back({rng.uniform() * 10.0});
  SoccerParams p = base_params(5, 0.01);
  p.max_loop_rounds_guard = 1;
  BlackBoxConfig bb;
  CHECK_THROWS_AS(run_soccer(x, p, 10, bb, 3), RoundLimitExceeded);
}

TEST_CASE("reduce_to_k collapses coincident centers by weight") {
  Dataset x(2);
  for (int i = 0; i < 10; ++i) x.push_back({0.0, 0.0});
  x.push_back({10.0, 0.0});
  SimNet net(x, 2, PartitionStrategy::kContiguous, 1);

  CenterSet c_out(2);
  c_out.push_back({0.0, 0.0});
  c_out.push_back({0.0, 0.0});
  c_out.push_back({10.0, 0.0});
  BlackBoxConfig bb;
  RngStream rng(1);
  const CenterSet reduced = reduce_to_k(c_out, net, 2, bb, rng);
  REQUIRE(reduced.size() == 2);
  CHECK(dist_sq_to_set(x[0], reduced) == 0.0);
  CHECK(dist_sq_to_set(x[10], reduced) == 0.0);

  // Already small enough: returned unchanged, no communication.
  SimNet net2(x, 2, PartitionStrategy::kContiguous, 1);
  const CenterSet same = reduce_to_k(c_out, net2, 5, bb, rng);
  CHECK(same.flat() == c_out.flat());
  CHECK(net2.ledger().rounds().empty());
}

TEST_CASE("hard instance: one round, zero cost") {
  HardInstanceSpec spec;
  spec.k = 10;
  spec.z = 100;
  const PlantedDataset data = gen_hard_instance(spec);
  REQUIRE(data.points.size() == 1800);

  SoccerParams p = base_params(10, 0.005);
  BlackBoxConfig bb;
  const SoccerResult res = run_soccer(data.points, p, 50, bb, 123);
  CHECK(res.loop_rounds == 1);
  CHECK(res.final_cost == 0.0);
  CHECK(res.cost_c_out == 0.0);
  CHECK(res.reduced_centers.size() == 10);
}

TEST_CASE("per-round removal cost obeys the planted-optimum bound") {
  // Empirical factor of the black box, measured on a tiny exhaustive corpus.
  BlackBoxConfig medoid;
  medoid.mode = LloydMode::kMedoid;
  RngStream corpus_rng(55);
  double beta_hat = 1.0;
  for (int rep = 0; rep < 20; ++rep) {
    Dataset s(2);
    const std::size_t n = 5 + corpus_rng.uniform_index(8);
    for (std::size_t i = 0; i < n; ++i) {
      s.push_back({corpus_rng.uniform() * 10.0, corpus_rng.uniform() * 10.0});
    }
    const auto [opt_c, opt] = brute_force_optimal(s, 3);
    const double got =
        cost(s, cluster(WeightedDataset::unweighted(s), 3, medoid, corpus_rng));
    if (opt > 0.0) beta_hat = std::max(beta_hat, got / opt);
  }
  const double bound_factor = 80.0 * beta_hat + 44.0;

  GaussianMixtureSpec spec;
  spec.k = 5;
  spec.dim = 10;
  spec.sigma = 0.01;
  spec.n = 20000;
  BlackBoxConfig bb;
  int violations = 0;
  for (int seed = 0; seed < 5; ++seed) {
    spec.seed = 100 + seed;
    const PlantedDataset data = gen_gaussian_mixture(spec);
    SoccerParams p = base_params(5, 0.05);
    p.trace_removed = true;
    const SoccerResult res = run_soccer(data.points, p, 20, bb, 900 + seed);

    std::set<std::int64_t> live;
    for (std::int64_t i = 0; i < spec.n; ++i) live.insert(i);
    for (const RoundRecord& rec : res.rounds) {
      std::vector<std::uint32_t> rows;
      rows.reserve(live.size());
      for (auto id : live) rows.push_back(static_cast<std::uint32_t>(id));
      const Dataset v_i = data.points.take_rows(rows);
      const double opt_surrogate = cost(v_i, data.planted_centers);
      if (rec.removed_cost > bound_factor * opt_surrogate) ++violations;
      for (auto id : rec.removed_ids) live.erase(id);
    }
  }
  CHECK(violations == 0);
}
