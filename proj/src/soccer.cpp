#include "distkm/soccer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace distkm {

void SoccerParams::validate() const {
  if (k < 2) throw std::invalid_argument("soccer: k must be at least 2");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("soccer: delta must be in (0,1)");
  }
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw std::invalid_argument("soccer: epsilon must be in (0,1)");
  }
  if (max_loop_rounds_guard < 0) {
    throw std::invalid_argument("soccer: round guard must be positive (or 0 for default)");
  }
}

int SoccerParams::loop_guard() const {
  if (max_loop_rounds_guard > 0) return max_loop_rounds_guard;
  return static_cast<int>(std::ceil(1.0 / epsilon)) + 2;
}

std::size_t DerivedConstants::truncation_count(int k) const {
  return static_cast<std::size_t>(
      std::floor(1.5 * static_cast<double>(k + 1) * d_k));
}

DerivedConstants derive_constants(const SoccerParams& params, std::int64_t n) {
  params.validate();
  if (n < 1) throw std::invalid_argument("derive_constants: n must be positive");
  DerivedConstants c;
  c.log_arg = params.constants_mode == ConstantsMode::kExperiment
                  ? 1.1 * params.k / params.delta
                  : 1.1 * params.k / (params.delta * params.epsilon);
  if (!(c.log_arg > 1.0)) {
    throw std::invalid_argument("derive_constants: degenerate parameters (log argument <= 1)");
  }
  const double ln = std::log(c.log_arg);
  c.eta = 36.0 * params.k * std::pow(static_cast<double>(n), params.epsilon) * ln;
  c.d_k = 6.5 * ln;
  c.k_plus = static_cast<int>(std::floor(params.k + 9.0 * ln));
  return c;
}

namespace {

// Uniform subset of `count` entries from `from`, chosen without replacement
// via a partial Fisher-Yates pass.
std::vector<std::uint32_t> uniform_subset(const std::vector<std::uint32_t>& from,
                                          std::size_t count, RngStream& rng) {
  std::vector<std::uint32_t> pool = from;
  count = std::min(count, pool.size());
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + rng.uniform_index(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  return pool;
}

std::vector<std::uint32_t> bernoulli_subset(const std::vector<std::uint32_t>& from,
                                            double alpha, RngStream& rng) {
  std::vector<std::uint32_t> out;
  for (std::uint32_t r : from) {
    if (rng.uniform() < alpha) out.push_back(r);
  }
  return out;
}

}  // namespace

SampledPair machine_sample(MachineState& mach, double alpha, SamplingMode mode) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("machine_sample: alpha must be in (0,1]");
  }
  std::vector<std::uint32_t> rows1, rows2;
  if (mode == SamplingMode::kExactFraction) {
    const auto count = static_cast<std::size_t>(
        std::llround(alpha * static_cast<double>(mach.live.size())));
    rows1 = uniform_subset(mach.live, count, mach.rng);
    rows2 = uniform_subset(mach.live, count, mach.rng);
  } else {
    rows1 = bernoulli_subset(mach.live, alpha, mach.rng);
    rows2 = bernoulli_subset(mach.live, alpha, mach.rng);
  }
  return {mach.shard.take_rows(rows1), mach.shard.take_rows(rows2)};
}

CoordinatorRound coordinator_round(const Dataset& p1, const Dataset& p2,
                                   const SoccerParams& params,
                                   const DerivedConstants& constants,
                                   double alpha, const BlackBoxConfig& bb,
                                   RngStream& rng) {
  if (p1.empty()) throw std::invalid_argument("coordinator_round: empty P1");
  CoordinatorRound out;
  const std::size_t target =
      std::min<std::size_t>(static_cast<std::size_t>(constants.k_plus), p1.size());
  out.c_iter = cluster(WeightedDataset::unweighted(p1), target, bb, rng);
  const std::size_t drop = constants.truncation_count(params.k);
  const double trunc = truncated_cost(p2, out.c_iter, drop);
  out.v = 2.0 * trunc / (3.0 * params.k * constants.d_k);
  out.psi = out.v * params.k * constants.d_k / alpha;
  return out;
}

std::int64_t machine_remove(MachineState& mach, const CenterSet& c_iter,
                            double v, double* removed_cost,
                            std::vector<std::int64_t>* removed_ids) {
  if (c_iter.empty()) throw std::invalid_argument("machine_remove: empty centers");
  if (v < 0.0) throw std::invalid_argument("machine_remove: negative threshold");
  std::vector<std::uint32_t> kept;
  kept.reserve(mach.live.size());
  StableSum removed;
  std::int64_t removed_count = 0;
  for (std::uint32_t r : mach.live) {
    const double d2 = dist_sq_to_set(mach.shard[r], c_iter);
    if (d2 > v) {
      kept.push_back(r);
    } else {
      ++removed_count;
      removed.add(d2);
      if (removed_ids) removed_ids->push_back(mach.global_ids[r]);
    }
  }
  mach.live = std::move(kept);
  if (removed_cost) *removed_cost += removed.value();
  return removed_count;
}

CenterSet reduce_to_k(const CenterSet& c_out, SimNet& net, int k,
                      const BlackBoxConfig& bb, RngStream& rng) {
  if (c_out.empty()) throw std::invalid_argument("reduce_to_k: empty center set");
  if (c_out.size() <= static_cast<std::size_t>(k)) return c_out;

  net.begin_round(RoundKind::kReduce);
  net.broadcast(c_out, 0);
  // Each machine reports how many of its original points each center serves.
  auto counts = net.run_machines([&](MachineState& mach) {
    std::vector<double> local(c_out.size(), 0.0);
    const auto labels = assign(mach.shard, c_out);
    for (std::uint32_t c : labels) local[c] += 1.0;
    return local;
  });
  std::vector<double> weight(c_out.size(), 0.0);
  for (const auto& local : counts) {
    for (std::size_t i = 0; i < weight.size(); ++i) weight[i] += local[i];
  }

  return net.coordinator_step([&] {
    // Centers that serve no point carry no cost; drop them.
    WeightedDataset wd;
    wd.base = Dataset(c_out.dim());
    for (std::size_t i = 0; i < c_out.size(); ++i) {
      if (weight[i] > 0.0) {
        wd.base.push_back(c_out[i]);
        wd.weights.push_back(weight[i]);
      }
    }
    if (wd.base.size() <= static_cast<std::size_t>(k)) return wd.base;
    return cluster(wd, static_cast<std::size_t>(k), bb, rng);
  });
}

SoccerResult run_soccer(const Dataset& x, const SoccerParams& params, int m,
                        const BlackBoxConfig& bb, std::uint64_t seed) {
  params.validate();
  if (x.empty()) throw std::invalid_argument("run_soccer: empty dataset");
  if (m <= 0 || static_cast<std::size_t>(m) > x.size()) {
    throw std::invalid_argument("run_soccer: need 1 <= m <= |X|");
  }

  SoccerResult res;
  const std::int64_t n = static_cast<std::int64_t>(x.size());
  res.constants = derive_constants(params, n);

  SimNet net(x, m, params.partition, seed, params.exec, params.time_mode,
             params.skew_gamma);
  RngStream coord_rng = RngStream::child(seed, 0xc003d);

  res.c_out = CenterSet(x.dim());
  std::int64_t remaining = n;
  const int guard = params.loop_guard();

  while (static_cast<double>(remaining) > res.constants.eta) {
    if (res.loop_rounds >= guard) {
      throw RoundLimitExceeded(
          "soccer: loop reached " + std::to_string(res.loop_rounds) +
          " rounds without the remaining data fitting the coordinator");
    }
    net.begin_round(RoundKind::kLoop);
    const double alpha =
        std::min(1.0, res.constants.eta / static_cast<double>(remaining));

    auto samples = net.run_machines([&](MachineState& mach) {
      return machine_sample(mach, alpha, params.sampling_mode);
    });
    std::vector<Dataset> p1_parts, p2_parts;
    p1_parts.reserve(samples.size());
    p2_parts.reserve(samples.size());
    for (auto& s : samples) {
      p1_parts.push_back(std::move(s.p1));
      p2_parts.push_back(std::move(s.p2));
    }
    const Dataset p1 = net.gather(p1_parts);
    const Dataset p2 = net.gather(p2_parts);

    CoordinatorRound cr = net.coordinator_step([&] {
      return coordinator_round(p1, p2, params, res.constants, alpha, bb,
                               coord_rng);
    });
    res.c_out.append(cr.c_iter);
    net.broadcast(cr.c_iter, 1);  // centers plus the scalar threshold v

    RoundRecord rec;
    rec.round_index = res.loop_rounds + 1;
    rec.alpha = alpha;
    rec.p1_size = static_cast<std::int64_t>(p1.size());
    rec.p2_size = static_cast<std::int64_t>(p2.size());
    rec.v = cr.v;
    rec.psi = cr.psi;

    std::vector<std::vector<std::int64_t>> removed_ids(net.machines().size());
    std::vector<double> removed_costs(net.machines().size(), 0.0);
    auto removed_counts = net.run_machines([&](MachineState& mach) {
      return machine_remove(mach, cr.c_iter, cr.v, &removed_costs[mach.id],
                            params.trace_removed ? &removed_ids[mach.id]
                                                 : nullptr);
    });
    // Each machine reports its live count; the coordinator sums them.
    StableSum removed_cost;
    for (std::size_t j = 0; j < removed_counts.size(); ++j) {
      rec.removed_count += removed_counts[j];
      removed_cost.add(removed_costs[j]);
      if (params.trace_removed) {
        rec.removed_ids.insert(rec.removed_ids.end(), removed_ids[j].begin(),
                               removed_ids[j].end());
      }
    }
    rec.removed_cost = removed_cost.value();
    remaining = net.live_total();
    rec.remaining_n = remaining;
    rec.c_iter = std::move(cr.c_iter);
    res.rounds.push_back(std::move(rec));
    ++res.loop_rounds;
  }

  // Final phase: the leftovers fit in the coordinator.
  net.begin_round(RoundKind::kFinal);
  auto leftovers = net.run_machines(
      [](MachineState& mach) { return mach.shard.take_rows(mach.live); });
  const Dataset v_final = net.gather(leftovers);
  res.final_phase_n = static_cast<std::int64_t>(v_final.size());
  if (!v_final.empty()) {
    const CenterSet c_final = net.coordinator_step([&] {
      return cluster(WeightedDataset::unweighted(v_final),
                     static_cast<std::size_t>(params.k), bb, coord_rng);
    });
    res.final_phase_cost = cost(v_final, c_final);
    res.c_out.append(c_final);
  }
  res.total_rounds = res.loop_rounds + 1;

  res.reduced_centers = reduce_to_k(res.c_out, net, params.k, bb, coord_rng);
  res.cost_c_out = cost(x, res.c_out);
  res.final_cost = cost(x, res.reduced_centers);
  res.ledger = net.ledger();
  res.timer = net.timer();
  return res;
}

}  // namespace distkm
