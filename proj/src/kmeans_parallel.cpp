#include "distkm/kmeans_parallel.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace distkm {

void KmppParams::validate() const {
  if (k < 2) throw std::invalid_argument("kmeans_parallel: k must be at least 2");
  if (rounds < 0) throw std::invalid_argument("kmeans_parallel: rounds must be >= 0");
  if (oversampling < 0) {
    throw std::invalid_argument("kmeans_parallel: oversampling must be positive (or 0 for 2k)");
  }
}

namespace {

struct Selection {
  std::vector<std::pair<int, std::uint32_t>> picks;  // (machine, row)
};

// Exactly-count weighted sampling without replacement across per-machine
// weight arrays; machines are scanned in id order so the draw sequence is
// independent of execution parallelism.
Selection select_weighted(std::vector<std::vector<double>>& weights,
                          double total, std::size_t count, RngStream& rng) {
  Selection sel;
  for (std::size_t t = 0; t < count; ++t) {
    if (!(total > 0.0)) break;
    const double u = rng.uniform() * total;
    double acc = 0.0;
    int pick_machine = -1;
    std::uint32_t pick_row = 0;
    for (std::size_t j = 0; j < weights.size() && pick_machine < 0; ++j) {
      for (std::size_t r = 0; r < weights[j].size(); ++r) {
        const double w = weights[j][r];
        if (w <= 0.0) continue;
        acc += w;
        if (u < acc) {
          pick_machine = static_cast<int>(j);
          pick_row = static_cast<std::uint32_t>(r);
          break;
        }
      }
    }
    if (pick_machine < 0) {
      // Rounding walked the draw off the end; take the last positive weight.
      for (std::size_t j = weights.size(); j-- > 0 && pick_machine < 0;) {
        for (std::size_t r = weights[j].size(); r-- > 0;) {
          if (weights[j][r] > 0.0) {
            pick_machine = static_cast<int>(j);
            pick_row = static_cast<std::uint32_t>(r);
            break;
          }
        }
      }
      if (pick_machine < 0) break;
    }
    total -= weights[pick_machine][pick_row];
    weights[pick_machine][pick_row] = 0.0;
    sel.picks.emplace_back(pick_machine, pick_row);
  }
  return sel;
}

}  // namespace

KmppResult run_kmeans_parallel(const Dataset& x, const KmppParams& params,
                               int m, const BlackBoxConfig& bb,
                               std::uint64_t seed) {
  params.validate();
  if (x.empty()) throw std::invalid_argument("kmeans_parallel: empty dataset");
  if (m <= 0 || static_cast<std::size_t>(m) > x.size()) {
    throw std::invalid_argument("kmeans_parallel: need 1 <= m <= |X|");
  }

  KmppResult res;
  SimNet net(x, m, params.partition, seed, params.exec, params.time_mode,
             params.skew_gamma);
  RngStream coord_rng = RngStream::child(seed, 0xba41);
  const std::size_t l = static_cast<std::size_t>(params.l());

  // Initial center: one globally uniform point.
  std::size_t pick = coord_rng.uniform_index(x.size());
  res.candidates = CenterSet(x.dim());
  CenterSet pending(x.dim());
  for (const auto& mach : net.machines()) {
    if (pick < mach.shard.size()) {
      pending.push_back(mach.shard[pick]);
      break;
    }
    pick -= mach.shard.size();
  }
  res.candidates.append(pending);

  // Per-machine squared distance of every shard point to the current C,
  // maintained incrementally against the newly broadcast centers.
  std::vector<std::vector<double>> min_d2(net.machines().size());
  for (const auto& mach : net.machines()) {
    min_d2[mach.id].assign(mach.shard.size(),
                           std::numeric_limits<double>::infinity());
  }

  for (int round = 1; round <= params.rounds; ++round) {
    net.begin_round(RoundKind::kLoop);
    if (round == 1) {
      // The initial center travelled up to the coordinator when chosen.
      net.ledger().add_points_to_coordinator(1);
    }
    net.broadcast(pending, 0);

    auto partials = net.run_machines([&](MachineState& mach) {
      auto& d2 = min_d2[mach.id];
      StableSum sum;
      for (std::size_t r = 0; r < mach.shard.size(); ++r) {
        d2[r] = std::min(d2[r], dist_sq_to_set(mach.shard[r], pending));
        sum.add(d2[r]);
      }
      return sum.value();
    });
    StableSum phi;
    for (double p : partials) phi.add(p);
    res.phi_per_round.push_back(phi.value());

    const Selection sel = net.coordinator_step([&] {
      return select_weighted(min_d2, phi.value(), l, coord_rng);
    });
    net.ledger().add_points_to_coordinator(
        static_cast<std::int64_t>(sel.picks.size()));

    pending = CenterSet(x.dim());
    for (const auto& [mach_id, row] : sel.picks) {
      pending.push_back(net.machines()[mach_id].shard[row]);
    }
    res.candidates.append(pending);
    if (pending.empty()) break;  // no residual mass left to sample from
  }

  if (res.candidates.size() <= static_cast<std::size_t>(params.k)) {
    res.reduced = res.candidates;
  } else {
    net.begin_round(RoundKind::kReduce);
    net.broadcast(pending, 0);  // machines now hold all of C
    auto counts = net.run_machines([&](MachineState& mach) {
      std::vector<double> local(res.candidates.size(), 0.0);
      for (std::uint32_t c : assign(mach.shard, res.candidates)) local[c] += 1.0;
      return local;
    });
    std::vector<double> weight(res.candidates.size(), 0.0);
    for (const auto& local : counts) {
      for (std::size_t i = 0; i < weight.size(); ++i) weight[i] += local[i];
    }
    res.reduced = net.coordinator_step([&] {
      WeightedDataset wd;
      wd.base = Dataset(x.dim());
      for (std::size_t i = 0; i < res.candidates.size(); ++i) {
        if (weight[i] > 0.0) {
          wd.base.push_back(res.candidates[i]);
          wd.weights.push_back(weight[i]);
        }
      }
      if (wd.base.size() <= static_cast<std::size_t>(params.k)) return wd.base;
      return cluster(wd, static_cast<std::size_t>(params.k), bb, coord_rng);
    });
  }

  res.final_cost = cost(x, res.reduced);
  res.ledger = net.ledger();
  res.timer = net.timer();
  return res;
}

}  // namespace distkm
