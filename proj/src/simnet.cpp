#include "distkm/simnet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace distkm {

namespace {

// Largest-remainder apportionment of n into shares proportional to weights.
std::vector<std::size_t> apportion(std::size_t n,
                                   const std::vector<double>& weights) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<std::size_t> sizes(weights.size());
  std::vector<std::pair<double, std::size_t>> remainders(weights.size());
  std::size_t assigned = 0;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    const double exact = static_cast<double>(n) * weights[j] / total;
    sizes[j] = static_cast<std::size_t>(std::floor(exact));
    remainders[j] = {exact - std::floor(exact), j};
    assigned += sizes[j];
  }
  std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (std::size_t r = 0; assigned < n; ++r, ++assigned) {
    ++sizes[remainders[r % remainders.size()].second];
  }
  return sizes;
}

}  // namespace

std::vector<MachineState> partition(const Dataset& x, int m,
                                    PartitionStrategy strategy, RngStream& rng,
                                    std::uint64_t machine_seed_base,
                                    double skew_gamma) {
  if (m <= 0) throw std::invalid_argument("partition: m must be positive");
  if (static_cast<std::size_t>(m) > x.size()) {
    throw std::invalid_argument("partition: more machines than points");
  }

  const std::size_t n = x.size();
  std::vector<std::int64_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  if (strategy == PartitionStrategy::kUniformRandom) {
    for (std::size_t i = n; i > 1; --i) {  // Fisher-Yates
      std::swap(order[i - 1], order[rng.uniform_index(i)]);
    }
  }

  std::vector<std::size_t> sizes;
  if (strategy == PartitionStrategy::kSkewed) {
    std::vector<double> weights(m);
    for (int j = 0; j < m; ++j) {
      weights[j] = std::pow(static_cast<double>(j + 1), -skew_gamma);
    }
    sizes = apportion(n, weights);
  } else {
    sizes.assign(m, n / m);
    for (std::size_t j = 0; j < n % static_cast<std::size_t>(m); ++j) ++sizes[j];
  }

  std::vector<MachineState> machines(m);
  std::size_t cursor = 0;
  for (int j = 0; j < m; ++j) {
    MachineState& mach = machines[j];
    mach.id = j;
    mach.shard = Dataset(x.dim());
    mach.shard.reserve(sizes[j]);
    mach.global_ids.reserve(sizes[j]);
    for (std::size_t t = 0; t < sizes[j]; ++t, ++cursor) {
      mach.shard.push_back(x[order[cursor]]);
      mach.global_ids.push_back(order[cursor]);
    }
    mach.live.resize(sizes[j]);
    std::iota(mach.live.begin(), mach.live.end(), 0);
    mach.rng = RngStream::child(machine_seed_base, static_cast<std::uint64_t>(j));
  }
  return machines;
}

void CommLedger::add_points_to_coordinator(std::int64_t n) {
  require_round();
  rounds_.back().counts.points_to_coordinator += n;
  cumulative_.points_to_coordinator += n;
}

void CommLedger::add_broadcast(std::int64_t points, std::int64_t scalars) {
  require_round();
  rounds_.back().counts.points_broadcast += points;
  rounds_.back().counts.scalars_broadcast += scalars;
  cumulative_.points_broadcast += points;
  cumulative_.scalars_broadcast += scalars;
}

void RoundTimer::begin_round(std::size_t machine_count) {
  machine_seconds_.emplace_back(machine_count, 0.0);
  coordinator_seconds_.push_back(0.0);
}

void RoundTimer::add_machine_time(int machine_id, double seconds) {
  if (machine_seconds_.empty()) throw std::logic_error("timer: no open round");
  machine_seconds_.back().at(machine_id) += seconds;
}

void RoundTimer::add_coordinator_time(double seconds) {
  if (coordinator_seconds_.empty()) throw std::logic_error("timer: no open round");
  coordinator_seconds_.back() += seconds;
}

double RoundTimer::round_machine_max(std::size_t round) const {
  const auto& row = machine_seconds_.at(round);
  return row.empty() ? 0.0 : *std::max_element(row.begin(), row.end());
}

double RoundTimer::machine_time_total() const {
  double total = 0.0;
  for (std::size_t r = 0; r < machine_seconds_.size(); ++r) {
    total += round_machine_max(r);
  }
  return total;
}

double RoundTimer::coordinator_time_total() const {
  return std::accumulate(coordinator_seconds_.begin(),
                         coordinator_seconds_.end(), 0.0);
}

SimNet::SimNet(const Dataset& x, int m, PartitionStrategy strategy,
               std::uint64_t master_seed, ExecMode exec, TimeMode time_mode,
               double skew_gamma)
    : dim_(x.dim()), exec_(exec), time_mode_(time_mode) {
  RngStream part_rng = RngStream::child(master_seed, 0x9a27);
  machines_ =
      partition(x, m, strategy, part_rng, master_seed, skew_gamma);
}

std::int64_t SimNet::live_total() const {
  std::int64_t n = 0;
  for (const auto& mach : machines_) n += static_cast<std::int64_t>(mach.live.size());
  return n;
}

void SimNet::begin_round(RoundKind kind) {
  ledger_.begin_round(kind);
  timer_.begin_round(machines_.size());
}

Dataset SimNet::gather(const std::vector<Dataset>& payloads) {
  Dataset out(dim_);
  std::int64_t total = 0;
  for (const auto& p : payloads) {
    total += static_cast<std::int64_t>(p.size());
    out.append(p);
  }
  ledger_.add_points_to_coordinator(total);
  return out;
}

void SimNet::broadcast(const CenterSet& centers, std::int64_t scalar_count) {
  ledger_.add_broadcast(static_cast<std::int64_t>(centers.size()), scalar_count);
}

}  // namespace distkm
