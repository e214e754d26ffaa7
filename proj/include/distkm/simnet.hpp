#pragma once

#include <chrono>
#include <cstdint>
#include <exception>
#include <functional>
#include <stdexcept>
#include <thread>
#include <type_traits>
#include <vector>

#include "distkm/geometry.hpp"
#include "distkm/rng.hpp"

namespace distkm {

enum class PartitionStrategy { kUniformRandom, kContiguous, kSkewed };
enum class ExecMode { kSerial, kParallel };
enum class TimeMode { kWallClock, kWorkCounter };
enum class RoundKind { kLoop, kFinal, kReduce };

// One simulated machine: an immutable shard plus the set of still-live rows.
// `global_ids` ties shard rows back to indices in the original dataset.
struct MachineState {
  int id = 0;
  Dataset shard;
  std::vector<std::int64_t> global_ids;
  std::vector<std::uint32_t> live;
  RngStream rng{0};
};

// Disjoint cover of x across m machines. uniform_random shuffles indices,
// contiguous splits by index ranges, skewed gives machine j (1-based) a
// share proportional to j^(-gamma), apportioned by largest remainder.
// Per-machine rng streams are derived from machine_seed_base by id.
std::vector<MachineState> partition(const Dataset& x, int m,
                                    PartitionStrategy strategy, RngStream& rng,
                                    std::uint64_t machine_seed_base,
                                    double skew_gamma = 1.0);

struct LedgerCounts {
  std::int64_t points_to_coordinator = 0;
  std::int64_t points_broadcast = 0;
  std::int64_t scalars_broadcast = 0;
};

struct LedgerRound {
  RoundKind kind = RoundKind::kLoop;
  LedgerCounts counts;
};

// Communication accounting. A broadcast is counted once, not per machine.
class CommLedger {
 public:
  void begin_round(RoundKind kind) { rounds_.push_back({kind, {}}); }
  void add_points_to_coordinator(std::int64_t n);
  void add_broadcast(std::int64_t points, std::int64_t scalars);
  const std::vector<LedgerRound>& rounds() const { return rounds_; }
  const LedgerCounts& cumulative() const { return cumulative_; }

 private:
  void require_round() const {
    if (rounds_.empty()) throw std::logic_error("ledger: no open round");
  }
  std::vector<LedgerRound> rounds_;
  LedgerCounts cumulative_;
};

// Per-round machine/coordinator time. The machine total is the sum over
// rounds of the per-round maximum across machines. In work-counter mode the
// "seconds" are distance-evaluation counts, which are reproducible.
class RoundTimer {
 public:
  void begin_round(std::size_t machine_count);
  void add_machine_time(int machine_id, double seconds);
  void add_coordinator_time(double seconds);
  double machine_time_total() const;
  double coordinator_time_total() const;
  double round_machine_max(std::size_t round) const;
  std::size_t round_count() const { return machine_seconds_.size(); }

 private:
  std::vector<std::vector<double>> machine_seconds_;
  std::vector<double> coordinator_seconds_;
};

// Coordinator-model fabric: machines talk only to the coordinator, work
// proceeds in rounds, and all communication passes through the ledger.
class SimNet {
 public:
  SimNet(const Dataset& x, int m, PartitionStrategy strategy,
         std::uint64_t master_seed, ExecMode exec = ExecMode::kSerial,
         TimeMode time_mode = TimeMode::kWallClock, double skew_gamma = 1.0);

  std::vector<MachineState>& machines() { return machines_; }
  const std::vector<MachineState>& machines() const { return machines_; }
  std::size_t dim() const { return dim_; }
  std::int64_t live_total() const;

  void begin_round(RoundKind kind);

  // Runs f once per machine; results come back in machine-id order and are
  // identical whether machines execute serially or in parallel. Per-machine
  // time feeds the current round's timer. A closure failure on any machine
  // aborts the round with that machine's error (lowest id wins).
  template <class F,
            class R = std::invoke_result_t<F&, MachineState&>>
  std::vector<R> run_machines(F&& f) {
    std::vector<R> results(machines_.size());
    std::vector<std::exception_ptr> errors(machines_.size());
    auto run_one = [&](std::size_t j) {
      const auto wall0 = std::chrono::steady_clock::now();
      const std::uint64_t work0 = work_count();
      try {
        results[j] = f(machines_[j]);
      } catch (...) {
        errors[j] = std::current_exception();
      }
      const double elapsed =
          time_mode_ == TimeMode::kWorkCounter
              ? static_cast<double>(work_count() - work0)
              : std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                              wall0)
                    .count();
      machine_times_[j] = elapsed;
    };
    machine_times_.assign(machines_.size(), 0.0);
    if (exec_ == ExecMode::kParallel && machines_.size() > 1) {
      std::vector<std::thread> pool;
      pool.reserve(machines_.size());
      for (std::size_t j = 0; j < machines_.size(); ++j) {
        pool.emplace_back(run_one, j);
      }
      for (auto& t : pool) t.join();
    } else {
      for (std::size_t j = 0; j < machines_.size(); ++j) run_one(j);
    }
    for (std::size_t j = 0; j < machines_.size(); ++j) {
      timer_.add_machine_time(static_cast<int>(j), machine_times_[j]);
      if (errors[j]) std::rethrow_exception(errors[j]);
    }
    return results;
  }

  // Timed coordinator-side closure.
  template <class F>
  auto coordinator_step(F&& f) {
    const auto wall0 = std::chrono::steady_clock::now();
    const std::uint64_t work0 = work_count();
    if constexpr (std::is_void_v<std::invoke_result_t<F&>>) {
      f();
      record_coordinator(wall0, work0);
    } else {
      auto r = f();
      record_coordinator(wall0, work0);
      return r;
    }
  }

  // Concatenates per-machine payloads in machine-id order; the ledger's
  // points_to_coordinator grows by the total payload size.
  Dataset gather(const std::vector<Dataset>& payloads);

  // Extractor convenience form of gather.
  template <class F>
  Dataset gather_from(F&& extract) {
    std::vector<Dataset> payloads;
    payloads.reserve(machines_.size());
    for (auto& mach : machines_) payloads.push_back(extract(mach));
    return gather(payloads);
  }

  // Delivers an identical payload to every machine; counted once.
  void broadcast(const CenterSet& centers, std::int64_t scalar_count);

  CommLedger& ledger() { return ledger_; }
  const CommLedger& ledger() const { return ledger_; }
  RoundTimer& timer() { return timer_; }
  const RoundTimer& timer() const { return timer_; }

 private:
  void record_coordinator(std::chrono::steady_clock::time_point wall0,
                          std::uint64_t work0) {
    const double elapsed =
        time_mode_ == TimeMode::kWorkCounter
            ? static_cast<double>(work_count() - work0)
            : std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                            wall0)
                  .count();
    timer_.add_coordinator_time(elapsed);
  }

  std::size_t dim_ = 0;
  std::vector<MachineState> machines_;
  std::vector<double> machine_times_;
  CommLedger ledger_;
  RoundTimer timer_;
  ExecMode exec_;
  TimeMode time_mode_;
};

}  // namespace distkm
