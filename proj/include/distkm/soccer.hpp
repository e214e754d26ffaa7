#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "distkm/blackbox.hpp"
#include "distkm/geometry.hpp"
#include "distkm/rng.hpp"
#include "distkm/simnet.hpp"

namespace distkm {

// Which argument goes inside the logarithm of the derived constants.
// kExperiment (1.1k/delta) reproduces the published coordinator sample
// sizes exactly; kTheory (1.1k/(delta*epsilon)) matches the stated
// worst-case guarantees.
enum class ConstantsMode { kExperiment, kTheory };

enum class SamplingMode { kExactFraction, kBernoulli };

struct SoccerParams {
  int k = 2;              // guarantees assume k >= 5; smaller k still runs
  double delta = 0.1;     // confidence, in (0,1)
  double epsilon = 0.1;   // coordinator parameter, in (0,1)
  ConstantsMode constants_mode = ConstantsMode::kExperiment;
  SamplingMode sampling_mode = SamplingMode::kExactFraction;
  int max_loop_rounds_guard = 0;  // 0 = ceil(1/epsilon) + 2
  bool trace_removed = false;     // record per-round removed global ids
  PartitionStrategy partition = PartitionStrategy::kUniformRandom;
  double skew_gamma = 1.0;
  ExecMode exec = ExecMode::kSerial;
  TimeMode time_mode = TimeMode::kWallClock;

  void validate() const;
  int loop_guard() const;
};

// eta = 36 k n^eps ln(log_arg), d_k = 6.5 ln(log_arg),
// k_plus = floor(k + 9 ln(log_arg)). Natural logarithm throughout.
struct DerivedConstants {
  double log_arg = 0.0;  // the value inside the logarithm
  double eta = 0.0;      // coordinator capacity
  double d_k = 0.0;
  int k_plus = 0;

  // Expected per-round coordinator sample size; floor matches the published
  // values digit for digit.
  std::int64_t p1_size() const { return static_cast<std::int64_t>(eta); }
  // Number of points dropped when computing the threshold's truncated cost.
  std::size_t truncation_count(int k) const;
};

DerivedConstants derive_constants(const SoccerParams& params, std::int64_t n);

struct RoundRecord {
  int round_index = 0;  // 1-based
  double alpha = 0.0;
  std::int64_t p1_size = 0;
  std::int64_t p2_size = 0;
  CenterSet c_iter;
  double v = 0.0;
  double psi = 0.0;  // = v * k * d_k / alpha
  std::int64_t removed_count = 0;
  std::int64_t remaining_n = 0;
  double removed_cost = 0.0;  // cost of this round's removed points vs c_iter
  std::vector<std::int64_t> removed_ids;  // filled only when trace_removed
};

struct SoccerResult {
  CenterSet c_out;
  int loop_rounds = 0;
  int total_rounds = 0;  // loop rounds + the final phase
  std::vector<RoundRecord> rounds;
  CommLedger ledger;
  RoundTimer timer;
  CenterSet reduced_centers;     // at most k
  std::int64_t final_phase_n = 0;  // points surrendered in the final phase
  double final_phase_cost = 0.0;   // cost of those points vs the final centers
  double cost_c_out = 0.0;         // cost(X, c_out)
  double final_cost = 0.0;         // cost(X, reduced_centers)
  DerivedConstants constants;
};

class RoundLimitExceeded : public std::runtime_error {
 public:
  explicit RoundLimitExceeded(const std::string& what)
      : std::runtime_error(what) {}
};

struct SampledPair {
  Dataset p1;
  Dataset p2;
};

// Two independent sub-samples of the machine's live points. Exact-fraction
// mode draws two uniform subsets of size round(alpha * live) without
// replacement (the subsets may overlap each other); bernoulli mode includes
// each point independently with probability alpha.
SampledPair machine_sample(MachineState& mach, double alpha, SamplingMode mode);

struct CoordinatorRound {
  CenterSet c_iter;
  double v = 0.0;
  double psi = 0.0;
};

// Clusters p1 with min(k_plus, |p1|) target centers, then derives the
// removal threshold from the truncated cost of those centers on p2:
//   v = 2 * cost_trunc(p2, c_iter) / (3 k d_k).
CoordinatorRound coordinator_round(const Dataset& p1, const Dataset& p2,
                                   const SoccerParams& params,
                                   const DerivedConstants& constants,
                                   double alpha, const BlackBoxConfig& bb,
                                   RngStream& rng);

// Keeps exactly the live points with squared distance strictly greater than
// v; returns how many were removed. Accumulates the removed points' cost
// against c_iter into *removed_cost, and their global ids into *removed_ids
// when non-null.
std::int64_t machine_remove(MachineState& mach, const CenterSet& c_iter,
                            double v, double* removed_cost,
                            std::vector<std::int64_t>* removed_ids);

// Weighted reduction to at most k centers: broadcast c_out once, gather
// per-center assignment counts of the machines' original points, then run
// the black box on the weighted center set. Returns c_out unchanged when it
// already has at most k centers (no communication in that case).
CenterSet reduce_to_k(const CenterSet& c_out, SimNet& net, int k,
                      const BlackBoxConfig& bb, RngStream& rng);

// The full algorithm: while more than eta points remain, sample, cluster,
// broadcast a threshold, and remove; then gather the leftovers, cluster them
// with k centers, and reduce the accumulated centers to k.
SoccerResult run_soccer(const Dataset& x, const SoccerParams& params, int m,
                        const BlackBoxConfig& bb, std::uint64_t seed);

}  // namespace distkm
