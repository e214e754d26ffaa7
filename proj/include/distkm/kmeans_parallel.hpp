#pragma once

#include <cstdint>
#include <vector>

#include "distkm/blackbox.hpp"
#include "distkm/geometry.hpp"
#include "distkm/simnet.hpp"

namespace distkm {

struct KmppParams {
  int k = 2;
  int rounds = 5;       // r
  int oversampling = 0; // l; 0 means the 2k default
  PartitionStrategy partition = PartitionStrategy::kUniformRandom;
  double skew_gamma = 1.0;
  ExecMode exec = ExecMode::kSerial;
  TimeMode time_mode = TimeMode::kWallClock;

  int l() const { return oversampling > 0 ? oversampling : 2 * k; }
  void validate() const;
};

struct KmppResult {
  CenterSet candidates;  // C before reduction; 1 + r*l entries unless the
                         // residual sampling mass hits zero first
  CenterSet reduced;     // at most k
  double final_cost = 0.0;            // cost(X, reduced)
  std::vector<double> phi_per_round;  // cost(X, C) as gathered each round
  CommLedger ledger;
  RoundTimer timer;
};

// One uniformly random initial center, then r rounds that each select
// exactly l new points globally with probability proportional to their
// squared distance to the current centers (without replacement), followed by
// the weighted reduction to k. Per round the machines receive the newly
// selected centers and send back partial costs and the selected points.
KmppResult run_kmeans_parallel(const Dataset& x, const KmppParams& params,
                               int m, const BlackBoxConfig& bb,
                               std::uint64_t seed);

}  // namespace distkm
