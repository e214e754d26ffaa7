#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "distkm/blackbox.hpp"
#include "distkm/datagen.hpp"
#include "distkm/kmeans_parallel.hpp"
#include "distkm/soccer.hpp"

namespace distkm {

enum class Algo { kSoccer, kKmeansParallel };
enum class DatasetKind { kGaussian, kHardInstance, kCsv };

struct ExperimentConfig {
  DatasetKind dataset_kind = DatasetKind::kGaussian;
  std::string dataset_label = "gaussian";
  GaussianMixtureSpec gauss;
  HardInstanceSpec hard;
  std::string csv_path;
  CsvOptions csv;

  Algo algo = Algo::kSoccer;
  int k = 25;
  double epsilon = 0.1;
  double delta = 0.1;
  int rounds = 5;        // k-means|| only
  int oversampling = 0;  // k-means|| only; 0 = 2k
  int machines = 50;
  int repetitions = 10;
  std::uint64_t master_seed = 1;
  ConstantsMode constants_mode = ConstantsMode::kExperiment;
  SamplingMode sampling_mode = SamplingMode::kExactFraction;
  PartitionStrategy partition = PartitionStrategy::kUniformRandom;
  double skew_gamma = 1.0;
  ExecMode exec = ExecMode::kSerial;
  TimeMode time_mode = TimeMode::kWallClock;

  void validate() const;
};

struct ResultRow {
  std::string dataset;
  std::string algo;
  int k = 0;
  double epsilon = 0.0;
  double rounds_mean = 0.0, rounds_std = 0.0;
  double output_size_mean = 0.0, output_size_std = 0.0;
  double cost_mean = 0.0, cost_std = 0.0;
  double machine_time_s = 0.0;
  double total_time_s = 0.0;
  std::int64_t coord_points_received = 0;
  std::int64_t coord_points_broadcast = 0;
  int rep_count = 0;
  std::uint64_t seed = 0;
};

struct ExperimentResult {
  std::vector<ResultRow> per_rep;
  ResultRow aggregate;
};

// Seed for repetition `rep` of a run with the given master seed. The mixing
// is fixed (SplitMix64 of master xor mixed rep index) so runs are citable.
std::uint64_t rep_seed(std::uint64_t master, int rep);

// Runs the configured algorithm `repetitions` times with seeds derived from
// the master seed and returns per-rep rows plus a mean/std aggregate.
// Deterministic given the master seed (timing columns aside).
ExperimentResult run_experiment(const ExperimentConfig& config);

// Aggregates rows into one mean/std row (sample std, zero for one rep).
ResultRow aggregate_rows(std::span<const ResultRow> rows);

void emit_csv(std::span<const ResultRow> rows, std::ostream& out,
              bool include_timing = true);
void emit_markdown(std::span<const ResultRow> rows, std::ostream& out,
                   bool include_timing = true);

}  // namespace distkm
