#include "distkm/harness.hpp"

#include <charconv>
#include <cmath>
#include <ostream>
#include <sstream>

namespace distkm {

void ExperimentConfig::validate() const {
  if (repetitions < 1) {
    throw std::invalid_argument("experiment: repetitions must be >= 1");
  }
  if (k < 2) throw std::invalid_argument("experiment: k must be at least 2");
  if (machines < 1) throw std::invalid_argument("experiment: machines must be >= 1");
  if (dataset_kind == DatasetKind::kCsv && csv_path.empty()) {
    throw std::invalid_argument("experiment: csv dataset needs a path");
  }
}

std::uint64_t rep_seed(std::uint64_t master, int rep) {
  return mix64(master ^ mix64(static_cast<std::uint64_t>(rep) + 1));
}

namespace {

struct RepOutcome {
  double rounds = 0.0;
  double output_size = 0.0;
  double cost = 0.0;
  double machine_time = 0.0;
  double total_time = 0.0;
  std::int64_t received = 0;
  std::int64_t broadcast = 0;
};

Dataset make_dataset(const ExperimentConfig& config, std::uint64_t data_seed) {
  switch (config.dataset_kind) {
    case DatasetKind::kGaussian: {
      GaussianMixtureSpec spec = config.gauss;
      spec.seed = data_seed;
      return gen_gaussian_mixture(spec).points;
    }
    case DatasetKind::kHardInstance:
      return gen_hard_instance(config.hard).points;
    case DatasetKind::kCsv:
      return load_csv(config.csv_path, config.csv);
  }
  throw std::logic_error("experiment: unknown dataset kind");
}

RepOutcome run_one(const ExperimentConfig& config, const Dataset& x,
                   std::uint64_t algo_seed) {
  RepOutcome out;
  BlackBoxConfig bb;
  if (config.algo == Algo::kSoccer) {
    SoccerParams params;
    params.k = config.k;
    params.delta = config.delta;
    params.epsilon = config.epsilon;
    params.constants_mode = config.constants_mode;
    params.sampling_mode = config.sampling_mode;
    params.partition = config.partition;
    params.skew_gamma = config.skew_gamma;
    params.exec = config.exec;
    params.time_mode = config.time_mode;
    const SoccerResult res =
        run_soccer(x, params, config.machines, bb, algo_seed);
    out.rounds = res.loop_rounds;
    out.output_size = static_cast<double>(res.c_out.size());
    out.cost = res.final_cost;
    out.machine_time = res.timer.machine_time_total();
    out.total_time =
        res.timer.machine_time_total() + res.timer.coordinator_time_total();
    out.received = res.ledger.cumulative().points_to_coordinator;
    out.broadcast = res.ledger.cumulative().points_broadcast;
  } else {
    KmppParams params;
    params.k = config.k;
    params.rounds = config.rounds;
    params.oversampling = config.oversampling;
    params.partition = config.partition;
    params.skew_gamma = config.skew_gamma;
    params.exec = config.exec;
    params.time_mode = config.time_mode;
    const KmppResult res =
        run_kmeans_parallel(x, params, config.machines, bb, algo_seed);
    out.rounds = config.rounds;
    out.output_size = static_cast<double>(res.candidates.size());
    out.cost = res.final_cost;
    out.machine_time = res.timer.machine_time_total();
    out.total_time =
        res.timer.machine_time_total() + res.timer.coordinator_time_total();
    out.received = res.ledger.cumulative().points_to_coordinator;
    out.broadcast = res.ledger.cumulative().points_broadcast;
  }
  return out;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();

  ExperimentResult result;
  // CSV data is fixed across reps; generated data is redrawn per rep.
  std::optional<Dataset> fixed;
  if (config.dataset_kind == DatasetKind::kCsv ||
      config.dataset_kind == DatasetKind::kHardInstance) {
    fixed = make_dataset(config, 0);
  }

  for (int rep = 0; rep < config.repetitions; ++rep) {
    const std::uint64_t seed = rep_seed(config.master_seed, rep);
    try {
      Dataset generated;
      if (!fixed) generated = make_dataset(config, mix64(seed ^ 0xda7a));
      const Dataset& x = fixed ? *fixed : generated;
      const RepOutcome o = run_one(config, x, mix64(seed ^ 0xa190));

      ResultRow row;
      row.dataset = config.dataset_label;
      row.algo = config.algo == Algo::kSoccer ? "soccer" : "kmeans_parallel";
      row.k = config.k;
      row.epsilon = config.algo == Algo::kSoccer ? config.epsilon : 0.0;
      row.rounds_mean = o.rounds;
      row.output_size_mean = o.output_size;
      row.cost_mean = o.cost;
      row.machine_time_s = o.machine_time;
      row.total_time_s = o.total_time;
      row.coord_points_received = o.received;
      row.coord_points_broadcast = o.broadcast;
      row.rep_count = 1;
      row.seed = seed;
      result.per_rep.push_back(std::move(row));
    } catch (const RoundLimitExceeded& e) {
      throw RoundLimitExceeded("rep " + std::to_string(rep) + ": " + e.what());
    } catch (const std::exception& e) {
      throw std::runtime_error("rep " + std::to_string(rep) + ": " + e.what());
    }
  }

  result.aggregate = aggregate_rows(result.per_rep);
  result.aggregate.seed = config.master_seed;
  return result;
}

namespace {

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

MeanStd mean_std(const std::vector<double>& xs) {
  MeanStd ms;
  if (xs.empty()) return ms;
  for (double x : xs) ms.mean += x;
  ms.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - ms.mean) * (x - ms.mean);
    ms.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return ms;
}

}  // namespace

ResultRow aggregate_rows(std::span<const ResultRow> rows) {
  if (rows.empty()) throw std::invalid_argument("aggregate: no rows");
  ResultRow agg = rows.front();
  std::vector<double> rounds, sizes, costs, mtime, ttime, recv, bcast;
  for (const ResultRow& r : rows) {
    rounds.push_back(r.rounds_mean);
    sizes.push_back(r.output_size_mean);
    costs.push_back(r.cost_mean);
    mtime.push_back(r.machine_time_s);
    ttime.push_back(r.total_time_s);
    recv.push_back(static_cast<double>(r.coord_points_received));
    bcast.push_back(static_cast<double>(r.coord_points_broadcast));
  }
  const MeanStd mr = mean_std(rounds), mo = mean_std(sizes), mc = mean_std(costs);
  agg.rounds_mean = mr.mean;
  agg.rounds_std = mr.std;
  agg.output_size_mean = mo.mean;
  agg.output_size_std = mo.std;
  agg.cost_mean = mc.mean;
  agg.cost_std = mc.std;
  agg.machine_time_s = mean_std(mtime).mean;
  agg.total_time_s = mean_std(ttime).mean;
  agg.coord_points_received =
      static_cast<std::int64_t>(std::llround(mean_std(recv).mean));
  agg.coord_points_broadcast =
      static_cast<std::int64_t>(std::llround(mean_std(bcast).mean));
  agg.rep_count = static_cast<int>(rows.size());
  return agg;
}

namespace {

std::vector<std::string> column_names(bool include_timing) {
  std::vector<std::string> names = {
      "dataset",       "algo",          "k",
      "epsilon",       "rounds_mean",   "rounds_std",
      "output_size_mean", "output_size_std", "cost_mean",
      "cost_std"};
  if (include_timing) {
    names.push_back("machine_time_s");
    names.push_back("total_time_s");
  }
  names.push_back("coord_points_received");
  names.push_back("coord_points_broadcast");
  names.push_back("rep_count");
  names.push_back("seed");
  return names;
}

std::string format_double(double v) {
  // Shortest representation that parses back to the same value.
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return ec == std::errc() ? std::string(buf, end) : std::to_string(v);
}

std::vector<std::string> row_fields(const ResultRow& r, bool include_timing) {
  std::vector<std::string> f = {
      r.dataset,
      r.algo,
      std::to_string(r.k),
      format_double(r.epsilon),
      format_double(r.rounds_mean),
      format_double(r.rounds_std),
      format_double(r.output_size_mean),
      format_double(r.output_size_std),
      format_double(r.cost_mean),
      format_double(r.cost_std)};
  if (include_timing) {
    f.push_back(format_double(r.machine_time_s));
    f.push_back(format_double(r.total_time_s));
  }
  f.push_back(std::to_string(r.coord_points_received));
  f.push_back(std::to_string(r.coord_points_broadcast));
  f.push_back(std::to_string(r.rep_count));
  f.push_back(std::to_string(r.seed));
  return f;
}

}  // namespace

void emit_csv(std::span<const ResultRow> rows, std::ostream& out,
              bool include_timing) {
  if (rows.empty()) throw std::invalid_argument("emit_csv: no rows");
  const auto names = column_names(include_timing);
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) out << ',';
    out << names[i];
  }
  out << '\n';
  for (const ResultRow& r : rows) {
    const auto fields = row_fields(r, include_timing);
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out << ',';
      out << fields[i];
    }
    out << '\n';
  }
}

void emit_markdown(std::span<const ResultRow> rows, std::ostream& out,
                   bool include_timing) {
  if (rows.empty()) throw std::invalid_argument("emit_markdown: no rows");
  const auto names = column_names(include_timing);
  std::vector<std::vector<std::string>> table;
  table.push_back(names);
  for (const ResultRow& r : rows) table.push_back(row_fields(r, include_timing));

  std::vector<std::size_t> width(names.size(), 0);
  for (const auto& row : table) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      width[i] = std::max(width[i], row[i].size());
    }
  }
  auto print_row = [&](const std::vector<std::string>& row) {
    out << '|';
    for (std::size_t i = 0; i < row.size(); ++i) {
      out << ' ' << row[i] << std::string(width[i] - row[i].size(), ' ') << " |";
    }
    out << '\n';
  };
  print_row(table.front());
  out << '|';
  for (std::size_t i = 0; i < names.size(); ++i) {
    out << ' ' << std::string(width[i], '-') << " |";
  }
  out << '\n';
  for (std::size_t r = 1; r < table.size(); ++r) print_row(table[r]);
}

}  // namespace distkm
