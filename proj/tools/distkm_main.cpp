// Command-line front end: `run` executes a seeded experiment and emits a
// result table, `gen` writes a synthetic dataset to CSV, `constants` prints
// the derived coordinator constants for a parameter combination.

#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "distkm/datagen.hpp"
#include "distkm/harness.hpp"
#include "distkm/soccer.hpp"

namespace {

using namespace distkm;

int cmd_constants(int k, double delta, double epsilon, std::int64_t n,
                  const std::string& mode) {
  SoccerParams params;
  params.k = k;
  params.delta = delta;
  params.epsilon = epsilon;
  params.constants_mode =
      mode == "theory" ? ConstantsMode::kTheory : ConstantsMode::kExperiment;
  const DerivedConstants c = derive_constants(params, n);
  std::cout.precision(10);
  std::cout << "log_arg " << c.log_arg << "\n"
            << "eta " << c.eta << "\n"
            << "p1_size " << c.p1_size() << "\n"
            << "d_k " << c.d_k << "\n"
            << "k_plus " << c.k_plus << "\n"
            << "truncation_count " << c.truncation_count(k) << "\n";
  return 0;
}

ConstantsMode parse_constants_mode(const std::string& s) {
  if (s == "experiment") return ConstantsMode::kExperiment;
  if (s == "theory") return ConstantsMode::kTheory;
  throw CLI::ValidationError("--constants-mode must be experiment or theory");
}

SamplingMode parse_sampling_mode(const std::string& s) {
  if (s == "exact_fraction") return SamplingMode::kExactFraction;
  if (s == "bernoulli") return SamplingMode::kBernoulli;
  throw CLI::ValidationError("--sampling-mode must be exact_fraction or bernoulli");
}

// Plain key=value config file; '#' starts a comment. Command-line flags
// override file values, so entries apply only to options not already given.
std::map<std::string, std::string> load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    if (!key.empty()) kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

template <class T>
void set_from(const std::string& text, T& target) {
  if constexpr (std::is_same_v<T, std::string>) {
    target = text;
  } else if constexpr (std::is_same_v<T, bool>) {
    target = text == "1" || text == "true" || text == "yes";
  } else if constexpr (std::is_floating_point_v<T>) {
    target = std::stod(text);
  } else {
    target = static_cast<T>(std::stoll(text));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coordinator-model distributed k-means workbench"};
  app.require_subcommand(1);

  // --- constants ---
  auto* constants = app.add_subcommand(
      "constants", "print derived constants (eta, d_k, k_plus) for k/delta/epsilon/n");
  int c_k = 25;
  double c_delta = 0.1, c_epsilon = 0.1;
  std::int64_t c_n = 10000000;
  std::string c_mode = "experiment";
  constants->add_option("--k", c_k, "number of centers")->required();
  constants->add_option("--delta", c_delta, "confidence parameter");
  constants->add_option("--epsilon", c_epsilon, "coordinator parameter")->required();
  constants->add_option("--n", c_n, "dataset size")->required();
  constants->add_option("--constants-mode", c_mode, "experiment | theory");

  // --- gen ---
  auto* gen = app.add_subcommand("gen", "generate a synthetic dataset as CSV");
  bool g_gaussian = false, g_hard = false;
  GaussianMixtureSpec g_gauss;
  g_gauss.n = 100000;
  HardInstanceSpec g_hardspec;
  g_hardspec.z = 1;
  std::uint64_t g_seed = 1;
  std::string g_out, g_centers_out;
  gen->add_flag("--gaussian", g_gaussian, "Zipf-weighted spherical Gaussian mixture");
  gen->add_flag("--hard-instance", g_hard, "duplicated multiset with optimal cost zero");
  gen->add_option("--k", g_gauss.k, "components / distinct locations");
  gen->add_option("--n", g_gauss.n, "points (gaussian)");
  gen->add_option("--dim", g_gauss.dim, "dimension (gaussian)");
  gen->add_option("--sigma", g_gauss.sigma, "isotropic std (gaussian)");
  gen->add_option("--zipf-gamma", g_gauss.zipf_gamma, "Zipf exponent (gaussian)");
  gen->add_option("--cube-side", g_gauss.cube_side, "mean cube side (gaussian)");
  gen->add_option("--z", g_hardspec.z, "block duplication (hard instance)");
  gen->add_option("--separation", g_hardspec.separation, "location separation (hard instance)");
  gen->add_option("--seed", g_seed, "generator seed");
  gen->add_option("--out", g_out, "output CSV (stdout when omitted)");
  gen->add_option("--centers-out", g_centers_out, "also write the planted centers");

  // --- run ---
  auto* run = app.add_subcommand("run", "run a seeded, repeated experiment");
  ExperimentConfig cfg;
  std::string r_dataset = "gaussian", r_algo = "soccer";
  std::string r_cmode = "experiment", r_smode = "exact_fraction";
  std::string r_out, r_format = "csv";
  bool r_no_timing = false, r_parallel = false, r_work_counter = false;
  bool r_csv_header = false;
  std::string r_config;
  cfg.k = 0;  // sentinel: must come from a flag or the config file
  run->add_option("--config", r_config, "key=value config file (flags override)");
  run->add_option("--dataset", r_dataset, "gaussian | hard | path to CSV");
  run->add_option("--algo", r_algo, "soccer | kmeans_parallel");
  run->add_option("--k", cfg.k, "number of centers");
  run->add_option("--epsilon", cfg.epsilon, "coordinator parameter (soccer)");
  run->add_option("--delta", cfg.delta, "confidence parameter (soccer)");
  run->add_option("--rounds", cfg.rounds, "rounds r (kmeans_parallel)");
  run->add_option("--oversampling", cfg.oversampling, "l per round (kmeans_parallel; 0 = 2k)");
  run->add_option("--machines", cfg.machines, "machine count m");
  run->add_option("--reps", cfg.repetitions, "repetitions");
  run->add_option("--seed", cfg.master_seed, "master seed");
  run->add_option("--constants-mode", r_cmode, "experiment | theory");
  run->add_option("--sampling-mode", r_smode, "exact_fraction | bernoulli");
  run->add_option("--out", r_out, "output file (stdout when omitted)");
  run->add_option("--format", r_format, "csv | markdown");
  run->add_flag("--no-timing", r_no_timing, "omit timing columns (byte-stable output)");
  run->add_flag("--parallel-machines", r_parallel, "execute machine closures on threads");
  run->add_flag("--work-counter", r_work_counter, "count distance evaluations instead of seconds");
  run->add_flag("--csv-header", r_csv_header, "input CSV has a header row");
  run->add_option("--n", cfg.gauss.n, "points (generated datasets)");
  run->add_option("--dim", cfg.gauss.dim, "dimension (gaussian)");
  run->add_option("--sigma", cfg.gauss.sigma, "isotropic std (gaussian)");
  run->add_option("--zipf-gamma", cfg.gauss.zipf_gamma, "Zipf exponent (gaussian)");
  run->add_option("--cube-side", cfg.gauss.cube_side, "mean cube side (gaussian)");
  run->add_option("--z", cfg.hard.z, "block duplication (hard instance)");
  run->add_option("--separation", cfg.hard.separation, "location separation (hard instance)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (constants->parsed()) {
      return cmd_constants(c_k, c_delta, c_epsilon, c_n, c_mode);
    }

    if (gen->parsed()) {
      if (g_gaussian == g_hard) {
        std::cerr << "gen: pass exactly one of --gaussian / --hard-instance\n";
        return 1;
      }
      PlantedDataset data;
      if (g_gaussian) {
        g_gauss.seed = g_seed;
        data = gen_gaussian_mixture(g_gauss);
      } else {
        g_hardspec.k = g_gauss.k;
        data = gen_hard_instance(g_hardspec);
      }
      if (g_out.empty()) {
        std::cout.precision(17);
        for (std::size_t i = 0; i < data.points.size(); ++i) {
          const auto p = data.points[i];
          for (std::size_t j = 0; j < p.size(); ++j) {
            if (j) std::cout << ',';
            std::cout << p[j];
          }
          std::cout << '\n';
        }
      } else {
        write_csv(data.points, g_out);
        std::cerr << "wrote " << data.points.size() << " points to " << g_out << "\n";
      }
      if (!g_centers_out.empty()) write_csv(data.planted_centers, g_centers_out);
      return 0;
    }

    // run
    if (!r_config.empty()) {
      const auto kv = load_config_file(r_config);
      const auto apply = [&](const char* flag, const char* key, auto& target) {
        const auto it = kv.find(key);
        if (it != kv.end() && run->count(flag) == 0) set_from(it->second, target);
      };
      apply("--dataset", "dataset", r_dataset);
      apply("--algo", "algo", r_algo);
      apply("--k", "k", cfg.k);
      apply("--epsilon", "epsilon", cfg.epsilon);
      apply("--delta", "delta", cfg.delta);
      apply("--rounds", "rounds", cfg.rounds);
      apply("--oversampling", "oversampling", cfg.oversampling);
      apply("--machines", "machines", cfg.machines);
      apply("--reps", "reps", cfg.repetitions);
      apply("--seed", "seed", cfg.master_seed);
      apply("--constants-mode", "constants-mode", r_cmode);
      apply("--sampling-mode", "sampling-mode", r_smode);
      apply("--out", "out", r_out);
      apply("--format", "format", r_format);
      apply("--no-timing", "no-timing", r_no_timing);
      apply("--parallel-machines", "parallel-machines", r_parallel);
      apply("--work-counter", "work-counter", r_work_counter);
      apply("--csv-header", "csv-header", r_csv_header);
      apply("--n", "n", cfg.gauss.n);
      apply("--dim", "dim", cfg.gauss.dim);
      apply("--sigma", "sigma", cfg.gauss.sigma);
      apply("--zipf-gamma", "zipf-gamma", cfg.gauss.zipf_gamma);
      apply("--cube-side", "cube-side", cfg.gauss.cube_side);
      apply("--z", "z", cfg.hard.z);
      apply("--separation", "separation", cfg.hard.separation);
    }
    if (cfg.k < 2) {
      std::cerr << "run: --k is required (>= 2), via flag or config file\n"
                << run->help();
      return 1;
    }
    if (r_dataset == "gaussian") {
      cfg.dataset_kind = DatasetKind::kGaussian;
      cfg.dataset_label = "gaussian";
      cfg.gauss.k = cfg.k;
    } else if (r_dataset == "hard") {
      cfg.dataset_kind = DatasetKind::kHardInstance;
      cfg.dataset_label = "hard";
      cfg.hard.k = cfg.k;
    } else {
      cfg.dataset_kind = DatasetKind::kCsv;
      cfg.csv_path = r_dataset;
      cfg.csv.header = r_csv_header;
      const auto slash = r_dataset.find_last_of('/');
      cfg.dataset_label =
          slash == std::string::npos ? r_dataset : r_dataset.substr(slash + 1);
    }
    if (r_algo == "soccer") {
      cfg.algo = Algo::kSoccer;
    } else if (r_algo == "kmeans_parallel") {
      cfg.algo = Algo::kKmeansParallel;
    } else {
      std::cerr << "run: unknown --algo " << r_algo << "\n";
      return 1;
    }
    cfg.constants_mode = parse_constants_mode(r_cmode);
    cfg.sampling_mode = parse_sampling_mode(r_smode);
    cfg.exec = r_parallel ? ExecMode::kParallel : ExecMode::kSerial;
    cfg.time_mode = r_work_counter ? TimeMode::kWorkCounter : TimeMode::kWallClock;

    const ExperimentResult result = run_experiment(cfg);
    std::vector<ResultRow> rows = result.per_rep;
    rows.push_back(result.aggregate);

    std::ofstream file;
    std::ostream* out = &std::cout;
    if (!r_out.empty()) {
      file.open(r_out);
      if (!file) {
        std::cerr << "run: cannot write " << r_out << "\n";
        return 1;
      }
      out = &file;
    }
    if (r_format == "markdown") {
      emit_markdown(rows, *out, !r_no_timing);
    } else if (r_format == "csv") {
      emit_csv(rows, *out, !r_no_timing);
    } else {
      std::cerr << "run: unknown --format " << r_format << "\n";
      return 1;
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
