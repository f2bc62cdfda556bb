#include <CLI11.hpp>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <iostream>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "minsm/evaluation.hpp"
#include "minsm/io.hpp"
#include "minsm/mcmc_engine.hpp"
#include "minsm/proposals.hpp"

namespace {

using namespace minsm;

struct RunOptions {
  std::string data;
  bool labels = false;
  std::string algo = "minsm";
  std::size_t iters = 1000;
  std::uint64_t seed = 1;
  int K = -1;
  int L = -1;
  double mix = 0.5;
  std::size_t stride = 1;
  std::string init = "singletons";
  std::size_t init_clusters = 10;
  std::size_t hash_pool = 32;
  std::string clock = "wall";
  std::string trace;
  std::string state;
  std::string metrics;
};

int run_command(const RunOptions& opt) {
  const Dataset data = load_csv(opt.data, opt.labels);
  ChainConfig config = ChainConfig::defaults(algorithm_from_string(opt.algo));
  config.iterations = opt.iters;
  config.seed = opt.seed;
  if (opt.K >= 0) config.K = opt.K;
  if (opt.L >= 0) config.L = opt.L;
  config.split_family_prob = opt.mix;
  config.trace_stride = opt.stride;
  config.init = init_mode_from_string(opt.init);
  config.init_clusters = opt.init_clusters;
  config.hash_pool = opt.hash_pool;
  config.validate();

  std::unique_ptr<Clock> clock;
  if (opt.clock == "wall") {
    clock = std::make_unique<SteadyClock>();
  } else if (opt.clock == "logical") {
    clock = std::make_unique<LogicalClock>();
  } else {
    throw std::invalid_argument("unknown clock '" + opt.clock + "' (expected wall or logical)");
  }

  spdlog::info("running {} on {} points in {} dimensions for {} iterations", opt.algo,
               data.size(), data.dim(), opt.iters);
  Chain chain(data, config, *clock);
  chain.run();
  chain.audit();

  const ConvergenceSummary summary = convergence_summary(chain.trace());
  Metrics metrics;
  metrics["algorithm"] = std::string(to_string(config.algorithm));
  metrics["iterations"] = std::to_string(config.iterations);
  metrics["seed"] = std::to_string(config.seed);
  metrics["K"] = std::to_string(config.K);
  metrics["L"] = std::to_string(config.L);
  metrics["final_log_likelihood"] = format_double(chain.log_likelihood());
  metrics["final_clusters"] = std::to_string(chain.state().num_clusters());
  metrics["plateau_log_likelihood"] = format_double(summary.plateau);
  metrics["time_to_plateau_ms"] = format_double(summary.time_to_plateau_ms);
  metrics["acceptance_rate"] = format_double(summary.acceptance_rate);
  if (data.labels()) {
    const Labeling predicted = chain.state().canonical_labels();
    metrics["nmi"] = format_double(nmi(predicted, *data.labels()));
    metrics["accuracy"] = format_double(accuracy(predicted, *data.labels()));
  }

  if (!opt.trace.empty()) write_trace(chain.trace(), opt.trace);
  if (!opt.state.empty()) write_state(chain.state(), opt.state);
  if (!opt.metrics.empty()) {
    write_metrics(metrics, opt.metrics);
  } else {
    for (const auto& [key, value] : metrics) {
      std::cout << key << '=' << value << '\n';
    }
  }
  return 0;
}

int evaluate_command(const std::string& state_path, const std::string& data_path) {
  const Labeling predicted = read_state(state_path);
  const Dataset data = load_csv(data_path, /*has_labels=*/true);
  std::cout << "nmi=" << format_double(nmi(predicted, *data.labels())) << '\n'
            << "accuracy=" << format_double(accuracy(predicted, *data.labels())) << '\n';
  return 0;
}

template <typename F>
double median_seconds(int repeats, F&& f) {
  std::vector<double> times;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  std::nth_element(times.begin(), times.begin() + times.size() / 2, times.end());
  return times[times.size() / 2];
}

// Times the split transition probability of one cluster of each size, divided
// in half, for the MinHash and the naive formulas.
int bench_command(const std::vector<std::size_t>& sizes, std::size_t dim, int repeats,
                  std::uint64_t seed, bool skip_naive_above, std::size_t naive_limit) {
  std::cout << "cluster_size,minsm_seconds,naive_seconds\n";
  for (std::size_t size : sizes) {
    SyntheticSpec spec;
    spec.k = 1;
    spec.n = size;
    spec.dim = dim;
    spec.seed = seed;
    const Dataset data = generate_synthetic(spec);
    const PointVectors points(data);
    std::vector<PointId> ids(size);
    std::iota(ids.begin(), ids.end(), PointId{0});
    const std::span<const PointId> all(ids);
    const auto left = all.first(size / 2);
    const auto right = all.subspan(size / 2);
    volatile double sink = 0.0;
    const double t_min = median_seconds(repeats, [&] {
      sink = sink + minsm_split_log_prob(points, left, right, size / 2);
    });
    std::string naive = "NA";
    if (!(skip_naive_above && size > naive_limit)) {
      const NaiveLshIndex index(points, HashSpec{HashFamily::SignRandomProjection, seed, 10, 10});
      naive = format_double(median_seconds(repeats, [&] {
        sink = sink + naive_split_log_prob(index, left, right);
      }));
    }
    std::cout << size << ',' << format_double(t_min) << ',' << naive << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("minsm"));
  spdlog::set_level(spdlog::level::warn);
  if (const char* level = std::getenv("MINSM_LOG_LEVEL")) {
    spdlog::set_level(spdlog::level::from_str(level));
  }

  CLI::App app{"Split-merge MCMC clustering with weighted MinHash proposals"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("generate", "Write a synthetic Gaussian mixture as CSV");
  SyntheticSpec spec;
  std::string gen_out;
  gen->add_option("--k", spec.k, "Number of components")->capture_default_str();
  gen->add_option("--n", spec.n, "Number of points")->capture_default_str();
  gen->add_option("--d", spec.dim, "Dimensionality")->capture_default_str();
  gen->add_option("--seed", spec.seed, "RNG seed")->capture_default_str();
  gen->add_option("--out", gen_out, "Output CSV (label in the last column)")->required();

  auto* run = app.add_subcommand("run", "Run one chain");
  RunOptions ro;
  run->add_option("--data", ro.data, "Input CSV")->required()->check(CLI::ExistingFile);
  run->add_flag("--labels", ro.labels, "Last CSV column is a ground-truth label");
  run->add_option("--algo", ro.algo, "random, lshsm or minsm")
      ->check(CLI::IsMember({"random", "lshsm", "minsm"}))
      ->capture_default_str();
  run->add_option("--iters", ro.iters, "Iterations")->capture_default_str();
  run->add_option("--seed", ro.seed, "RNG seed")->capture_default_str();
  run->add_option("--k", ro.K, "Hash bits per table (lshsm default 10, minsm 1)");
  run->add_option("--l", ro.L, "Number of tables (lshsm default 10, minsm 1)");
  run->add_option("--mix", ro.mix, "Probability of the split-family move")->capture_default_str();
  run->add_option("--stride", ro.stride, "Trace every n-th iteration")->capture_default_str();
  run->add_option("--init", ro.init, "singletons, single or kmeans")->capture_default_str();
  run->add_option("--init-clusters", ro.init_clusters, "k for kmeans initialization")
      ->capture_default_str();
  run->add_option("--hash-pool", ro.hash_pool, "Independent MinHash tables per chain (minsm)")
      ->capture_default_str();
  run->add_option("--clock", ro.clock, "wall or logical (one tick per trace record)")
      ->capture_default_str();
  run->add_option("--trace", ro.trace, "Trace CSV output");
  run->add_option("--state", ro.state, "Final assignment output");
  run->add_option("--metrics", ro.metrics, "key=value summary output (stdout if omitted)");

  auto* eval = app.add_subcommand("evaluate", "NMI and accuracy of a state dump");
  std::string eval_state;
  std::string eval_data;
  eval->add_option("--state", eval_state, "State file from run --state")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--data", eval_data, "Labeled CSV")->required()->check(CLI::ExistingFile);

  auto* bench = app.add_subcommand("bench", "Time split transition probabilities by cluster size");
  std::vector<std::size_t> sizes{100, 1000, 10000};
  std::size_t bench_dim = 25;
  int repeats = 5;
  std::uint64_t bench_seed = 1;
  std::size_t naive_limit = 0;
  bench->add_option("--sizes", sizes, "Cluster sizes")->capture_default_str();
  bench->add_option("--d", bench_dim, "Dimensionality")->capture_default_str();
  bench->add_option("--repeats", repeats, "Timed repetitions (median reported)")
      ->capture_default_str();
  bench->add_option("--seed", bench_seed, "RNG seed")->capture_default_str();
  bench->add_option("--naive-limit", naive_limit, "Skip the naive formula above this size");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      write_csv(generate_synthetic(spec), gen_out);
      return 0;
    }
    if (*run) {
      return run_command(ro);
    }
    if (*eval) {
      return evaluate_command(eval_state, eval_data);
    }
    if (*bench) {
      if (repeats < 1) throw std::invalid_argument("repeats must be positive");
      return bench_command(sizes, bench_dim, repeats, bench_seed, naive_limit > 0, naive_limit);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
