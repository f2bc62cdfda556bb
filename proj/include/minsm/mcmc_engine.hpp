#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "minsm/dataset.hpp"
#include "minsm/lss_table.hpp"
#include "minsm/mixture_model.hpp"
#include "minsm/proposals.hpp"

namespace minsm {

enum class Algorithm { Random, Lshsm, MinSM };
enum class InitMode { Singletons, SingleCluster, KMeans };

std::string_view to_string(Algorithm algorithm);
Algorithm algorithm_from_string(std::string_view name);
InitMode init_mode_from_string(std::string_view name);

struct ChainConfig {
  Algorithm algorithm = Algorithm::MinSM;
  std::size_t iterations = 1000;
  std::uint64_t seed = 1;
  int K = 1;
  int L = 1;
  /// Defaults to Hyperparams::defaults_for(data) when unset.
  std::optional<Hyperparams> hyper;
  /// Probability of the split-family move (smart split / dumb merge for the
  /// hashing algorithms, dumb split for Random).
  double split_family_prob = 0.5;
  std::size_t trace_stride = 1;
  InitMode init = InitMode::Singletons;
  std::size_t init_clusters = 10;  // k-means seeding only
  std::size_t audit_interval = 10000;  // 0 disables periodic audits
  /// MinSM builds this many independent single-hash point and centroid tables
  /// and draws one per smart move, so a cluster is not stuck with the splits a
  /// single fixed hash allows.
  std::size_t hash_pool = 32;

  /// LSHSM defaults to K = L = 10; MinSM is fixed at K = L = 1.
  static ChainConfig defaults(Algorithm algorithm);
  void validate() const;
};

struct TraceRecord {
  std::size_t iteration = 0;
  double wall_time_ms = 0.0;
  double log_likelihood = 0.0;
  std::size_t n_clusters = 0;
  MoveKind move_type = MoveKind::Init;
  bool accepted = false;
  double acceptance_log_ratio = 0.0;
};

/// Source of trace timestamps, in milliseconds since the chain started.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual double elapsed_ms() = 0;
};

class SteadyClock final : public Clock {
 public:
  SteadyClock() : start_(std::chrono::steady_clock::now()) {}
  double elapsed_ms() override;

 private:
  std::chrono::steady_clock::time_point start_;
};

/// Advances by a fixed tick per reading; traces become reproducible byte for byte.
class LogicalClock final : public Clock {
 public:
  explicit LogicalClock(double tick_ms = 1.0) : tick_ms_(tick_ms) {}
  double elapsed_ms() override;

 private:
  double tick_ms_;
  double now_ = 0.0;
};

/// min(0, log_L_ratio + log_q_rev - log_q_fwd)
double acceptance_log_ratio(double log_L_ratio, double log_q_rev, double log_q_fwd);

/// Log probability that the chain's move-family coins select the kernel producing `kind`.
double selection_log_prob(Algorithm algorithm, MoveKind kind, double split_family_prob);

/// Drops the centroids of removed clusters and indexes the added ones. An
/// all-zero centroid has no MinHash code and is never indexed.
void refresh_centroids(const PartitionState& state, LssTable& centroid_table,
                       const MoveEffect& effect);

LssTable build_centroid_table(const PartitionState& state, const HashSpec& spec);

std::vector<long> kmeans_labels(const Dataset& data, std::size_t k, std::uint64_t seed);

/// One Metropolis-Hastings chain: owns its state, RNG and (for MinSM) the
/// centroid table. Point tables are built once and never mutated.
class Chain {
 public:
  Chain(const Dataset& data, ChainConfig config, Clock& clock);

  /// One proposal plus accept/reject. The returned record is appended to the
  /// trace when the iteration falls on the trace stride.
  TraceRecord step();
  void run();

  const PartitionState& state() const { return state_; }
  double log_likelihood() const { return log_likelihood_; }
  const std::vector<TraceRecord>& trace() const { return trace_; }
  const ChainConfig& config() const { return config_; }
  const Hyperparams& hyper() const { return hyper_; }
  const std::vector<LssTable>& centroid_tables() const { return centroids_; }
  std::size_t iteration() const { return iteration_; }

  /// Throws ConsistencyError if state, cached likelihood or tables disagree.
  void audit() const;

 private:
  ProposalOutcome propose();

  const Dataset& data_;
  ChainConfig config_;
  Clock& clock_;
  Hyperparams hyper_;
  Rng rng_;
  PointVectors points_;
  PartitionState state_;
  double log_likelihood_ = 0.0;
  std::size_t iteration_ = 0;
  std::optional<NaiveLshIndex> naive_;
  std::vector<LssTable> minhash_points_;
  std::vector<LssTable> centroids_;
  std::vector<TraceRecord> trace_;
};

struct ChainResult {
  PartitionState state;
  std::vector<TraceRecord> trace;
};

ChainResult run_chain(const Dataset& data, const ChainConfig& config, Clock& clock);
ChainResult run_chain(const Dataset& data, const ChainConfig& config);

}  // namespace minsm
