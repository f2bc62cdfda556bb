#include "minsm/mcmc_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "minsm/errors.hpp"

namespace minsm {

namespace {

// Independent seeds for the chain RNG and each hash table family.
constexpr std::uint64_t kPointTableSalt = 0x70747473ULL;
constexpr std::uint64_t kCentroidTableSalt = 0x63656e74ULL;
constexpr std::uint64_t kInitSalt = 0x696e6974ULL;

PartitionState initial_state(const Dataset& data, const ChainConfig& config) {
  switch (config.init) {
    case InitMode::Singletons:
      return PartitionState::singletons(data);
    case InitMode::SingleCluster:
      return PartitionState::single_cluster(data);
    case InitMode::KMeans: {
      const std::vector<long> labels =
          kmeans_labels(data, config.init_clusters, mix64(config.seed ^ kInitSalt));
      return PartitionState(data, labels);
    }
  }
  throw std::invalid_argument("unknown initialization mode");
}

HashSpec minhash_unit_spec(std::uint64_t seed) {
  return HashSpec{HashFamily::WeightedMinHash, seed, 1, 1};
}

}  // namespace

std::string_view to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::Random: return "random";
    case Algorithm::Lshsm: return "lshsm";
    case Algorithm::MinSM: return "minsm";
  }
  return "unknown";
}

Algorithm algorithm_from_string(std::string_view name) {
  for (Algorithm a : {Algorithm::Random, Algorithm::Lshsm, Algorithm::MinSM}) {
    if (to_string(a) == name) {
      return a;
    }
  }
  throw std::invalid_argument("unknown algorithm '" + std::string(name) +
                              "' (expected random, lshsm or minsm)");
}

InitMode init_mode_from_string(std::string_view name) {
  if (name == "singletons") return InitMode::Singletons;
  if (name == "single") return InitMode::SingleCluster;
  if (name == "kmeans") return InitMode::KMeans;
  throw std::invalid_argument("unknown init mode '" + std::string(name) +
                              "' (expected singletons, single or kmeans)");
}

ChainConfig ChainConfig::defaults(Algorithm algorithm) {
  ChainConfig config;
  config.algorithm = algorithm;
  if (algorithm == Algorithm::Lshsm) {
    config.K = 10;
    config.L = 10;
  }
  return config;
}

void ChainConfig::validate() const {
  if (algorithm == Algorithm::MinSM && (K != 1 || L != 1)) {
    throw std::invalid_argument("MinSM requires K = 1 and L = 1 (got K = " + std::to_string(K) +
                                ", L = " + std::to_string(L) + ")");
  }
  if (K < 1 || L < 1) {
    throw std::invalid_argument("K and L must be positive");
  }
  if (algorithm == Algorithm::Lshsm && K > 64) {
    throw std::invalid_argument("sign random projection tables support at most 64 bits");
  }
  if (!(split_family_prob > 0.0 && split_family_prob < 1.0)) {
    throw std::invalid_argument("split family probability must lie strictly inside (0, 1)");
  }
  if (trace_stride == 0) {
    throw std::invalid_argument("trace stride must be positive");
  }
  if (algorithm == Algorithm::MinSM && hash_pool == 0) {
    throw std::invalid_argument("MinSM needs at least one hash table");
  }
  if (init == InitMode::KMeans && init_clusters == 0) {
    throw std::invalid_argument("k-means seeding needs at least one cluster");
  }
}

double SteadyClock::elapsed_ms() {
  const auto dt = std::chrono::steady_clock::now() - start_;
  return std::chrono::duration<double, std::milli>(dt).count();
}

double LogicalClock::elapsed_ms() {
  const double t = now_;
  now_ += tick_ms_;
  return t;
}

double acceptance_log_ratio(double log_L_ratio, double log_q_rev, double log_q_fwd) {
  const double sum = log_L_ratio + log_q_rev - log_q_fwd;
  if (std::isnan(sum)) {
    throw std::invalid_argument("acceptance ratio is NaN");
  }
  return std::min(0.0, sum);
}

double selection_log_prob(Algorithm algorithm, MoveKind kind, double split_family_prob) {
  const double split_family = std::log(split_family_prob);
  const double merge_family = std::log1p(-split_family_prob);
  switch (algorithm) {
    case Algorithm::Random:
      if (kind == MoveKind::DumbSplit) return split_family;
      if (kind == MoveKind::DumbMerge) return merge_family;
      break;
    case Algorithm::Lshsm:
      if (kind == MoveKind::SmartSplit || kind == MoveKind::DumbMerge) return split_family;
      if (kind == MoveKind::SmartMerge || kind == MoveKind::DumbSplit) return merge_family;
      break;
    case Algorithm::MinSM:
      // A fair inner coin picks smart vs dumb within each family.
      if (kind == MoveKind::SmartSplit || kind == MoveKind::DumbMerge) {
        return split_family - std::numbers::ln2;
      }
      if (kind == MoveKind::SmartMerge || kind == MoveKind::DumbSplit) {
        return merge_family - std::numbers::ln2;
      }
      break;
  }
  throw std::invalid_argument("move kind " + std::string(to_string(kind)) +
                              " is never selected by " + std::string(to_string(algorithm)));
}

LssTable build_centroid_table(const PartitionState& state, const HashSpec& spec) {
  LssTable table(spec, 2 * state.dim(), ItemKind::ClusterCentroid);
  for (ClusterId id : state.cluster_ids()) {
    const TransformedVector key = centroid_key(state, id);
    if (!all_zero(key)) {
      table.insert(to_underlying(id), key);
    }
  }
  return table;
}

void refresh_centroids(const PartitionState& state, LssTable& centroid_table,
                       const MoveEffect& effect) {
  for (ClusterId id : effect.removed) {
    if (state.has_cluster(id)) {
      throw ConsistencyError("cluster " + std::to_string(to_underlying(id)) +
                             " is reported retired but still live");
    }
    // Zero centroids are never indexed.
    if (centroid_table.contains(to_underlying(id))) {
      centroid_table.remove(to_underlying(id));
    }
  }
  for (ClusterId id : effect.added) {
    const TransformedVector key = centroid_key(state, id);
    if (!all_zero(key)) {
      centroid_table.insert(to_underlying(id), key);
    }
  }
  if (centroid_table.size() > state.num_clusters()) {
    throw ConsistencyError("centroid table out of step with the partition");
  }
}

std::vector<long> kmeans_labels(const Dataset& data, std::size_t k, std::uint64_t seed) {
  const std::size_t n = data.size();
  const std::size_t dim = data.dim();
  k = std::min(k, n);
  Rng rng(seed);
  auto sq_dist = [&](VectorView a, const double* b) {
    double d = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      d += (a[j] - b[j]) * (a[j] - b[j]);
    }
    return d;
  };

  // k-means++ seeding.
  std::vector<double> centers;
  centers.reserve(k * dim);
  const PointId first = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  centers.insert(centers.end(), data.point(first).begin(), data.point(first).end());
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  while (centers.size() < k * dim) {
    const double* last = centers.data() + centers.size() - dim;
    double total = 0.0;
    for (PointId i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], sq_dist(data.point(i), last));
      total += nearest[i];
    }
    PointId next = 0;
    if (total > 0.0) {
      double target = std::uniform_real_distribution<double>(0.0, total)(rng);
      for (; next + 1 < n; ++next) {
        target -= nearest[next];
        if (target <= 0.0) {
          break;
        }
      }
    } else {
      next = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    }
    centers.insert(centers.end(), data.point(next).begin(), data.point(next).end());
  }

  std::vector<long> labels(n, 0);
  for (int round = 0; round < 50; ++round) {
    bool changed = false;
    for (PointId i = 0; i < n; ++i) {
      long best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double d = sq_dist(data.point(i), centers.data() + c * dim);
        if (d < best_d) {
          best_d = d;
          best = static_cast<long>(c);
        }
      }
      if (labels[i] != best || round == 0) {
        changed = changed || labels[i] != best;
        labels[i] = best;
      }
    }
    std::vector<double> sums(k * dim, 0.0);
    std::vector<std::size_t> counts(k, 0);
    for (PointId i = 0; i < n; ++i) {
      const auto c = static_cast<std::size_t>(labels[i]);
      ++counts[c];
      for (std::size_t j = 0; j < dim; ++j) {
        sums[c * dim + j] += data.point(i)[j];
      }
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        for (std::size_t j = 0; j < dim; ++j) {
          centers[c * dim + j] = sums[c * dim + j] / static_cast<double>(counts[c]);
        }
      }
    }
    if (!changed && round > 0) {
      break;
    }
  }
  return labels;
}

Chain::Chain(const Dataset& data, ChainConfig config, Clock& clock)
    : data_(data),
      config_(std::move(config)),
      clock_(clock),
      hyper_(config_.hyper ? *config_.hyper : Hyperparams::defaults_for(data)),
      rng_(config_.seed),
      points_(data),
      state_(initial_state(data, config_)) {
  config_.validate();
  hyper_.validate(data.dim());

  switch (config_.algorithm) {
    case Algorithm::Random:
      break;
    case Algorithm::Lshsm:
      naive_.emplace(points_, HashSpec{HashFamily::SignRandomProjection,
                                       mix64(config_.seed ^ kPointTableSalt), config_.K,
                                       config_.L});
      break;
    case Algorithm::MinSM:
      for (std::size_t t = 0; t < config_.hash_pool; ++t) {
        const std::uint64_t salt = mix64(config_.seed ^ (kPointTableSalt + t));
        LssTable table(minhash_unit_spec(salt), 2 * data.dim(), ItemKind::DataPoint);
        for (PointId p = 0; p < data.size(); ++p) {
          if (!all_zero(points_.transformed(p))) {
            table.insert(p, points_.transformed(p));
          }
        }
        minhash_points_.push_back(std::move(table));
        centroids_.push_back(build_centroid_table(
            state_, minhash_unit_spec(mix64(config_.seed ^ (kCentroidTableSalt + t)))));
      }
      break;
  }

  log_likelihood_ = state_log_likelihood(state_, hyper_);
  TraceRecord init;
  init.iteration = 0;
  init.wall_time_ms = clock_.elapsed_ms();
  init.log_likelihood = log_likelihood_;
  init.n_clusters = state_.num_clusters();
  init.move_type = MoveKind::Init;
  trace_.push_back(init);
}

ProposalOutcome Chain::propose() {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const bool split_family = unit(rng_) < config_.split_family_prob;
  switch (config_.algorithm) {
    case Algorithm::Random:
      return split_family ? dumb_split(state_, rng_) : dumb_merge(state_, rng_);
    case Algorithm::Lshsm:
      return split_family ? naive_smart_split(state_, *naive_, rng_)
                          : naive_smart_merge(state_, *naive_, rng_);
    case Algorithm::MinSM: {
      const bool smart = unit(rng_) < 0.5;
      if (!smart) {
        return split_family ? dumb_merge(state_, rng_) : dumb_split(state_, rng_);
      }
      const std::size_t t =
          std::uniform_int_distribution<std::size_t>(0, config_.hash_pool - 1)(rng_);
      return split_family ? minsm_smart_split(state_, points_, minhash_points_[t], rng_)
                          : minsm_smart_merge(state_, centroids_[t], rng_);
    }
  }
  throw std::logic_error("unknown algorithm");
}

TraceRecord Chain::step() {
  ++iteration_;
  ProposalOutcome outcome = propose();

  TraceRecord record;
  record.iteration = iteration_;
  record.move_type = outcome.kind;
  record.acceptance_log_ratio = -std::numeric_limits<double>::infinity();

  if (!outcome.is_noop()) {
    const double log_L_ratio = log_likelihood_ratio(state_, outcome.move, hyper_);
    const double log_q_fwd =
        outcome.log_q_fwd + selection_log_prob(config_.algorithm, outcome.kind,
                                               config_.split_family_prob);
    const double log_q_rev =
        outcome.log_q_rev + selection_log_prob(config_.algorithm, outcome.reverse_kind,
                                               config_.split_family_prob);
    const double log_alpha = acceptance_log_ratio(log_L_ratio, log_q_rev, log_q_fwd);
    record.acceptance_log_ratio = log_alpha;
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
    if (std::log(u) < log_alpha) {
      const MoveEffect effect = state_.apply(outcome.move);
      log_likelihood_ += log_L_ratio;
      for (LssTable& table : centroids_) {
        refresh_centroids(state_, table, effect);
      }
      record.accepted = true;
    }
  }

  record.log_likelihood = log_likelihood_;
  record.n_clusters = state_.num_clusters();
  if (!std::isfinite(log_likelihood_)) {
    throw ConsistencyError("log-likelihood became non-finite at iteration " +
                           std::to_string(iteration_));
  }
  if (config_.audit_interval > 0 && iteration_ % config_.audit_interval == 0) {
    audit();
  }
  if (iteration_ % config_.trace_stride == 0) {
    record.wall_time_ms = clock_.elapsed_ms();
    trace_.push_back(record);
  }
  return record;
}

void Chain::run() {
  while (iteration_ < config_.iterations) {
    step();
  }
}

void Chain::audit() const {
  audit_state(state_, data_);
  const double fresh = state_log_likelihood(state_, hyper_);
  if (std::abs(fresh - log_likelihood_) > 1e-6 * (1.0 + std::abs(fresh))) {
    throw ConsistencyError("cached log-likelihood " + std::to_string(log_likelihood_) +
                           " differs from recomputed " + std::to_string(fresh));
  }
  for (const LssTable& table : centroids_) {
    std::size_t indexed = 0;
    for (ClusterId id : state_.cluster_ids()) {
      const ItemId item = to_underlying(id);
      const TransformedVector key = centroid_key(state_, id);
      if (all_zero(key)) {
        if (table.contains(item)) {
          throw ConsistencyError("zero centroid of cluster " + std::to_string(item) + " is indexed");
        }
        continue;
      }
      ++indexed;
      if (!table.contains(item) || table.code_of(item, 0) != table.hash(key, 0)) {
        throw ConsistencyError("centroid entry for cluster " + std::to_string(item) +
                               " is missing or stale");
      }
    }
    if (table.size() != indexed) {
      throw ConsistencyError("centroid table size differs from the nonzero centroid count");
    }
  }
}

ChainResult run_chain(const Dataset& data, const ChainConfig& config, Clock& clock) {
  Chain chain(data, config, clock);
  chain.run();
  return ChainResult{chain.state(), chain.trace()};
}

ChainResult run_chain(const Dataset& data, const ChainConfig& config) {
  SteadyClock clock;
  return run_chain(data, config, clock);
}

}  // namespace minsm
