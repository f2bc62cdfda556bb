#pragma once

#include <cstddef>
#include <span>
#include <unordered_map>
#include <vector>

#include "minsm/dataset.hpp"
#include "minsm/move.hpp"

namespace minsm {

/// Additive sufficient statistics of a diagonal Gaussian cluster.
struct GaussianStats {
  std::size_t count = 0;
  std::vector<double> sum;
  std::vector<double> sum_sq;

  explicit GaussianStats(std::size_t dim = 0) : sum(dim, 0.0), sum_sq(dim, 0.0) {}

  void add(VectorView x);
  GaussianStats& operator+=(const GaussianStats& other);
  GaussianStats& operator-=(const GaussianStats& other);

  static GaussianStats of(const Dataset& data, std::span<const PointId> members);
};

/// Diagonal normal-inverse-gamma prior, independent across dimensions.
struct Hyperparams {
  std::vector<double> mean0;
  double kappa0 = 0.01;
  double alpha0 = 1.0;
  std::vector<double> beta0;

  /// mean0 = data mean, kappa0 = 0.01, alpha0 = 1, beta0 = per-dimension data
  /// variance (1 where the variance vanishes).
  static Hyperparams defaults_for(const Dataset& data);
  void validate(std::size_t dim) const;
};

/// Collapsed log marginal likelihood of the cluster's points.
double cluster_log_marginal(const GaussianStats& stats, const Hyperparams& hyper);

struct Cluster {
  std::vector<PointId> members;
  GaussianStats stats;
};

/// Which clusters an applied move destroyed and created.
struct MoveEffect {
  std::vector<ClusterId> removed;
  std::vector<ClusterId> added;
};

/// Assignment of every point to exactly one nonempty cluster. Cluster ids are
/// never reused; splits and merges retire their inputs and mint fresh ids.
/// Holds a reference to the dataset, which must outlive the state.
class PartitionState {
 public:
  PartitionState(const Dataset& data, std::span<const long> labels);

  static PartitionState singletons(const Dataset& data);
  static PartitionState single_cluster(const Dataset& data);

  std::size_t num_points() const { return assignment_.size(); }
  std::size_t num_clusters() const { return order_.size(); }
  std::size_t dim() const { return dim_; }
  const Dataset& data() const { return *data_; }

  /// Live cluster ids in a deterministic order, for uniform selection by index.
  const std::vector<ClusterId>& cluster_ids() const { return order_; }
  bool has_cluster(ClusterId id) const { return clusters_.contains(id); }
  const Cluster& cluster(ClusterId id) const;
  ClusterId cluster_of(PointId p) const { return assignment_.at(p); }

  /// Throws std::invalid_argument if the move does not apply to this state.
  void validate(const Move& move) const;
  MoveEffect apply(const Move& move);

  /// Cluster index per point, in first-appearance order (restricted growth).
  std::vector<long> canonical_labels() const;

 private:
  ClusterId add_cluster(Cluster cluster);
  void drop_cluster(ClusterId id);

  std::size_t dim_;
  std::uint64_t next_id_ = 0;
  std::vector<ClusterId> assignment_;
  std::unordered_map<ClusterId, Cluster> clusters_;
  std::vector<ClusterId> order_;
  std::unordered_map<ClusterId, std::size_t> position_;
  const Dataset* data_;
};

double state_log_likelihood(const PartitionState& state, const Hyperparams& hyper);

/// log L(after) - log L(before), touching only the clusters the move changes.
double log_likelihood_ratio(const PartitionState& state, const Move& move,
                            const Hyperparams& hyper);

PartitionState apply_move(PartitionState state, const Move& move);

FeatureVector centroid(const PartitionState& state, ClusterId id);

/// Re-derives membership and statistics from scratch; throws
/// ConsistencyError on any mismatch.
void audit_state(const PartitionState& state, const Dataset& data);

}  // namespace minsm
