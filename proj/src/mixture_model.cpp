#include "minsm/mixture_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <unordered_set>

#include "minsm/errors.hpp"

namespace minsm {

void GaussianStats::add(VectorView x) {
  ++count;
  for (std::size_t j = 0; j < x.size(); ++j) {
    sum[j] += x[j];
    sum_sq[j] += x[j] * x[j];
  }
}

GaussianStats& GaussianStats::operator+=(const GaussianStats& other) {
  count += other.count;
  for (std::size_t j = 0; j < sum.size(); ++j) {
    sum[j] += other.sum[j];
    sum_sq[j] += other.sum_sq[j];
  }
  return *this;
}

GaussianStats& GaussianStats::operator-=(const GaussianStats& other) {
  count -= other.count;
  for (std::size_t j = 0; j < sum.size(); ++j) {
    sum[j] -= other.sum[j];
    sum_sq[j] -= other.sum_sq[j];
  }
  return *this;
}

GaussianStats GaussianStats::of(const Dataset& data, std::span<const PointId> members) {
  GaussianStats stats(data.dim());
  for (PointId p : members) {
    stats.add(data.point(p));
  }
  return stats;
}

Hyperparams Hyperparams::defaults_for(const Dataset& data) {
  const std::size_t dim = data.dim();
  const auto n = static_cast<double>(data.size());
  Hyperparams h;
  h.mean0.assign(dim, 0.0);
  h.beta0.assign(dim, 0.0);
  for (PointId i = 0; i < data.size(); ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      h.mean0[j] += data.point(i)[j];
    }
  }
  for (double& m : h.mean0) {
    m /= n;
  }
  for (PointId i = 0; i < data.size(); ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      const double d = data.point(i)[j] - h.mean0[j];
      h.beta0[j] += d * d;
    }
  }
  for (double& b : h.beta0) {
    b /= n;
    if (!(b > 0.0)) {
      b = 1.0;
    }
  }
  return h;
}

void Hyperparams::validate(std::size_t dim) const {
  if (mean0.size() != dim || beta0.size() != dim) {
    throw std::invalid_argument("hyperparameter dimensionality does not match the data");
  }
  if (!(kappa0 > 0.0) || !(alpha0 > 0.0) ||
      !std::all_of(beta0.begin(), beta0.end(), [](double b) { return b > 0.0; }) ||
      !std::all_of(mean0.begin(), mean0.end(), [](double m) { return std::isfinite(m); })) {
    throw std::invalid_argument("hyperparameters require kappa0, alpha0, beta0 > 0");
  }
}

double cluster_log_marginal(const GaussianStats& stats, const Hyperparams& hyper) {
  if (stats.count == 0) {
    throw std::invalid_argument("log marginal of an empty cluster");
  }
  if (!(hyper.kappa0 > 0.0) || !(hyper.alpha0 > 0.0) || hyper.beta0.size() != stats.sum.size() ||
      hyper.mean0.size() != stats.sum.size()) {
    throw std::invalid_argument("invalid hyperparameters for cluster log marginal");
  }
  const auto n = static_cast<double>(stats.count);
  const double kappa_n = hyper.kappa0 + n;
  const double alpha_n = hyper.alpha0 + 0.5 * n;
  const double per_dim_const = std::lgamma(alpha_n) - std::lgamma(hyper.alpha0) +
                               0.5 * std::log(hyper.kappa0 / kappa_n) -
                               0.5 * n * std::log(2.0 * std::numbers::pi);
  double total = 0.0;
  for (std::size_t j = 0; j < stats.sum.size(); ++j) {
    const double mean = stats.sum[j] / n;
    const double scatter = std::max(0.0, stats.sum_sq[j] - stats.sum[j] * mean);
    const double offset = mean - hyper.mean0[j];
    const double beta_n =
        hyper.beta0[j] + 0.5 * scatter + hyper.kappa0 * n * offset * offset / (2.0 * kappa_n);
    total += per_dim_const + hyper.alpha0 * std::log(hyper.beta0[j]) - alpha_n * std::log(beta_n);
  }
  return total;
}

PartitionState::PartitionState(const Dataset& data, std::span<const long> labels)
    : dim_(data.dim()), assignment_(data.size()), data_(&data) {
  if (labels.size() != data.size()) {
    throw std::invalid_argument("initial labeling has " + std::to_string(labels.size()) +
                                " entries for " + std::to_string(data.size()) + " points");
  }
  std::unordered_map<long, std::vector<PointId>> groups;
  std::vector<long> first_seen;
  for (PointId p = 0; p < labels.size(); ++p) {
    auto [it, fresh] = groups.try_emplace(labels[p]);
    if (fresh) {
      first_seen.push_back(labels[p]);
    }
    it->second.push_back(p);
  }
  for (long label : first_seen) {
    std::vector<PointId>& members = groups[label];
    GaussianStats stats = GaussianStats::of(data, members);
    add_cluster(Cluster{std::move(members), std::move(stats)});
  }
}

PartitionState PartitionState::singletons(const Dataset& data) {
  std::vector<long> labels(data.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    labels[i] = static_cast<long>(i);
  }
  return PartitionState(data, labels);
}

PartitionState PartitionState::single_cluster(const Dataset& data) {
  std::vector<long> labels(data.size(), 0);
  return PartitionState(data, labels);
}

const Cluster& PartitionState::cluster(ClusterId id) const {
  auto it = clusters_.find(id);
  if (it == clusters_.end()) {
    throw std::out_of_range("no cluster with id " + std::to_string(to_underlying(id)));
  }
  return it->second;
}

ClusterId PartitionState::add_cluster(Cluster cluster) {
  const auto id = static_cast<ClusterId>(next_id_++);
  for (PointId p : cluster.members) {
    assignment_[p] = id;
  }
  clusters_.emplace(id, std::move(cluster));
  position_.emplace(id, order_.size());
  order_.push_back(id);
  return id;
}

void PartitionState::drop_cluster(ClusterId id) {
  const std::size_t pos = position_.at(id);
  const ClusterId last = order_.back();
  order_[pos] = last;
  position_[last] = pos;
  order_.pop_back();
  position_.erase(id);
  clusters_.erase(id);
}

void PartitionState::validate(const Move& move) const {
  if (const auto* split = std::get_if<SplitMove>(&move)) {
    const Cluster& c = cluster(split->cluster);
    if (split->left.empty() || split->right.empty()) {
      throw std::invalid_argument("split sides must both be nonempty");
    }
    if (split->left.size() + split->right.size() != c.members.size()) {
      throw std::invalid_argument("split sides do not cover the cluster");
    }
    std::unordered_set<PointId> seen;
    seen.reserve(c.members.size());
    for (const auto* side : {&split->left, &split->right}) {
      for (PointId p : *side) {
        if (p >= assignment_.size() || assignment_[p] != split->cluster || !seen.insert(p).second) {
          throw std::invalid_argument("split sides are not a partition of the cluster");
        }
      }
    }
  } else if (const auto* merge = std::get_if<MergeMove>(&move)) {
    if (merge->a == merge->b) {
      throw std::invalid_argument("cannot merge a cluster with itself");
    }
    (void)cluster(merge->a);
    (void)cluster(merge->b);
  } else {
    throw std::invalid_argument("a no-op move has no effect to apply");
  }
}

MoveEffect PartitionState::apply(const Move& move) {
  validate(move);
  MoveEffect effect;
  if (const auto* split = std::get_if<SplitMove>(&move)) {
    Cluster parent = std::move(clusters_.at(split->cluster));
    drop_cluster(split->cluster);
    GaussianStats left_stats = GaussianStats::of(*data_, split->left);
    GaussianStats right_stats = std::move(parent.stats);
    right_stats -= left_stats;
    effect.removed.push_back(split->cluster);
    effect.added.push_back(add_cluster(Cluster{split->left, std::move(left_stats)}));
    effect.added.push_back(add_cluster(Cluster{split->right, std::move(right_stats)}));
  } else {
    const auto& merge = std::get<MergeMove>(move);
    Cluster a = std::move(clusters_.at(merge.a));
    Cluster b = std::move(clusters_.at(merge.b));
    drop_cluster(merge.a);
    drop_cluster(merge.b);
    a.members.insert(a.members.end(), b.members.begin(), b.members.end());
    a.stats += b.stats;
    effect.removed = {merge.a, merge.b};
    effect.added.push_back(add_cluster(std::move(a)));
  }
  return effect;
}

std::vector<long> PartitionState::canonical_labels() const {
  std::vector<long> labels(assignment_.size(), -1);
  std::unordered_map<ClusterId, long> index;
  for (PointId p = 0; p < assignment_.size(); ++p) {
    auto [it, fresh] = index.try_emplace(assignment_[p], static_cast<long>(index.size()));
    labels[p] = it->second;
  }
  return labels;
}

double state_log_likelihood(const PartitionState& state, const Hyperparams& hyper) {
  double total = 0.0;
  for (ClusterId id : state.cluster_ids()) {
    total += cluster_log_marginal(state.cluster(id).stats, hyper);
  }
  return total;
}

double log_likelihood_ratio(const PartitionState& state, const Move& move,
                            const Hyperparams& hyper) {
  state.validate(move);
  if (const auto* split = std::get_if<SplitMove>(&move)) {
    const GaussianStats& parent = state.cluster(split->cluster).stats;
    // Left side from its members, right side by subtraction.
    const GaussianStats left = GaussianStats::of(state.data(), split->left);
    GaussianStats right = parent;
    right -= left;
    return cluster_log_marginal(left, hyper) + cluster_log_marginal(right, hyper) -
           cluster_log_marginal(parent, hyper);
  }
  const auto& merge = std::get<MergeMove>(move);
  const GaussianStats& a = state.cluster(merge.a).stats;
  const GaussianStats& b = state.cluster(merge.b).stats;
  GaussianStats merged = a;
  merged += b;
  return cluster_log_marginal(merged, hyper) - cluster_log_marginal(a, hyper) -
         cluster_log_marginal(b, hyper);
}

PartitionState apply_move(PartitionState state, const Move& move) {
  state.apply(move);
  return state;
}

FeatureVector centroid(const PartitionState& state, ClusterId id) {
  const GaussianStats& stats = state.cluster(id).stats;
  FeatureVector mean(stats.sum.size());
  const auto n = static_cast<double>(stats.count);
  for (std::size_t j = 0; j < mean.size(); ++j) {
    mean[j] = stats.sum[j] / n;
  }
  return mean;
}

void audit_state(const PartitionState& state, const Dataset& data) {
  if (state.num_points() != data.size()) {
    throw ConsistencyError("state covers " + std::to_string(state.num_points()) +
                           " points, dataset has " + std::to_string(data.size()));
  }
  std::size_t covered = 0;
  for (ClusterId id : state.cluster_ids()) {
    const Cluster& c = state.cluster(id);
    if (c.members.empty() || c.stats.count != c.members.size()) {
      throw ConsistencyError("cluster " + std::to_string(to_underlying(id)) +
                             " is empty or miscounted");
    }
    for (PointId p : c.members) {
      if (state.cluster_of(p) != id) {
        throw ConsistencyError("point " + std::to_string(p) + " is listed in cluster " +
                               std::to_string(to_underlying(id)) + " but assigned elsewhere");
      }
    }
    covered += c.members.size();
    const GaussianStats fresh = GaussianStats::of(data, c.members);
    for (std::size_t j = 0; j < fresh.sum.size(); ++j) {
      const double tol_sum = 1e-8 * (1.0 + std::abs(fresh.sum_sq[j]));
      if (std::abs(fresh.sum[j] - c.stats.sum[j]) > tol_sum ||
          std::abs(fresh.sum_sq[j] - c.stats.sum_sq[j]) > tol_sum) {
        throw ConsistencyError("statistics of cluster " + std::to_string(to_underlying(id)) +
                               " drifted from its members");
      }
    }
  }
  if (covered != data.size()) {
    throw ConsistencyError("clusters cover " + std::to_string(covered) + " of " +
                           std::to_string(data.size()) + " points");
  }
}

}  // namespace minsm
