#include "minsm/proposals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <unordered_set>

#include "minsm/errors.hpp"

namespace minsm {

namespace {

constexpr double kLogHalf = -std::numbers::ln2;

std::size_t uniform_index(Rng& rng, std::size_t size) {
  return std::uniform_int_distribution<std::size_t>(0, size - 1)(rng);
}

ProposalOutcome finish(Move move, MoveKind kind, MoveKind reverse_kind, double log_q_fwd,
                       double log_q_rev) {
  if (!std::isfinite(log_q_fwd) || !std::isfinite(log_q_rev)) {
    return ProposalOutcome::noop("zero or non-finite transition probability");
  }
  return ProposalOutcome{std::move(move), kind, reverse_kind, log_q_fwd, log_q_rev};
}

ProposalOutcome merge_outcome(const PartitionState& state, ClusterId a, ClusterId b,
                              MoveKind kind, double log_q_fwd) {
  const std::size_t merged = state.cluster(a).members.size() + state.cluster(b).members.size();
  const double log_q_rev = dumb_split_log_prob(state.num_clusters() - 1, merged);
  return finish(MergeMove{a, b}, kind, MoveKind::DumbSplit, log_q_fwd, log_q_rev);
}

void require_minhash_unit_table(const LssTable& table) {
  const HashSpec& spec = table.spec();
  if (spec.family != HashFamily::WeightedMinHash || spec.K != 1 || spec.L != 1) {
    throw std::logic_error("MinHash split-merge kernels need a K = 1, L = 1 weighted MinHash table");
  }
}

}  // namespace

std::string_view to_string(MoveKind kind) {
  switch (kind) {
    case MoveKind::NoOp: return "noop";
    case MoveKind::DumbSplit: return "dumb_split";
    case MoveKind::DumbMerge: return "dumb_merge";
    case MoveKind::SmartSplit: return "smart_split";
    case MoveKind::SmartMerge: return "smart_merge";
    case MoveKind::Init: return "init";
  }
  return "unknown";
}

MoveKind move_kind_from_string(std::string_view name) {
  for (MoveKind k : {MoveKind::NoOp, MoveKind::DumbSplit, MoveKind::DumbMerge,
                     MoveKind::SmartSplit, MoveKind::SmartMerge, MoveKind::Init}) {
    if (to_string(k) == name) {
      return k;
    }
  }
  throw std::invalid_argument("unknown move type '" + std::string(name) + "'");
}

ProposalOutcome ProposalOutcome::noop(std::string reason) {
  return ProposalOutcome{NoOpMove{std::move(reason)}, MoveKind::NoOp, MoveKind::NoOp, 0.0, 0.0};
}

double dumb_split_log_prob(std::size_t clusters_before, std::size_t cluster_size) {
  if (clusters_before == 0 || cluster_size < 2) {
    throw std::invalid_argument("dumb split needs a cluster of at least two points");
  }
  return std::numbers::ln2 - std::log(static_cast<double>(clusters_before)) +
         static_cast<double>(cluster_size) * kLogHalf;
}

double dumb_merge_log_prob(std::size_t clusters_before) {
  if (clusters_before < 2) {
    throw std::invalid_argument("dumb merge needs at least two clusters");
  }
  const auto m = static_cast<double>(clusters_before);
  return std::numbers::ln2 - std::log(m) - std::log(m - 1.0);
}

double srp_pair_collision(const PointVectors& points, PointId u, PointId v, bool negate_u) {
  const VectorView x = points.raw(u);
  const VectorView y = points.raw(v);
  const double denom = points.norm(u) * points.norm(v);
  if (!(denom > 0.0)) {
    throw std::invalid_argument("cosine collision probability needs nonzero points");
  }
  double dot = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    dot += x[j] * y[j];
  }
  double cosine = std::clamp(dot / denom, -1.0, 1.0);
  if (negate_u) {
    cosine = -cosine;
  }
  return 1.0 - std::acos(cosine) / std::numbers::pi;
}

NaiveLshIndex::NaiveLshIndex(const PointVectors& points, const HashSpec& spec)
    : points_(&points), table_(spec, points.dim(), ItemKind::DataPoint) {
  if (spec.family != HashFamily::SignRandomProjection) {
    throw std::invalid_argument("the naive LSH kernels use sign random projection tables");
  }
  for (PointId p = 0; p < points.size(); ++p) {
    table_.insert(p, points.raw(p));
  }
  similar_.reserve(points.size());
  dissimilar_.reserve(points.size());
  for (PointId p = 0; p < points.size(); ++p) {
    similar_.push_back(table_.first_nonempty_bucket(points.raw(p)));
    const FeatureVector negated = dissimilar_query(spec, points.raw(p));
    dissimilar_.push_back(table_.first_nonempty_bucket(negated));
  }
}

namespace {

// Shared double sum of the naive split/merge formulas.
double naive_double_sum(const NaiveLshIndex& index, std::span<const PointId> u_side,
                        std::span<const PointId> v_side, bool dissimilar) {
  const HashSpec& spec = index.table().spec();
  const auto n = static_cast<double>(index.points().size());
  const std::unordered_set<PointId> v_members(v_side.begin(), v_side.end());
  double total = 0.0;
  for (PointId u : u_side) {
    const auto bucket = dissimilar ? index.dissimilar_bucket(u) : index.similar_bucket(u);
    double fraction = 0.0;
    if (!bucket.empty()) {
      const auto hits = std::count_if(bucket.begin(), bucket.end(), [&](ItemId id) {
        return v_members.contains(static_cast<PointId>(id));
      });
      fraction = static_cast<double>(hits) / static_cast<double>(bucket.size());
    }
    double inner = 0.0;
    for (PointId v : v_side) {
      const double p = srp_pair_collision(index.points(), u, v, dissimilar);
      inner += 1.0 - std::pow(1.0 - std::pow(p, spec.K), spec.L);
    }
    total += inner * fraction / n;
  }
  return total;
}

}  // namespace

double naive_split_log_prob(const NaiveLshIndex& index, std::span<const PointId> u_side,
                            std::span<const PointId> v_side) {
  if (u_side.empty() || v_side.empty()) {
    throw std::invalid_argument("split sides must both be nonempty");
  }
  const double sum = naive_double_sum(index, u_side, v_side, /*dissimilar=*/true);
  const auto free_members = static_cast<double>(u_side.size() + v_side.size() - 2);
  return free_members * kLogHalf + std::log(sum);
}

double naive_merge_log_prob(const NaiveLshIndex& index, std::span<const PointId> u_cluster,
                            std::span<const PointId> v_cluster) {
  if (u_cluster.empty() || v_cluster.empty()) {
    throw std::invalid_argument("merge operands must be nonempty");
  }
  return std::log(naive_double_sum(index, u_cluster, v_cluster, /*dissimilar=*/false));
}

double minsm_split_log_prob(const PointVectors& points, std::span<const PointId> colliders,
                            std::span<const PointId> avoiders, std::size_t bucket_size) {
  std::vector<VectorView> c;
  std::vector<VectorView> a;
  c.reserve(colliders.size());
  a.reserve(avoiders.size());
  for (PointId p : colliders) {
    c.push_back(points.transformed(p));
  }
  for (PointId p : avoiders) {
    a.push_back(points.transformed(p));
  }
  const double prob = split_collision_prob(c, a);
  return std::log(static_cast<double>(bucket_size) / static_cast<double>(points.size())) +
         std::log(prob);
}

double minsm_merge_log_prob(std::size_t clusters_before, double jaccard, std::size_t bucket_size) {
  if (clusters_before < 2 || bucket_size == 0) {
    throw std::invalid_argument("MinHash merge needs two clusters and a nonempty bucket");
  }
  return -std::log(static_cast<double>(clusters_before)) + std::log(jaccard) -
         std::log(static_cast<double>(bucket_size));
}

ProposalOutcome dumb_split(const PartitionState& state, Rng& rng) {
  const std::size_t m = state.num_clusters();
  const ClusterId id = state.cluster_ids()[uniform_index(rng, m)];
  const Cluster& c = state.cluster(id);
  if (c.members.size() < 2) {
    return ProposalOutcome::noop("selected cluster has a single point");
  }
  SplitMove split{id, {}, {}};
  std::bernoulli_distribution coin(0.5);
  for (PointId p : c.members) {
    (coin(rng) ? split.left : split.right).push_back(p);
  }
  if (split.left.empty() || split.right.empty()) {
    return ProposalOutcome::noop("random split left one side empty");
  }
  return finish(std::move(split), MoveKind::DumbSplit, MoveKind::DumbMerge,
                dumb_split_log_prob(m, c.members.size()), dumb_merge_log_prob(m + 1));
}

ProposalOutcome dumb_merge(const PartitionState& state, Rng& rng) {
  const std::size_t m = state.num_clusters();
  if (m < 2) {
    return ProposalOutcome::noop("fewer than two clusters");
  }
  const std::size_t i = uniform_index(rng, m);
  std::size_t j = uniform_index(rng, m - 1);
  if (j >= i) {
    ++j;
  }
  const auto& ids = state.cluster_ids();
  return merge_outcome(state, ids[i], ids[j], MoveKind::DumbMerge, dumb_merge_log_prob(m));
}

ProposalOutcome naive_smart_split(const PartitionState& state, const NaiveLshIndex& index,
                                  Rng& rng) {
  const PointVectors& points = index.points();
  const PointId u = uniform_index(rng, points.size());
  const FeatureVector query = dissimilar_query(index.table().spec(), points.raw(u));
  const auto sampled = index.table().sample_item(query, rng);
  if (!sampled) {
    return ProposalOutcome::noop("no dissimilar point in any probed bucket");
  }
  const auto v = static_cast<PointId>(sampled->item);
  if (v == u) {
    return ProposalOutcome::noop("dissimilar sample returned the query point");
  }
  const ClusterId cu = state.cluster_of(u);
  if (cu != state.cluster_of(v)) {
    return dumb_merge(state, rng);
  }

  SplitMove split{cu, {u}, {v}};
  std::bernoulli_distribution coin(0.5);
  for (PointId p : state.cluster(cu).members) {
    if (p != u && p != v) {
      (coin(rng) ? split.left : split.right).push_back(p);
    }
  }
  const double log_q_fwd = naive_split_log_prob(index, split.left, split.right);
  const double log_q_rev = dumb_merge_log_prob(state.num_clusters() + 1);
  return finish(std::move(split), MoveKind::SmartSplit, MoveKind::DumbMerge, log_q_fwd,
                log_q_rev);
}

ProposalOutcome naive_smart_merge(const PartitionState& state, const NaiveLshIndex& index,
                                  Rng& rng) {
  const PointVectors& points = index.points();
  const PointId u = uniform_index(rng, points.size());
  const auto sampled = index.table().sample_item(points.raw(u), rng);
  if (!sampled) {
    return ProposalOutcome::noop("no similar point in any probed bucket");
  }
  const auto v = static_cast<PointId>(sampled->item);
  const ClusterId cu = state.cluster_of(u);
  const ClusterId cv = state.cluster_of(v);
  if (cu == cv) {
    return dumb_split(state, rng);
  }
  const double log_q_fwd =
      naive_merge_log_prob(index, state.cluster(cu).members, state.cluster(cv).members);
  return merge_outcome(state, cu, cv, MoveKind::SmartMerge, log_q_fwd);
}

ProposalOutcome minsm_smart_split(const PartitionState& state, const PointVectors& points,
                                  const LssTable& point_table, Rng& rng) {
  require_minhash_unit_table(point_table);
  if (point_table.size() > points.size()) {
    throw std::logic_error("MinHash point table holds more items than there are points");
  }
  const PointId u = uniform_index(rng, points.size());
  if (!point_table.contains(u)) {
    if (all_zero(points.transformed(u))) {
      return ProposalOutcome::noop("zero point has no MinHash code");
    }
    throw std::logic_error("MinHash point table is missing point " + std::to_string(u));
  }
  const HashCode& code = point_table.code_of(u, 0);
  const std::size_t bucket_size = point_table.bucket(0, code).size();
  const ClusterId cu = state.cluster_of(u);

  SplitMove split{cu, {}, {}};
  for (PointId p : state.cluster(cu).members) {
    const bool shares = point_table.contains(p) && point_table.code_of(p, 0) == code;
    (shares ? split.left : split.right).push_back(p);
  }
  if (split.right.empty()) {
    return ProposalOutcome::noop("whole cluster shares the query's bucket");
  }
  const double log_q_fwd = minsm_split_log_prob(points, split.left, split.right, bucket_size);
  const double log_q_rev = dumb_merge_log_prob(state.num_clusters() + 1);
  return finish(std::move(split), MoveKind::SmartSplit, MoveKind::DumbMerge, log_q_fwd,
                log_q_rev);
}

TransformedVector centroid_key(const PartitionState& state, ClusterId id) {
  const FeatureVector mean = centroid(state, id);
  return transform_nonneg(mean);
}

ProposalOutcome minsm_smart_merge(const PartitionState& state, const LssTable& centroid_table,
                                  Rng& rng) {
  require_minhash_unit_table(centroid_table);
  const std::size_t m = state.num_clusters();
  if (centroid_table.size() > m) {
    throw ConsistencyError("centroid table holds " + std::to_string(centroid_table.size()) +
                           " entries for " + std::to_string(m) + " clusters");
  }
  if (m < 2) {
    return ProposalOutcome::noop("fewer than two clusters");
  }
  const ClusterId cu = state.cluster_ids()[uniform_index(rng, m)];
  const ItemId u = to_underlying(cu);
  const TransformedVector key_u = centroid_key(state, cu);
  if (!centroid_table.contains(u)) {
    if (all_zero(key_u)) {
      return ProposalOutcome::noop("zero centroid has no MinHash code");
    }
    throw ConsistencyError("cluster " + std::to_string(u) + " missing from the centroid table");
  }
  const HashCode& code = centroid_table.code_of(u, 0);
  if (centroid_table.hash(key_u, 0) != code) {
    throw ConsistencyError("stale centroid entry for cluster " + std::to_string(u));
  }
  const auto bucket = centroid_table.bucket(0, code);
  if (bucket.size() < 2) {
    return ProposalOutcome::noop("no other centroid shares the bucket");
  }
  // Uniform over the whole bucket, u included.
  const std::size_t pick = uniform_index(rng, bucket.size());
  if (bucket[pick] == u) {
    return ProposalOutcome::noop("merge partner draw returned the query cluster");
  }
  const auto cv = static_cast<ClusterId>(bucket[pick]);
  if (!state.has_cluster(cv)) {
    throw ConsistencyError("centroid table references retired cluster " +
                           std::to_string(bucket[pick]));
  }
  const TransformedVector key_v = centroid_key(state, cv);
  const double jaccard = weighted_jaccard(key_u, key_v);
  const double log_q_fwd = minsm_merge_log_prob(m, jaccard, bucket.size());
  return merge_outcome(state, cu, cv, MoveKind::SmartMerge, log_q_fwd);
}

}  // namespace minsm
