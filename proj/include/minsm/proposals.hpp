#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "minsm/dataset.hpp"
#include "minsm/lss_table.hpp"
#include "minsm/mixture_model.hpp"
#include "minsm/move.hpp"

namespace minsm {

/// `Init` only labels the trace record of a chain's starting state.
enum class MoveKind { NoOp, DumbSplit, DumbMerge, SmartSplit, SmartMerge, Init };

std::string_view to_string(MoveKind kind);
MoveKind move_kind_from_string(std::string_view name);

/// A candidate move with log q(x'|x) and log q(x|x'). `reverse_kind` names the
/// kernel whose proposal of the inverse move `log_q_rev` measures.
struct ProposalOutcome {
  Move move = NoOpMove{};
  MoveKind kind = MoveKind::NoOp;
  MoveKind reverse_kind = MoveKind::NoOp;
  double log_q_fwd = 0.0;
  double log_q_rev = 0.0;

  static ProposalOutcome noop(std::string reason);
  bool is_noop() const { return kind == MoveKind::NoOp; }
};

// ---------------------------------------------------------------------------
// Closed-form transition probabilities (natural log).

/// Uniform cluster choice, then a fair coin per member. A two-sided outcome
/// {A, B} arises from two coin patterns: log[(2 / M) (1/2)^|C|].
double dumb_split_log_prob(std::size_t clusters_before, std::size_t cluster_size);

/// Unordered uniform pair: log[2 / (M (M - 1))].
double dumb_merge_log_prob(std::size_t clusters_before);

/// Cosine collision probability of a stored point pair, optionally with u negated.
double srp_pair_collision(const PointVectors& points, PointId u, PointId v, bool negate_u);

/// SRP point table with each point's deterministic buckets for +u and -u
/// precomputed. Point tables never change after construction.
class NaiveLshIndex {
 public:
  NaiveLshIndex(const PointVectors& points, const HashSpec& spec);
  // Bucket views point into table storage.
  NaiveLshIndex(const NaiveLshIndex&) = delete;
  NaiveLshIndex& operator=(const NaiveLshIndex&) = delete;
  NaiveLshIndex(NaiveLshIndex&&) = default;
  NaiveLshIndex& operator=(NaiveLshIndex&&) = default;

  const LssTable& table() const { return table_; }
  const PointVectors& points() const { return *points_; }
  std::span<const ItemId> similar_bucket(PointId u) const { return similar_[u]; }
  std::span<const ItemId> dissimilar_bucket(PointId u) const { return dissimilar_[u]; }

 private:
  const PointVectors* points_;
  LssTable table_;
  std::vector<std::span<const ItemId>> similar_;
  std::vector<std::span<const ItemId>> dissimilar_;
};

/// Smart split of C into (u_side, v_side) with u drawn from u_side and v from
/// S_{-u}:
///   (1/2)^{|C_u|+|C_v|-2} sum_{u in C_u} sum_{v in C_v}
///       (1/n) (1 - (1 - Pr(-u,v)^K)^L) |C_v ∩ S_{-u}| / |S_{-u}|
double naive_split_log_prob(const NaiveLshIndex& index, std::span<const PointId> u_side,
                            std::span<const PointId> v_side);

/// Smart merge of C_u and C_v with v drawn from S_u:
///   sum_{u in C_u} sum_{v in C_v} (1/n) (1 - (1 - Pr(u,v)^K)^L) |C_v ∩ S_u| / |S_u|
double naive_merge_log_prob(const NaiveLshIndex& index, std::span<const PointId> u_cluster,
                            std::span<const PointId> v_cluster);

/// log[(|S_u| / n) * split_collision_prob(colliders, avoiders)] over the
/// transformed vectors; colliders is u's side. Linear in cluster size.
double minsm_split_log_prob(const PointVectors& points, std::span<const PointId> colliders,
                            std::span<const PointId> avoiders, std::size_t bucket_size);

/// log[(1 / M) * J(u, v) / |S_u|]
double minsm_merge_log_prob(std::size_t clusters_before, double jaccard, std::size_t bucket_size);

// ---------------------------------------------------------------------------
// Kernels. Degenerate draws come back as NoOp outcomes.

ProposalOutcome dumb_split(const PartitionState& state, Rng& rng);
ProposalOutcome dumb_merge(const PartitionState& state, Rng& rng);

/// Dissimilarity-sampled pair; same cluster -> anchored random split, else a
/// dumb merge of two uniformly chosen clusters.
ProposalOutcome naive_smart_split(const PartitionState& state, const NaiveLshIndex& index,
                                  Rng& rng);

/// Similarity-sampled pair; different clusters -> merge them, else a dumb split.
ProposalOutcome naive_smart_merge(const PartitionState& state, const NaiveLshIndex& index,
                                  Rng& rng);

/// Splits u's cluster into (C_u ∩ S_u, C_u - S_u) using the whole MinHash
/// bucket of u. `point_table` indexes every nonzero transformed point; drawing
/// a zero point is a NoOp.
ProposalOutcome minsm_smart_split(const PartitionState& state, const PointVectors& points,
                                  const LssTable& point_table, Rng& rng);

/// Uniform centroid u, then v uniform from u's centroid bucket; drawing u
/// itself, or a u whose centroid is all zero, is a NoOp.
/// Throws ConsistencyError if the centroid table does not match the state.
ProposalOutcome minsm_smart_merge(const PartitionState& state, const LssTable& centroid_table,
                                  Rng& rng);

/// Transformed centroid of a cluster, the vector indexed in centroid tables.
TransformedVector centroid_key(const PartitionState& state, ClusterId id);

}  // namespace minsm
