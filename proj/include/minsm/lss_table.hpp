#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <unordered_map>
#include <variant>
#include <vector>

#include "minsm/hashing.hpp"

namespace minsm {

using Rng = std::mt19937_64;
using ItemId = std::uint64_t;
using Bucket = std::vector<ItemId>;
using VectorLookup = std::function<VectorView(ItemId)>;

enum class ItemKind { DataPoint, ClusterCentroid };

/// Result of one adaptive draw. `bucket` views table storage and is valid until
/// the table is next mutated.
struct SampledItem {
  ItemId item = 0;
  std::span<const ItemId> bucket;
  int tables_probed = 0;
};

/// L hash tables of K-concatenated codes. Buckets store item ids only; the
/// vectors live with the caller. Every indexed item sits in exactly one bucket
/// per table.
class LssTable {
 public:
  LssTable(const HashSpec& spec, std::size_t dim, ItemKind kind);

  static LssTable build(const HashSpec& spec, std::size_t dim, ItemKind kind,
                        std::span<const ItemId> ids, const VectorLookup& vector_of);

  const HashSpec& spec() const { return spec_; }
  std::size_t dim() const { return dim_; }
  ItemKind kind() const { return kind_; }
  std::size_t size() const { return codes_.size(); }
  bool empty() const { return codes_.empty(); }
  bool contains(ItemId id) const { return codes_.contains(id); }

  void insert(ItemId id, VectorView v);
  void remove(ItemId id);

  HashCode hash(VectorView v, std::size_t table_index) const;
  /// Code stored for an indexed item.
  const HashCode& code_of(ItemId id, std::size_t table_index) const;

  std::span<const ItemId> bucket(std::size_t table_index, const HashCode& code) const;
  std::span<const ItemId> bucket_for(VectorView query, std::size_t table_index) const;

  /// Probes tables in uniformly random order (without replacement) until a
  /// nonempty bucket is found, then returns a uniform member of it.
  std::optional<SampledItem> sample_item(VectorView query, Rng& rng) const;

  /// Whole bucket of the query. Only valid on K = 1, L = 1 MinHash tables.
  std::span<const ItemId> query_bucket(VectorView query) const;

  /// Bucket of the lowest-indexed table in which the query's bucket is
  /// nonempty; empty span if there is none. Deterministic stand-in for the
  /// sampler's bucket in closed-form transition probabilities.
  std::span<const ItemId> first_nonempty_bucket(VectorView query) const;

  /// True iff every stored code equals the recomputed code and bucket contents
  /// agree with the stored codes.
  bool audit(const VectorLookup& vector_of) const;

  /// Same items in the same buckets (bucket order ignored).
  bool same_contents(const LssTable& other) const;

 private:
  using Hasher = std::variant<SrpHasher, WeightedMinHasher>;
  using Table = std::unordered_map<HashCode, Bucket, HashCodeHasher>;

  HashSpec spec_;
  std::size_t dim_;
  ItemKind kind_;
  std::vector<Hasher> hashers_;
  std::vector<Table> tables_;
  std::unordered_map<ItemId, std::vector<HashCode>> codes_;
};

/// (1 - (1 - p^K)^L) / bucket_size
double inclusion_prob(double p, int K, int L, std::size_t bucket_size);

/// Negated query; sampling an SRP table with it favours items of low cosine
/// similarity.
FeatureVector dissimilar_query(const HashSpec& spec, VectorView query);

}  // namespace minsm
