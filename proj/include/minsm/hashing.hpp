#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace minsm {

/// A point in R^D. Arbitrary sign, all entries finite.
using FeatureVector = std::vector<double>;

/// Non-negative image of a FeatureVector in R^{2D}: positive parts in [0, D),
/// negative parts in [D, 2D).
using TransformedVector = std::vector<double>;

/// Read-only view of a vector stored elsewhere (dataset rows, centroids).
using VectorView = std::span<const double>;

enum class HashFamily { SignRandomProjection, WeightedMinHash };

struct HashSpec {
  HashFamily family = HashFamily::SignRandomProjection;
  std::uint64_t seed = 0;
  int K = 1;  // hashes concatenated per table
  int L = 1;  // number of tables

  void validate() const;
};

/// SRP: `primary` holds the K sign bits, `secondary` is 0.
/// Weighted MinHash: (`primary`, `secondary`) = (sampled coordinate, quantized level).
struct HashCode {
  std::uint64_t primary = 0;
  std::int64_t secondary = 0;

  friend bool operator==(const HashCode&, const HashCode&) = default;
  friend auto operator<=>(const HashCode&, const HashCode&) = default;
};

struct HashCodeHasher {
  std::size_t operator()(const HashCode& code) const noexcept;
};

// Splitmix-style mixing; every random quantity used by the hash families is a
// pure function of (seed, table, counters) through this.
std::uint64_t mix64(std::uint64_t x);
double seeded_uniform(std::uint64_t seed, std::uint64_t table, std::uint64_t a, std::uint64_t b);

TransformedVector transform_nonneg(VectorView v);

bool all_zero(VectorView v);

double weighted_jaccard(VectorView x, VectorView y);

/// Probability that one weighted MinHash assigns the same code to every vector.
double kway_collision_prob(std::span<const VectorView> vectors);

/// Probability that the consistent sample of the union of colliders and
/// avoiders lies under every collider and under no avoider:
///   sum_j max(0, min_colliders_j - max_avoiders_j) / sum_j max_all_j.
/// Linear in (|colliders| + |avoiders|) * dim.
double split_collision_prob(std::span<const VectorView> colliders,
                            std::span<const VectorView> avoiders);

double srp_collision_prob(VectorView x, VectorView y);

/// Sign random projection: K Gaussian projections per table; bit = 1 iff the
/// projection is >= 0.
class SrpHasher {
 public:
  SrpHasher(const HashSpec& spec, std::size_t table_index, std::size_t dim);

  HashCode operator()(VectorView v) const;
  std::size_t dim() const { return dim_; }

 private:
  std::size_t dim_;
  int bits_;
  std::vector<double> projections_;  // bits_ x dim_, row-major
};

/// Improved consistent weighted sampling. For x <= z coordinatewise, the code
/// of x equals the code of z exactly when z's sample lies under x, which gives
/// Pr[h(x) = h(y)] = weighted_jaccard(x, y) and the k-way law.
class WeightedMinHasher {
 public:
  WeightedMinHasher(const HashSpec& spec, std::size_t table_index, std::size_t dim);

  HashCode operator()(VectorView v) const;
  std::size_t dim() const { return r_.size(); }

 private:
  std::vector<double> r_;
  std::vector<double> log_c_;
  std::vector<double> beta_;
};

HashCode srp_hash(VectorView v, const HashSpec& spec, std::size_t table_index);
HashCode wmh_hash(VectorView v, const HashSpec& spec, std::size_t table_index);

}  // namespace minsm
