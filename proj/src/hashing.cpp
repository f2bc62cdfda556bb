#include "minsm/hashing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace minsm {

namespace {

void require_same_length(VectorView x, VectorView y) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("vector length mismatch: " + std::to_string(x.size()) + " vs " +
                                std::to_string(y.size()));
  }
}

void require_nonneg(VectorView v) {
  for (double value : v) {
    if (!(value >= 0.0) || !std::isfinite(value)) {
      throw std::invalid_argument("weighted MinHash input must be finite and non-negative");
    }
  }
}

// Distinct stream tags so SRP and MinHash tables built from one seed are independent.
constexpr std::uint64_t kSrpStream = 0x5352500000000000ULL;
constexpr std::uint64_t kWmhStream = 0x574d480000000000ULL;

}  // namespace

void HashSpec::validate() const {
  if (K < 1 || L < 1) {
    throw std::invalid_argument("hash spec requires K >= 1 and L >= 1");
  }
  if (family == HashFamily::SignRandomProjection && K > 64) {
    throw std::invalid_argument("sign random projection supports at most 64 bits per table");
  }
  if (family == HashFamily::WeightedMinHash && K != 1) {
    throw std::invalid_argument("weighted MinHash tables are built with K = 1");
  }
}

std::size_t HashCodeHasher::operator()(const HashCode& code) const noexcept {
  return static_cast<std::size_t>(mix64(code.primary ^ mix64(static_cast<std::uint64_t>(code.secondary))));
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double seeded_uniform(std::uint64_t seed, std::uint64_t table, std::uint64_t a, std::uint64_t b) {
  std::uint64_t h = mix64(seed);
  h = mix64(h ^ table);
  h = mix64(h ^ a);
  h = mix64(h ^ b);
  // Open interval (0, 1).
  return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

bool all_zero(VectorView v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

TransformedVector transform_nonneg(VectorView v) {
  const std::size_t dim = v.size();
  TransformedVector out(2 * dim, 0.0);
  for (std::size_t j = 0; j < dim; ++j) {
    if (!std::isfinite(v[j])) {
      throw std::invalid_argument("non-finite feature at index " + std::to_string(j));
    }
    if (v[j] > 0.0) {
      out[j] = v[j];
    } else if (v[j] < 0.0) {
      out[j + dim] = -v[j];
    }
  }
  return out;
}

double weighted_jaccard(VectorView x, VectorView y) {
  require_same_length(x, y);
  require_nonneg(x);
  require_nonneg(y);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    num += std::min(x[j], y[j]);
    den += std::max(x[j], y[j]);
  }
  if (den <= 0.0) {
    throw std::domain_error("weighted Jaccard is undefined for two all-zero vectors");
  }
  return num / den;
}

double kway_collision_prob(std::span<const VectorView> vectors) {
  return split_collision_prob(vectors, {});
}

double split_collision_prob(std::span<const VectorView> colliders,
                            std::span<const VectorView> avoiders) {
  if (colliders.empty()) {
    throw std::invalid_argument("collision probability needs at least one collider");
  }
  const std::size_t dim = colliders.front().size();
  std::vector<double> lo(dim, std::numeric_limits<double>::infinity());
  std::vector<double> avoid_hi(dim, 0.0);
  std::vector<double> all_hi(dim, 0.0);

  for (VectorView v : colliders) {
    require_same_length(colliders.front(), v);
    require_nonneg(v);
    for (std::size_t j = 0; j < dim; ++j) {
      lo[j] = std::min(lo[j], v[j]);
      all_hi[j] = std::max(all_hi[j], v[j]);
    }
  }
  for (VectorView v : avoiders) {
    require_same_length(colliders.front(), v);
    require_nonneg(v);
    for (std::size_t j = 0; j < dim; ++j) {
      avoid_hi[j] = std::max(avoid_hi[j], v[j]);
      all_hi[j] = std::max(all_hi[j], v[j]);
    }
  }

  double num = 0.0;
  double den = 0.0;
  for (std::size_t j = 0; j < dim; ++j) {
    num += std::max(0.0, lo[j] - avoid_hi[j]);
    den += all_hi[j];
  }
  if (den <= 0.0) {
    throw std::domain_error("collision probability is undefined when every vector is zero");
  }
  return num / den;
}

double srp_collision_prob(VectorView x, VectorView y) {
  require_same_length(x, y);
  double dot = 0.0;
  double nx = 0.0;
  double ny = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    dot += x[j] * y[j];
    nx += x[j] * x[j];
    ny += y[j] * y[j];
  }
  if (nx <= 0.0 || ny <= 0.0) {
    throw std::invalid_argument("sign random projection collision needs nonzero vectors");
  }
  const double cosine = std::clamp(dot / std::sqrt(nx * ny), -1.0, 1.0);
  return 1.0 - std::acos(cosine) / std::numbers::pi;
}

SrpHasher::SrpHasher(const HashSpec& spec, std::size_t table_index, std::size_t dim)
    : dim_(dim), bits_(spec.K), projections_(static_cast<std::size_t>(spec.K) * dim) {
  spec.validate();
  if (spec.family != HashFamily::SignRandomProjection) {
    throw std::invalid_argument("SrpHasher needs a SignRandomProjection spec");
  }
  const std::uint64_t table = kSrpStream ^ table_index;
  for (int bit = 0; bit < bits_; ++bit) {
    for (std::size_t j = 0; j < dim; ++j) {
      // Box-Muller on two independent counter-based uniforms.
      const std::uint64_t cell = static_cast<std::uint64_t>(bit) * dim + j;
      const double u1 = seeded_uniform(spec.seed, table, cell, 0);
      const double u2 = seeded_uniform(spec.seed, table, cell, 1);
      projections_[cell] = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }
  }
}

HashCode SrpHasher::operator()(VectorView v) const {
  if (v.size() != dim_) {
    throw std::invalid_argument("SRP input has dimension " + std::to_string(v.size()) +
                                ", expected " + std::to_string(dim_));
  }
  std::uint64_t code = 0;
  for (int bit = 0; bit < bits_; ++bit) {
    const double* row = projections_.data() + static_cast<std::size_t>(bit) * dim_;
    double dot = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) {
      dot += row[j] * v[j];
    }
    if (dot >= 0.0) {
      code |= (std::uint64_t{1} << bit);
    }
  }
  return HashCode{code, 0};
}

WeightedMinHasher::WeightedMinHasher(const HashSpec& spec, std::size_t table_index,
                                     std::size_t dim)
    : r_(dim), log_c_(dim), beta_(dim) {
  spec.validate();
  if (spec.family != HashFamily::WeightedMinHash) {
    throw std::invalid_argument("WeightedMinHasher needs a WeightedMinHash spec");
  }
  const std::uint64_t table = kWmhStream ^ table_index;
  for (std::size_t k = 0; k < dim; ++k) {
    // r, c ~ Gamma(2, 1) as sums of two unit exponentials; beta ~ U(0, 1).
    r_[k] = -std::log(seeded_uniform(spec.seed, table, k, 0)) -
            std::log(seeded_uniform(spec.seed, table, k, 1));
    const double c = -std::log(seeded_uniform(spec.seed, table, k, 2)) -
                     std::log(seeded_uniform(spec.seed, table, k, 3));
    log_c_[k] = std::log(c);
    beta_[k] = seeded_uniform(spec.seed, table, k, 4);
  }
}

HashCode WeightedMinHasher::operator()(VectorView v) const {
  if (v.size() != r_.size()) {
    throw std::invalid_argument("MinHash input has dimension " + std::to_string(v.size()) +
                                ", expected " + std::to_string(r_.size()));
  }
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_k = 0;
  double best_t = 0.0;
  bool any = false;
  for (std::size_t k = 0; k < v.size(); ++k) {
    const double w = v[k];
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("weighted MinHash input must be finite and non-negative");
    }
    if (w == 0.0) {
      continue;
    }
    const double t = std::floor(std::log(w) / r_[k] + beta_[k]);
    // log a_k = log c_k - log y_k - r_k with log y_k = r_k (t - beta_k)
    const double log_a = log_c_[k] - r_[k] * (t - beta_[k]) - r_[k];
    if (log_a < best) {
      best = log_a;
      best_k = k;
      best_t = t;
      any = true;
    }
  }
  if (!any) {
    throw std::invalid_argument("weighted MinHash of an all-zero vector is undefined");
  }
  return HashCode{static_cast<std::uint64_t>(best_k), static_cast<std::int64_t>(best_t)};
}

HashCode srp_hash(VectorView v, const HashSpec& spec, std::size_t table_index) {
  return SrpHasher(spec, table_index, v.size())(v);
}

HashCode wmh_hash(VectorView v, const HashSpec& spec, std::size_t table_index) {
  return WeightedMinHasher(spec, table_index, v.size())(v);
}

}  // namespace minsm
