#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "minsm/hashing.hpp"

namespace minsm {

using PointId = std::size_t;
using Labeling = std::vector<long>;

/// Dense row-major points of uniform dimensionality, with optional ground truth.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::size_t dim, std::vector<double> values, std::optional<Labeling> labels = {});
  static Dataset from_rows(const std::vector<FeatureVector>& rows,
                           std::optional<Labeling> labels = {});

  std::size_t size() const { return n_; }
  std::size_t dim() const { return dim_; }
  VectorView point(PointId i) const { return {values_.data() + i * dim_, dim_}; }
  const std::vector<double>& values() const { return values_; }
  const std::optional<Labeling>& labels() const { return labels_; }

 private:
  std::size_t n_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> values_;
  std::optional<Labeling> labels_;
};

/// Per-point quantities the proposal kernels need: raw rows, their 2D
/// non-negative images for MinHash, and Euclidean norms.
class PointVectors {
 public:
  explicit PointVectors(const Dataset& data);

  std::size_t size() const { return n_; }
  std::size_t dim() const { return dim_; }
  VectorView raw(PointId i) const { return {raw_.data() + i * dim_, dim_}; }
  VectorView transformed(PointId i) const {
    return {transformed_.data() + i * 2 * dim_, 2 * dim_};
  }
  double norm(PointId i) const { return norms_[i]; }

 private:
  std::size_t n_;
  std::size_t dim_;
  std::vector<double> raw_;
  std::vector<double> transformed_;
  std::vector<double> norms_;
};

}  // namespace minsm
