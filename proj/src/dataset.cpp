#include "minsm/dataset.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace minsm {

Dataset::Dataset(std::size_t dim, std::vector<double> values, std::optional<Labeling> labels)
    : dim_(dim), values_(std::move(values)), labels_(std::move(labels)) {
  if (dim_ == 0) {
    throw std::invalid_argument("dataset dimensionality must be positive");
  }
  if (values_.empty() || values_.size() % dim_ != 0) {
    throw std::invalid_argument("dataset needs at least one complete row");
  }
  n_ = values_.size() / dim_;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw std::invalid_argument("non-finite value in row " + std::to_string(i / dim_ + 1));
    }
  }
  if (labels_ && labels_->size() != n_) {
    throw std::invalid_argument("label count does not match point count");
  }
}

Dataset Dataset::from_rows(const std::vector<FeatureVector>& rows, std::optional<Labeling> labels) {
  if (rows.empty()) {
    throw std::invalid_argument("dataset needs at least one row");
  }
  const std::size_t dim = rows.front().size();
  std::vector<double> values;
  values.reserve(rows.size() * dim);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != dim) {
      throw std::invalid_argument("row " + std::to_string(i + 1) + " has " +
                                  std::to_string(rows[i].size()) + " values, expected " +
                                  std::to_string(dim));
    }
    values.insert(values.end(), rows[i].begin(), rows[i].end());
  }
  return Dataset(dim, std::move(values), std::move(labels));
}

PointVectors::PointVectors(const Dataset& data)
    : n_(data.size()), dim_(data.dim()), raw_(data.values()), norms_(data.size()) {
  transformed_.reserve(2 * raw_.size());
  for (PointId i = 0; i < n_; ++i) {
    const TransformedVector t = transform_nonneg(raw(i));
    transformed_.insert(transformed_.end(), t.begin(), t.end());
    double sq = 0.0;
    for (double x : raw(i)) {
      sq += x * x;
    }
    norms_[i] = std::sqrt(sq);
  }
}

}  // namespace minsm
