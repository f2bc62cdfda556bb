#include "minsm/lss_table.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace minsm {

LssTable::LssTable(const HashSpec& spec, std::size_t dim, ItemKind kind)
    : spec_(spec), dim_(dim), kind_(kind) {
  spec_.validate();
  if (dim == 0) {
    throw std::invalid_argument("hash table dimension must be positive");
  }
  const auto tables = static_cast<std::size_t>(spec_.L);
  hashers_.reserve(tables);
  for (std::size_t t = 0; t < tables; ++t) {
    if (spec_.family == HashFamily::SignRandomProjection) {
      hashers_.emplace_back(std::in_place_type<SrpHasher>, spec_, t, dim);
    } else {
      hashers_.emplace_back(std::in_place_type<WeightedMinHasher>, spec_, t, dim);
    }
  }
  tables_.resize(tables);
}

LssTable LssTable::build(const HashSpec& spec, std::size_t dim, ItemKind kind,
                         std::span<const ItemId> ids, const VectorLookup& vector_of) {
  if (ids.empty()) {
    throw std::invalid_argument("cannot build a hash table over zero items");
  }
  LssTable table(spec, dim, kind);
  for (ItemId id : ids) {
    table.insert(id, vector_of(id));
  }
  return table;
}

HashCode LssTable::hash(VectorView v, std::size_t table_index) const {
  if (all_zero(v)) {
    throw std::invalid_argument("cannot hash an all-zero vector");
  }
  return std::visit([&](const auto& hasher) { return hasher(v); }, hashers_.at(table_index));
}

const HashCode& LssTable::code_of(ItemId id, std::size_t table_index) const {
  auto it = codes_.find(id);
  if (it == codes_.end()) {
    throw std::out_of_range("item " + std::to_string(id) + " is not indexed");
  }
  return it->second.at(table_index);
}

void LssTable::insert(ItemId id, VectorView v) {
  if (codes_.contains(id)) {
    throw std::invalid_argument("item " + std::to_string(id) + " is already indexed");
  }
  std::vector<HashCode> codes;
  codes.reserve(tables_.size());
  for (std::size_t t = 0; t < tables_.size(); ++t) {
    codes.push_back(hash(v, t));
  }
  for (std::size_t t = 0; t < tables_.size(); ++t) {
    tables_[t][codes[t]].push_back(id);
  }
  codes_.emplace(id, std::move(codes));
}

void LssTable::remove(ItemId id) {
  auto it = codes_.find(id);
  if (it == codes_.end()) {
    throw std::invalid_argument("item " + std::to_string(id) + " is not indexed");
  }
  for (std::size_t t = 0; t < tables_.size(); ++t) {
    auto bucket_it = tables_[t].find(it->second[t]);
    Bucket& bucket = bucket_it->second;
    auto pos = std::find(bucket.begin(), bucket.end(), id);
    *pos = bucket.back();
    bucket.pop_back();
    if (bucket.empty()) {
      tables_[t].erase(bucket_it);
    }
  }
  codes_.erase(it);
}

std::span<const ItemId> LssTable::bucket(std::size_t table_index, const HashCode& code) const {
  const Table& table = tables_.at(table_index);
  auto it = table.find(code);
  if (it == table.end()) {
    return {};
  }
  return it->second;
}

std::span<const ItemId> LssTable::bucket_for(VectorView query, std::size_t table_index) const {
  return bucket(table_index, hash(query, table_index));
}

std::optional<SampledItem> LssTable::sample_item(VectorView query, Rng& rng) const {
  std::vector<std::size_t> order(tables_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  int probed = 0;
  for (std::size_t remaining = order.size(); remaining > 0; --remaining) {
    std::uniform_int_distribution<std::size_t> pick(0, remaining - 1);
    const std::size_t slot = pick(rng);
    const std::size_t t = order[slot];
    order[slot] = order[remaining - 1];
    ++probed;
    auto members = bucket_for(query, t);
    if (!members.empty()) {
      std::uniform_int_distribution<std::size_t> member(0, members.size() - 1);
      return SampledItem{members[member(rng)], members, probed};
    }
  }
  return std::nullopt;
}

std::span<const ItemId> LssTable::query_bucket(VectorView query) const {
  if (spec_.family != HashFamily::WeightedMinHash || spec_.K != 1 || spec_.L != 1) {
    throw std::logic_error("whole-bucket queries require a K = 1, L = 1 weighted MinHash table");
  }
  return bucket_for(query, 0);
}

std::span<const ItemId> LssTable::first_nonempty_bucket(VectorView query) const {
  for (std::size_t t = 0; t < tables_.size(); ++t) {
    auto members = bucket_for(query, t);
    if (!members.empty()) {
      return members;
    }
  }
  return {};
}

bool LssTable::audit(const VectorLookup& vector_of) const {
  std::size_t stored = 0;
  for (const auto& [id, codes] : codes_) {
    const VectorView v = vector_of(id);
    for (std::size_t t = 0; t < tables_.size(); ++t) {
      if (hash(v, t) != codes[t]) {
        return false;
      }
      auto members = bucket(t, codes[t]);
      if (std::find(members.begin(), members.end(), id) == members.end()) {
        return false;
      }
    }
  }
  for (const Table& table : tables_) {
    for (const auto& [code, members] : table) {
      if (members.empty()) {
        return false;
      }
      stored += members.size();
    }
  }
  return stored == codes_.size() * tables_.size();
}

bool LssTable::same_contents(const LssTable& other) const {
  if (tables_.size() != other.tables_.size() || codes_.size() != other.codes_.size()) {
    return false;
  }
  for (std::size_t t = 0; t < tables_.size(); ++t) {
    if (tables_[t].size() != other.tables_[t].size()) {
      return false;
    }
    for (const auto& [code, members] : tables_[t]) {
      auto it = other.tables_[t].find(code);
      if (it == other.tables_[t].end()) {
        return false;
      }
      Bucket a = members;
      Bucket b = it->second;
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      if (a != b) {
        return false;
      }
    }
  }
  return true;
}

double inclusion_prob(double p, int K, int L, std::size_t bucket_size) {
  if (bucket_size == 0) {
    throw std::invalid_argument("inclusion probability needs a nonempty bucket");
  }
  if (!(p >= 0.0 && p <= 1.0) || K < 1 || L < 1) {
    throw std::invalid_argument("inclusion probability needs p in [0, 1] and K, L >= 1");
  }
  const double hit = 1.0 - std::pow(1.0 - std::pow(p, K), L);
  return hit / static_cast<double>(bucket_size);
}

FeatureVector dissimilar_query(const HashSpec& spec, VectorView query) {
  if (spec.family != HashFamily::SignRandomProjection) {
    throw std::logic_error("negated queries are only meaningful for sign random projection");
  }
  FeatureVector out(query.begin(), query.end());
  for (double& x : out) {
    x = -x;
  }
  return out;
}

}  // namespace minsm
