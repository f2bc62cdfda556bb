#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "minsm/dataset.hpp"

namespace minsm {

enum class ClusterId : std::uint64_t {};

inline std::uint64_t to_underlying(ClusterId id) { return static_cast<std::uint64_t>(id); }

/// Partition `cluster` into `left` and `right`: disjoint, both nonempty,
/// covering the cluster's members.
struct SplitMove {
  ClusterId cluster;
  std::vector<PointId> left;
  std::vector<PointId> right;
};

struct MergeMove {
  ClusterId a;
  ClusterId b;
};

/// Degenerate draw; counted as a rejected iteration.
struct NoOpMove {
  std::string reason;
};

using Move = std::variant<SplitMove, MergeMove, NoOpMove>;

inline bool is_noop(const Move& m) { return std::holds_alternative<NoOpMove>(m); }

}  // namespace minsm
