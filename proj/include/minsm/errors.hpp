#pragma once

#include <stdexcept>

namespace minsm {

/// Internal state and auxiliary structures disagree; the chain must abort.
class ConsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace minsm
