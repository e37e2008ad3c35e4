#pragma once

#include <stdexcept>
#include <string>

namespace topomlp {

/// Raised on any contract violation: shape mismatch, bad input file,
/// non-finite values, invalid configuration.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw Error(message);
}

}  // namespace topomlp
