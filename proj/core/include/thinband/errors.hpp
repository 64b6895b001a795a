#pragma once

#include <stdexcept>

namespace thinband {

/// A band-complex operation met data it cannot interpret (no valid free-arc
/// sequence, malformed complex, widths outside the expected cone image).
class structural_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A plane level hits a diagonal endpoint / strip boundary; the section
/// combinatorics are undefined there.
class critical_level_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace thinband
