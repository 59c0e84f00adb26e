#pragma once

#include <stdexcept>
#include <string>

namespace cbr {

/// Raised for problems with input data (unreadable file, degenerate classes,
/// missing columns). The CLI maps it to exit status 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cbr
