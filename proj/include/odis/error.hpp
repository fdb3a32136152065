#pragma once

#include <stdexcept>
#include <string>

namespace odis {

/// Bad or inconsistent input data: unreadable files, dimension mismatches,
/// contract violations by pluggable components. Precondition violations on
/// arguments use std::invalid_argument instead.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace odis
