#pragma once

#include <stdexcept>
#include <string>

namespace voltsev {

/// Unreadable/unwritable files, malformed streams. CLI exit code 1.
struct io_error : std::runtime_error {
  explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

/// Inputs that parse but violate a contract (bad column, bad value,
/// inconsistent spec). CLI exit code 2.
struct validation_error : std::runtime_error {
  explicit validation_error(const std::string& what) : std::runtime_error(what) {}
};

/// Optimizer failed to converge. CLI exit code 3.
struct convergence_error : std::runtime_error {
  explicit convergence_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace voltsev
