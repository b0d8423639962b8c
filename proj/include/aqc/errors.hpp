#pragma once

#include <stdexcept>
#include <string>

namespace aqc {

/// Invalid arguments or misuse of an API precondition.
struct UsageError : std::runtime_error {
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed configuration (bad key, unresolvable label, missing seed, ...).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// The symbol failed the constant-rank assumption at some sampled point.
struct RankViolationError : std::runtime_error {
  explicit RankViolationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A solver produced a non-finite value.
struct DivergedError : std::runtime_error {
  explicit DivergedError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Requested construction cannot be resolved on the given grid.
struct ResolutionError : std::runtime_error {
  explicit ResolutionError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Filesystem failure while writing reports or field dumps.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace aqc
