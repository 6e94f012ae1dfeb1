#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace dcov {

// Config / validation problems. CLI maps these to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionError : ConfigError {
  using ConfigError::ConfigError;
};

// Tr(C) too small to normalize into a density operator.
struct DegenerateTraceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Joint noise covariance has a genuinely negative eigenvalue.
struct IndefiniteCovarianceError : ConfigError {
  using ConfigError::ConfigError;
};

// Non-finite state entries after a micro step. Exit code 3.
struct NumericalBlowupError : std::runtime_error {
  double t;
  std::uint64_t stream_index;
  NumericalBlowupError(const std::string& msg, double t_,
                       std::uint64_t stream_index_)
      : std::runtime_error(msg), t(t_), stream_index(stream_index_) {}
};

// State norm fell below the floor used by the xi-field denominators.
struct NormCollapseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Recorded series does not cover the requested window.
struct WindowUnderflowError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// All sweep points are noise-dominated. Exit code 4.
struct InconclusiveSweepError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace dcov
