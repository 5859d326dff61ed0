// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace mimo {

// Invalid user-facing configuration (dimensions, grids, option values).
// The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure (decomposition did not converge, singular system where
// an invertible one is required). The CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// A drawn channel is too ill-conditioned to precode on. Monte Carlo loops
// catch this and redraw; anything else treats it as a NumericalError.
class DegenerateChannelError : public NumericalError {
 public:
  explicit DegenerateChannelError(const std::string& what) : NumericalError(what) {}
};

// Filesystem failure while reading or writing results. Exit code 4.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mimo
