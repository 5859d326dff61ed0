// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mimo/errors.hpp"

namespace mimo {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using BitVec = std::vector<std::uint8_t>;

// Square multiuser downlink geometry: every user runs as many spatial
// streams as it has receive antennas, and the transmitter has exactly
// enough antennas to serve all users (n_tx = n_users * n_rx). This is the
// regime where interference nulling consumes the whole spare dimension.
struct SystemConfig {
  int n_tx = 4;
  int n_rx = 2;
  int n_users = 2;
  int streams_per_user = 2;
  int qam_order = 4;
  double noise_var = 1.0;
  double per_user_power = 1.0;

  void validate() const {
    if (n_rx < 1 || n_users < 1)
      throw ConfigError("config: antenna and user counts must be at least 1");
    if (streams_per_user != n_rx)
      throw ConfigError("config: streams_per_user must equal n_rx (got " +
                        std::to_string(streams_per_user) + " vs " +
                        std::to_string(n_rx) + ")");
    if (n_tx != n_users * n_rx)
      throw ConfigError("config: n_tx must equal n_users * n_rx (got " +
                        std::to_string(n_tx) + " vs " +
                        std::to_string(n_users * n_rx) + ")");
    if (qam_order != 4)
      throw ConfigError("config: only 4-QAM is supported (qam_order = " +
                        std::to_string(qam_order) + ")");
    if (!(noise_var > 0.0))
      throw ConfigError("config: noise_var must be positive");
    if (!(per_user_power > 0.0))
      throw ConfigError("config: per_user_power must be positive");
  }

  // Per-user SNR, power over noise.
  double rho() const { return per_user_power / noise_var; }
};

// Convenience builder for the square geometry.
inline SystemConfig make_config(int n_rx, int n_users) {
  SystemConfig cfg;
  cfg.n_rx = n_rx;
  cfg.n_users = n_users;
  cfg.streams_per_user = n_rx;
  cfg.n_tx = n_users * n_rx;
  return cfg;
}

}  // namespace mimo
