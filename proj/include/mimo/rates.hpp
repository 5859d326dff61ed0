// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "mimo/precoder.hpp"
#include "mimo/types.hpp"

namespace mimo {

// Water-filling over parallel channel modes. eig_sq holds squared channel
// gains (lambda^2); powers is the optimal split of total_power among them.
struct WaterfillAllocation {
  RVector powers;
  double water_level = 0.0;   // 0 when nothing is allocated
  double achieved_rate = 0.0; // sum of log2(1 + gain * power / noise)
};

// Exact active-set solution: sort modes by inverse gain, find the largest
// active set whose common water level clears every member, allocate the
// difference. Modes with zero gain never receive power.
WaterfillAllocation waterfill(const RVector& eig_sq, double total_power,
                              double noise_var);

// Rate summary for one channel realization, in bits per channel use.
struct RateReport {
  std::string scheme;
  double rho = 0.0;
  std::vector<double> per_user;
  double sum = 0.0;
  std::vector<std::string> warnings;
};

enum class PowerConstraint { Total, PerUser };

// Closed-form ceiling of the nulling strategy: water-filling over every
// user's effective-channel modes. Total mode pools total_power across all
// users; PerUser mode gives each user an equal share and fills its own
// modes only.
RateReport c_bd(const ChannelSet& channels, const SystemConfig& cfg,
                double total_power, PowerConstraint mode = PowerConstraint::Total);

// Same computation on an already-built precoder set (one SVD pass reused
// across SNR points). noise_var comes from cfg at build time, so pass it
// explicitly here.
RateReport c_bd_from(const PrecoderSet& precoders, double total_power,
                     double noise_var, PowerConstraint mode);

// Plain channel inversion reference: each user's modes collapse into one
// effective gain (sum of inverse squared gains), a single log per user.
RateReport rate_ci(const PrecoderSet& precoders, double rho);

// Per-stream post-equalization SNR of the inverting transmitter for a
// given perturbed symbol vector: rho * xi_l^2 / gamma where xi_l is the
// magnitude of the symbol's projection on the l-th left singular vector
// and gamma is the total inversion power. Zero s_tilde has no defined SNR.
RVector per_stream_snr(const UserPrecoder& user, const CVector& s_tilde, double rho);

// Rate the perturbed-inversion link actually realizes for this symbol
// vector: sum of log2(1 + SNR_l).
double rate_realized(const UserPrecoder& user, const CVector& s_tilde, double rho);

// Achievable rate of the perturbed-inversion strategy with the power
// spread evenly over the user's modes: sum of log2(1 + rho * lambda_l^2 / L).
double rate_prop(const UserPrecoder& user, double rho);

// Sum of rate_prop over users (equal per-user power, rho each).
RateReport rate_sum_prop(const PrecoderSet& precoders, double rho);

}  // namespace mimo
