// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "mimo/channel.hpp"
#include "mimo/numeric.hpp"
#include "mimo/types.hpp"

namespace mimo {

// Per-user result of interference nulling: the orthonormal transmit basis
// M_k lying in the null space of every other user's channel, the effective
// single-user channel H_k * M_k it induces, and that channel's cached
// factorization and inverse (reused by the rate formulas, the
// perturbation search, and the link simulator).
struct UserPrecoder {
  CMatrix nulling;                        // n_tx x streams, orthonormal columns
  CMatrix h_eff;                          // streams x streams
  SvdFactorization<Complex> h_eff_svd;    // h_eff = U * diag(lambda) * V^H
  CMatrix h_eff_inv;
};

struct PrecoderSet {
  std::vector<UserPrecoder> users;
};

// Rows of every user's channel except user k, stacked in ascending user
// order. With a single user the stack is empty: a 0 x n_tx matrix, which
// downstream code treats as "nothing to null".
CMatrix stack_complement(const ChannelSet& channels, int user);

// Orthonormal basis of the null space of h_tilde: the trailing `streams`
// right-singular vectors. An empty stack (zero rows) yields the leading
// identity columns, since any orthonormal basis will do. Throws
// ConfigError when the null space is smaller than requested.
CMatrix null_space_precoder(const CMatrix& h_tilde, int streams);

// Builds every user's nulling basis and effective channel. Verifies that
// each stack's null space has exactly the dimension the square geometry
// leaves over, and rejects effective channels with condition number above
// 1e12 (DegenerateChannelError) so Monte Carlo callers can redraw.
PrecoderSet build_precoder_set(const ChannelSet& channels, const SystemConfig& cfg);

// Nulling combined with water-filling over the effective-channel modes:
// M_k = nulling_k * V_k * diag(sqrt(q_k)) with the power allocation q
// computed jointly across all users' modes under the given total budget.
// The composite U_k^H * H_k * M_k is diagonal.
std::vector<CMatrix> bd_wf_precoder(const ChannelSet& channels,
                                    const SystemConfig& cfg, double total_power);

}  // namespace mimo
