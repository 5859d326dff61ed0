// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "mimo/rng.hpp"
#include "mimo/types.hpp"

namespace mimo {

// One flat-fading realization: per-user n_rx x n_tx matrices with i.i.d.
// unit-variance circularly-symmetric complex Gaussian entries.
struct ChannelSet {
  std::vector<CMatrix> users;
  std::uint64_t seed = 0;
};

// Draws every user's matrix from the given stream, filling entries user by
// user in row-major order. seed_label is recorded on the result only.
ChannelSet draw_channels(const SystemConfig& cfg, CounterRng& rng,
                         std::uint64_t seed_label);

// Stand-alone draw on stream 0 of the given seed; identical seed gives a
// bit-identical set.
ChannelSet draw_channels(const SystemConfig& cfg, std::uint64_t seed);

}  // namespace mimo
