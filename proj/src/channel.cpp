// SPDX-License-Identifier: Apache-2.0
#include "mimo/channel.hpp"

namespace mimo {

ChannelSet draw_channels(const SystemConfig& cfg, CounterRng& rng,
                         std::uint64_t seed_label) {
  cfg.validate();
  ChannelSet out;
  out.seed = seed_label;
  out.users.reserve(cfg.n_users);
  for (int k = 0; k < cfg.n_users; ++k) {
    CMatrix h(cfg.n_rx, cfg.n_tx);
    for (int r = 0; r < cfg.n_rx; ++r)
      for (int c = 0; c < cfg.n_tx; ++c) h(r, c) = rng.next_cgaussian();
    out.users.push_back(std::move(h));
  }
  return out;
}

ChannelSet draw_channels(const SystemConfig& cfg, std::uint64_t seed) {
  CounterRng rng(seed, 0);
  return draw_channels(cfg, rng, seed);
}

}  // namespace mimo
