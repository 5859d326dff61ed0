// SPDX-License-Identifier: Apache-2.0
//
// Shared test fixtures: deterministic random inputs and independent
// reference implementations the optimized code has to match. The
// references favor obviousness over speed on purpose.
#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "mimo/channel.hpp"
#include "mimo/constellation.hpp"
#include "mimo/lattice.hpp"
#include "mimo/precoder.hpp"
#include "mimo/rates.hpp"
#include "mimo/rng.hpp"
#include "mimo/types.hpp"

namespace testsupport {

using namespace mimo;

inline constexpr std::array<std::pair<int, int>, 3> kScenarios = {{
    {2, 2},  // n_rx, n_users
    {2, 3},
    {3, 2},
}};

inline CMatrix random_cmatrix(Eigen::Index rows, Eigen::Index cols, CounterRng& rng) {
  CMatrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = rng.next_cgaussian();
  return m;
}

inline BitVec random_bits(std::size_t n, CounterRng& rng) {
  BitVec bits(n);
  for (std::size_t i = 0; i < n; ++i)
    bits[i] = static_cast<std::uint8_t>(rng.next_u32() & 1u);
  return bits;
}

inline CVector random_qam_vector(Eigen::Index n, const Constellation& c,
                                 CounterRng& rng) {
  return qam_modulate(random_bits(static_cast<std::size_t>(n) * c.bits_per_symbol(), rng), c);
}

// Unitary matrix from the full QR of a random complex Gaussian matrix.
inline CMatrix random_unitary(Eigen::Index n, CounterRng& rng) {
  const CMatrix g = random_cmatrix(n, n, rng);
  Eigen::HouseholderQR<CMatrix> qr(g);
  return qr.householderQ() * CMatrix::Identity(n, n);
}

// Exhaustive reference for the perturbation search. Walks every integer
// coefficient vector in the box in lexicographic key order (real parts by
// ascending dimension, then imaginary parts), keeps strict improvements
// only, and scores through gamma_of. The production search must reproduce
// its gamma and offset bit for bit.
struct BruteForceResult {
  CVector p;
  CVector s_tilde;
  double gamma = 0.0;
};

inline BruteForceResult brute_force_perturb(const CVector& s, const CMatrix& h_eff_inv,
                                            double step, int radius) {
  const Eigen::Index n = s.size();
  BruteForceResult best;
  std::vector<int> cur(2 * static_cast<std::size_t>(n), -radius);
  bool first = true;
  while (true) {
    CVector cv(n);
    for (Eigen::Index i = 0; i < n; ++i)
      cv(i) = Complex(static_cast<double>(cur[i]),
                      static_cast<double>(cur[n + i]));
    const CVector st = s + step * cv;
    const double g = gamma_of(st, h_eff_inv);
    if (first || g < best.gamma) {
      first = false;
      best.gamma = g;
      best.s_tilde = st;
      best.p = step * cv;
    }
    // odometer, last coordinate fastest: visits keys in ascending order
    int pos = static_cast<int>(cur.size()) - 1;
    while (pos >= 0 && cur[pos] == radius) {
      cur[pos] = -radius;
      --pos;
    }
    if (pos < 0) break;
    ++cur[pos];
  }
  return best;
}

// Worst violation of the water-filling optimality conditions, normalized
// so a single tolerance applies: power conservation, non-negativity,
// equal water level on active modes, no level above an inactive mode.
inline double waterfill_kkt_violation(const RVector& eig_sq, double total_power,
                                      double noise_var,
                                      const WaterfillAllocation& alloc) {
  double worst = 0.0;
  double sum = 0.0;
  bool any_active = false;
  for (Eigen::Index i = 0; i < eig_sq.size(); ++i) {
    const double q = alloc.powers(i);
    worst = std::max(worst, -q);  // negativity
    sum += q;
    if (eig_sq(i) <= 0.0) {
      worst = std::max(worst, std::abs(q));  // zero-gain modes get nothing
      continue;
    }
    const double inv_gain = noise_var / eig_sq(i);
    const double scale = std::max(1.0, alloc.water_level);
    if (q > 1e-12 * std::max(1.0, total_power)) {
      any_active = true;
      worst = std::max(worst, std::abs(q + inv_gain - alloc.water_level) / scale);
    } else {
      worst = std::max(worst, (alloc.water_level - inv_gain) / scale);
    }
  }
  if (any_active)
    worst = std::max(worst, std::abs(sum - total_power) / std::max(1.0, total_power));
  else
    worst = std::max(worst, std::abs(sum));
  return worst;
}

// Equal split of the budget over every listed mode, zero-gain ones too.
inline double equal_power_rate(const RVector& eig_sq, double total_power,
                               double noise_var) {
  if (eig_sq.size() == 0) return 0.0;
  const double q = total_power / static_cast<double>(eig_sq.size());
  double r = 0.0;
  for (Eigen::Index i = 0; i < eig_sq.size(); ++i)
    r += std::log2(1.0 + eig_sq(i) * q / noise_var);
  return r;
}

// Largest interference leakage of a precoder set, relative to the channel
// scale: max over (user k, other user j) of ||H_j * M_k|| / ||H_j||.
inline double worst_leakage(const ChannelSet& channels, const PrecoderSet& ps) {
  double worst = 0.0;
  for (std::size_t k = 0; k < ps.users.size(); ++k)
    for (std::size_t j = 0; j < channels.users.size(); ++j) {
      if (j == k) continue;
      const double num = (channels.users[j] * ps.users[k].nulling).norm();
      const double den = channels.users[j].norm();
      worst = std::max(worst, num / den);
    }
  return worst;
}

}  // namespace testsupport
