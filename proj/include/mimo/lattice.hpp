// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

#include "mimo/constellation.hpp"
#include "mimo/types.hpp"

namespace mimo {

// Outcome of the transmit-power search: the chosen lattice offset p (every
// component an integer multiple of the lattice step, real and imaginary),
// the perturbed symbol vector s + p, and the resulting inversion power
// gamma = ||B (s + p)||^2 where B is the inverted effective channel.
struct PerturbationSolution {
  CVector p;
  CVector s_tilde;
  double gamma = 0.0;
  std::int64_t candidates_examined = 0;
};

// gamma = ||h_eff_inv * s_tilde||^2, the power the inverting transmitter
// must spend on this symbol vector before normalization.
double gamma_of(const CVector& s_tilde, const CMatrix& h_eff_inv);

// Minimizes gamma_of(s + step * c, h_eff_inv) over integer coefficient
// vectors c (independent real and imaginary parts, each limited to
// [-radius, radius]). Exact within the box: a depth-first search over a
// triangularized system enumerates candidates and prunes only branches
// that provably cannot reach the incumbent, and every surviving candidate
// is scored by the same gamma_of expression a plain enumeration would use,
// so results match exhaustive search bit for bit.
//
// Ties on gamma resolve to the lexicographically smallest coefficient key
// (real parts in ascending dimension order, then imaginary parts).
// radius = 0 returns p = 0 and gamma_of(s) unchanged.
PerturbationSolution perturb(const CVector& s, const CMatrix& h_eff_inv,
                             const Constellation& c, int radius = 2);

}  // namespace mimo
