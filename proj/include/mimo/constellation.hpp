// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "mimo/types.hpp"

namespace mimo {

// Gray-labeled square constellation together with the lattice step A of
// the modulo receiver. Every point lies strictly inside the fundamental
// region [-A/2, A/2)^2, so no two points are congruent modulo A and the
// fold is transparent to clean symbols.
//
// 4-QAM labeling (bits b0 b1, index = b0<<1 | b1):
//   00 -> (+1+j)/2    01 -> (-1+j)/2
//   10 -> (+1-j)/2    11 -> (-1-j)/2
// Adjacent decision regions differ in exactly one bit.
struct Constellation {
  int order = 0;
  double lattice_step = 0.0;
  std::vector<Complex> points;

  int bits_per_symbol() const;
  double mean_energy() const;

  static Constellation qam4();
};

// Maps bits to symbols, consuming bits_per_symbol() bits per entry, first
// bit most significant. Throws std::invalid_argument on a ragged tail.
CVector qam_modulate(const BitVec& bits, const Constellation& c);

// Nearest-point decision with a deterministic tie-break: among equidistant
// points the one with the smaller real part wins, then the smaller
// imaginary part. The origin therefore decodes to (-1-j)/2, bits 11.
BitVec qam_demodulate(const CVector& symbols, const Constellation& c);

// Folds each component (real and imaginary separately) into [-A/2, A/2):
// x - A * floor(x / A + 1/2). Idempotent; adding any integer multiple of A
// to a component does not change the result.
Complex modulo_fold(Complex x, double step);
CVector modulo_fold(const CVector& x, double step);

}  // namespace mimo
