// SPDX-License-Identifier: Apache-2.0
#include "mimo/constellation.hpp"

#include <cmath>
#include <stdexcept>

namespace mimo {

int Constellation::bits_per_symbol() const {
  int b = 0;
  for (int m = order; m > 1; m >>= 1) ++b;
  return b;
}

double Constellation::mean_energy() const {
  double e = 0.0;
  for (const Complex& p : points) e += std::norm(p);
  return e / static_cast<double>(points.size());
}

Constellation Constellation::qam4() {
  Constellation c;
  c.order = 4;
  c.lattice_step = 2.0;
  c.points = {
      {+0.5, +0.5},  // 00
      {-0.5, +0.5},  // 01
      {+0.5, -0.5},  // 10
      {-0.5, -0.5},  // 11
  };
  return c;
}

CVector qam_modulate(const BitVec& bits, const Constellation& c) {
  const int bps = c.bits_per_symbol();
  if (bps <= 0 || c.points.empty())
    throw std::invalid_argument("qam_modulate: empty constellation");
  if (bits.size() % static_cast<std::size_t>(bps) != 0)
    throw std::invalid_argument("qam_modulate: bit count not a multiple of " +
                                std::to_string(bps));
  const Eigen::Index n = static_cast<Eigen::Index>(bits.size()) / bps;
  CVector s(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    int idx = 0;
    for (int b = 0; b < bps; ++b) {
      const std::uint8_t bit = bits[i * bps + b];
      if (bit > 1) throw std::invalid_argument("qam_modulate: bits must be 0 or 1");
      idx = (idx << 1) | bit;
    }
    s(i) = c.points[idx];
  }
  return s;
}

BitVec qam_demodulate(const CVector& symbols, const Constellation& c) {
  const int bps = c.bits_per_symbol();
  if (bps <= 0 || c.points.empty())
    throw std::invalid_argument("qam_demodulate: empty constellation");

  // Visit points in (re, im) ascending order and keep strict improvements,
  // so exact distance ties resolve to the smallest real part, then the
  // smallest imaginary part.
  std::vector<int> order(c.points.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  for (std::size_t i = 1; i < order.size(); ++i)
    for (std::size_t j = i; j > 0; --j) {
      const Complex& a = c.points[order[j]];
      const Complex& b = c.points[order[j - 1]];
      if (a.real() < b.real() ||
          (a.real() == b.real() && a.imag() < b.imag()))
        std::swap(order[j], order[j - 1]);
      else
        break;
    }

  BitVec bits(static_cast<std::size_t>(symbols.size()) * bps);
  for (Eigen::Index i = 0; i < symbols.size(); ++i) {
    int best = order[0];
    double best_d = std::norm(symbols(i) - c.points[best]);
    for (std::size_t j = 1; j < order.size(); ++j) {
      const double d = std::norm(symbols(i) - c.points[order[j]]);
      if (d < best_d) {
        best_d = d;
        best = order[j];
      }
    }
    for (int b = 0; b < bps; ++b)
      bits[i * bps + b] = static_cast<std::uint8_t>((best >> (bps - 1 - b)) & 1);
  }
  return bits;
}

Complex modulo_fold(Complex x, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("modulo_fold: step must be positive");
  const double re = x.real() - step * std::floor(x.real() / step + 0.5);
  const double im = x.imag() - step * std::floor(x.imag() / step + 0.5);
  return {re, im};
}

CVector modulo_fold(const CVector& x, double step) {
  CVector out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out(i) = modulo_fold(x(i), step);
  return out;
}

}  // namespace mimo
