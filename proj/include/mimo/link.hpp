// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mimo/channel.hpp"
#include "mimo/constellation.hpp"
#include "mimo/lattice.hpp"
#include "mimo/precoder.hpp"
#include "mimo/types.hpp"

namespace mimo {

// The four downlink schemes under comparison. All of them null inter-user
// interference at the transmitter; they differ in how the remaining
// single-user channel is handled.
//   LbMuSm: inverted at the transmitter with a lattice perturbation, modulo
//           receiver (the lattice-based scheme under study).
//   ZfMuSm: same inversion without perturbation, same receiver.
//   ZfRx:   plain transmission, zero-forcing (inverting) receiver.
//   MlRx:   plain transmission, exhaustive maximum-likelihood receiver.
enum class SchemeId { LbMuSm, ZfMuSm, ZfRx, MlRx };

std::string scheme_label(SchemeId scheme);
SchemeId parse_scheme(const std::string& token);
std::vector<SchemeId> parse_scheme_list(const std::string& tokens);

// Stream-domain transmit vector for one user. x is what enters the user's
// nulling basis; after perturbation and inversion it is normalized to
// unit power symbol by symbol, and gamma records the inversion power the
// receiver needs for rescaling.
struct TxVector {
  CVector x;
  double gamma = 0.0;
  CVector s_tilde;
};

// Perturbed channel inversion: searches the lattice offset, inverts, and
// normalizes to ||x|| = 1. Throws std::invalid_argument on an all-zero
// symbol vector (nothing to normalize).
TxVector transmit_lb(const UserPrecoder& user, const CVector& s,
                     const Constellation& c, int radius = 2);

// Plain channel inversion: identical to transmit_lb with a zero radius.
TxVector transmit_zf(const UserPrecoder& user, const CVector& s);

// No inversion at all: symbols scaled by 1 / sqrt(streams * mean energy)
// so the expected transmit power is 1.
CVector transmit_bd_plain(const CVector& s, const Constellation& c);

// Modulo receiver: rescale by sqrt(gamma) / scale, fold into the
// fundamental region, slice. scale is the amplitude the transmitter
// applied on top of the unit-power vector (sqrt of per-user power).
BitVec receive_lb(const CVector& y, double gamma, double scale,
                  const Constellation& c);

// Zero-forcing receiver: invert the given end-to-end channel and slice.
// Throws DegenerateChannelError when that channel is singular.
BitVec receive_zf(const CVector& y, const CMatrix& channel, const Constellation& c);

// Exhaustive maximum-likelihood receiver over all order^streams candidate
// vectors; ties resolve to the lexicographically smallest candidate index.
BitVec receive_ml(const CVector& y, const CMatrix& channel, const Constellation& c);

// Monte Carlo stopping rule, evaluated at batch boundaries only so that
// results do not depend on how trials are scheduled: stop once bit errors
// and trials both reach their floors, or at the trial cap.
struct StoppingRule {
  long long min_bit_errors = 200;
  long long min_trials = 2000;
  long long max_trials = 1000000;
  int batch = 256;
};

struct BerPoint {
  double snr_db = 0.0;
  long long trials = 0;
  long long bits = 0;
  long long bit_errors = 0;
  double ber = 0.0;
  long long redraws = 0;
};

struct BerCurve {
  SchemeId scheme = SchemeId::LbMuSm;
  std::string label;
  std::vector<BerPoint> points;
  std::uint64_t seed = 0;
  int radius = 2;
};

// Worker count resolution: an explicit request wins, otherwise hardware
// parallelism; the MIMO_SIM_THREADS environment variable caps the result.
int resolve_workers(int requested);

// Full downlink Monte Carlo for one scheme. Every trial draws its own
// channel (degenerate draws are redrawn and counted), modulates fresh
// bits, sends all users simultaneously through the same realization, and
// demodulates per user. Per-trial random streams are keyed by
// (seed, SNR index, trial index), and counters are integers, so the curve
// is bit-identical for any worker count.
BerCurve run_ber(const SystemConfig& cfg, SchemeId scheme,
                 const std::vector<double>& snr_db, const StoppingRule& rule,
                 std::uint64_t seed, int radius = 2, int workers = 0);

// Least-squares slope of log10(BER) against SNR over the last tail_points
// points of the curve, reported in decades per 10 dB (negative for a
// falling curve). Zero-error points are excluded; fewer than two usable
// points is an error.
double diversity_slope(const BerCurve& curve, int tail_points = 3);

}  // namespace mimo
