// SPDX-License-Identifier: Apache-2.0
#include "mimo/link.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <stdexcept>
#include <thread>

#include <Eigen/QR>

#include "mimo/errors.hpp"
#include "mimo/rng.hpp"

namespace mimo {

std::string scheme_label(SchemeId scheme) {
  switch (scheme) {
    case SchemeId::LbMuSm: return "LB-MU-SM";
    case SchemeId::ZfMuSm: return "ZF-MU-SM";
    case SchemeId::ZfRx: return "ZF-RX";
    case SchemeId::MlRx: return "ML-RX";
  }
  throw std::invalid_argument("scheme_label: unknown scheme");
}

SchemeId parse_scheme(const std::string& token) {
  std::string t;
  t.reserve(token.size());
  for (char ch : token) t.push_back(static_cast<char>(std::tolower(ch)));
  if (t == "lb" || t == "lb-mu-sm") return SchemeId::LbMuSm;
  if (t == "zf" || t == "zf-mu-sm") return SchemeId::ZfMuSm;
  if (t == "zf-rx") return SchemeId::ZfRx;
  if (t == "ml-rx" || t == "ml") return SchemeId::MlRx;
  throw ConfigError("unknown scheme '" + token +
                    "' (expected lb, zf, zf-rx or ml-rx)");
}

std::vector<SchemeId> parse_scheme_list(const std::string& tokens) {
  std::vector<SchemeId> out;
  std::string cur;
  for (char ch : tokens + ",") {
    if (ch == ',') {
      if (cur.empty())
        throw ConfigError("empty entry in scheme list '" + tokens + "'");
      out.push_back(parse_scheme(cur));
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(ch))) {
      cur.push_back(ch);
    }
  }
  return out;
}

TxVector transmit_lb(const UserPrecoder& user, const CVector& s,
                     const Constellation& c, int radius) {
  const PerturbationSolution sol = perturb(s, user.h_eff_inv, c, radius);
  if (!(sol.gamma > 0.0))
    throw std::invalid_argument("transmit_lb: zero symbol vector");
  TxVector t;
  t.gamma = sol.gamma;
  t.s_tilde = sol.s_tilde;
  t.x = (user.h_eff_inv * sol.s_tilde) / std::sqrt(sol.gamma);
  return t;
}

TxVector transmit_zf(const UserPrecoder& user, const CVector& s) {
  const double g = gamma_of(s, user.h_eff_inv);
  if (!(g > 0.0)) throw std::invalid_argument("transmit_zf: zero symbol vector");
  TxVector t;
  t.gamma = g;
  t.s_tilde = s;
  t.x = (user.h_eff_inv * s) / std::sqrt(g);
  return t;
}

CVector transmit_bd_plain(const CVector& s, const Constellation& c) {
  const double es = c.mean_energy();
  if (!(es > 0.0)) throw std::invalid_argument("transmit_bd_plain: empty constellation");
  return s / std::sqrt(static_cast<double>(s.size()) * es);
}

BitVec receive_lb(const CVector& y, double gamma, double scale,
                  const Constellation& c) {
  if (!(gamma > 0.0)) throw std::invalid_argument("receive_lb: gamma must be positive");
  if (!(scale > 0.0)) throw std::invalid_argument("receive_lb: scale must be positive");
  const CVector z = y * (std::sqrt(gamma) / scale);
  return qam_demodulate(modulo_fold(z, c.lattice_step), c);
}

BitVec receive_zf(const CVector& y, const CMatrix& channel, const Constellation& c) {
  if (channel.rows() != channel.cols() || channel.rows() != y.size())
    throw std::invalid_argument("receive_zf: channel must be square and match y");
  Eigen::ColPivHouseholderQR<CMatrix> dec(channel);
  dec.setThreshold(1e-10);
  if (dec.rank() < channel.cols())
    throw DegenerateChannelError("receive_zf: singular end-to-end channel");
  return qam_demodulate(dec.solve(y), c);
}

BitVec receive_ml(const CVector& y, const CMatrix& channel, const Constellation& c) {
  if (channel.rows() != channel.cols() || channel.rows() != y.size())
    throw std::invalid_argument("receive_ml: channel must be square and match y");
  const int n = static_cast<int>(y.size());
  const int order = c.order;
  if (order < 2) throw std::invalid_argument("receive_ml: empty constellation");
  double total = std::pow(static_cast<double>(order), n);
  if (total > 16'777'216.0)
    throw std::invalid_argument("receive_ml: candidate space too large");
  const long count = static_cast<long>(total);

  std::vector<int> digits(n, 0), best_digits(n, 0);
  CVector cand(n);
  double best_metric = 0.0;
  for (long i = 0; i < count; ++i) {
    // Candidate index in big-endian digits: dimension 0 most significant,
    // so ascending index order is lexicographic candidate order and strict
    // improvement keeps the smallest index on metric ties.
    long rem = i;
    for (int d = n - 1; d >= 0; --d) {
      digits[d] = static_cast<int>(rem % order);
      rem /= order;
    }
    for (int d = 0; d < n; ++d) cand(d) = c.points[digits[d]];
    const double metric = (y - channel * cand).squaredNorm();
    if (i == 0 || metric < best_metric) {
      best_metric = metric;
      best_digits = digits;
    }
  }

  const int bps = c.bits_per_symbol();
  BitVec bits(static_cast<std::size_t>(n) * bps);
  for (int d = 0; d < n; ++d)
    for (int b = 0; b < bps; ++b)
      bits[d * bps + b] = static_cast<std::uint8_t>((best_digits[d] >> (bps - 1 - b)) & 1);
  return bits;
}

int resolve_workers(int requested) {
  int n = requested > 0 ? requested
                        : static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (const char* env = std::getenv("MIMO_SIM_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || cap < 1)
      throw ConfigError("MIMO_SIM_THREADS must be a positive integer, got '" +
                        std::string(env) + "'");
    n = std::min<long>(n, cap);
  }
  return n;
}

namespace {

struct TrialOutcome {
  long long bit_errors = 0;
  long long redraws = 0;
};

TrialOutcome run_trial(const SystemConfig& cfg, SchemeId scheme, double sigma2,
                       int radius, const Constellation& cons, CounterRng& rng,
                       std::uint64_t seed_label) {
  TrialOutcome out;

  ChannelSet channels;
  PrecoderSet ps;
  for (int attempt = 0;; ++attempt) {
    channels = draw_channels(cfg, rng, seed_label);
    try {
      ps = build_precoder_set(channels, cfg);
      break;
    } catch (const DegenerateChannelError&) {
      ++out.redraws;
      if (attempt >= 128)
        throw NumericalError("run_ber: 128 degenerate channel draws in a row");
    }
  }

  const int l = cfg.streams_per_user;
  const int bits_per_user = l * cons.bits_per_symbol();
  const double sqrt_p = std::sqrt(cfg.per_user_power);

  std::vector<BitVec> tx_bits(cfg.n_users);
  std::vector<CVector> sym(cfg.n_users);
  for (int k = 0; k < cfg.n_users; ++k) {
    BitVec b(bits_per_user);
    const std::uint64_t w = rng.next_u64();
    for (int i = 0; i < bits_per_user; ++i)
      b[i] = static_cast<std::uint8_t>((w >> i) & 1);
    sym[k] = qam_modulate(b, cons);
    tx_bits[k] = std::move(b);
  }

  std::vector<CVector> x(cfg.n_users);
  std::vector<double> gamma(cfg.n_users, 0.0);
  const double plain_gain = 1.0 / std::sqrt(static_cast<double>(l) * cons.mean_energy());
  for (int k = 0; k < cfg.n_users; ++k) {
    switch (scheme) {
      case SchemeId::LbMuSm: {
        const TxVector t = transmit_lb(ps.users[k], sym[k], cons, radius);
        x[k] = t.x;
        gamma[k] = t.gamma;
        break;
      }
      case SchemeId::ZfMuSm: {
        const TxVector t = transmit_zf(ps.users[k], sym[k]);
        x[k] = t.x;
        gamma[k] = t.gamma;
        break;
      }
      case SchemeId::ZfRx:
      case SchemeId::MlRx:
        x[k] = transmit_bd_plain(sym[k], cons);
        break;
    }
  }

  // Everyone transmits through the same realization at once.
  CVector antenna = CVector::Zero(cfg.n_tx);
  for (int k = 0; k < cfg.n_users; ++k)
    antenna.noalias() += ps.users[k].nulling * (sqrt_p * x[k]);

  const double noise_sd = std::sqrt(sigma2);
  for (int k = 0; k < cfg.n_users; ++k) {
    CVector y = channels.users[k] * antenna;
    for (Eigen::Index i = 0; i < y.size(); ++i)
      y(i) += noise_sd * rng.next_cgaussian();

    BitVec rx;
    switch (scheme) {
      case SchemeId::LbMuSm:
      case SchemeId::ZfMuSm:
        rx = receive_lb(y, gamma[k], sqrt_p, cons);
        break;
      case SchemeId::ZfRx:
        rx = receive_zf(y, ps.users[k].h_eff * (sqrt_p * plain_gain), cons);
        break;
      case SchemeId::MlRx:
        rx = receive_ml(y, ps.users[k].h_eff * (sqrt_p * plain_gain), cons);
        break;
    }
    for (int i = 0; i < bits_per_user; ++i)
      out.bit_errors += (rx[i] != tx_bits[k][i]) ? 1 : 0;
  }
  return out;
}

}  // namespace

BerCurve run_ber(const SystemConfig& cfg, SchemeId scheme,
                 const std::vector<double>& snr_db, const StoppingRule& rule,
                 std::uint64_t seed, int radius, int workers) {
  cfg.validate();
  if (rule.min_trials < 1 || rule.max_trials < rule.min_trials || rule.batch < 1 ||
      rule.min_bit_errors < 0)
    throw ConfigError("run_ber: invalid stopping rule");
  if (radius < 0) throw ConfigError("run_ber: radius must be non-negative");
  if (snr_db.size() > 0xFFFFFFFFull)
    throw ConfigError("run_ber: too many SNR points");

  const Constellation cons = Constellation::qam4();
  const int nw = resolve_workers(workers);
  const long long bits_per_trial =
      static_cast<long long>(cfg.n_users) * cfg.streams_per_user * cons.bits_per_symbol();

  BerCurve curve;
  curve.scheme = scheme;
  curve.label = scheme_label(scheme);
  curve.seed = seed;
  curve.radius = radius;

  for (std::size_t si = 0; si < snr_db.size(); ++si) {
    const double sigma2 = cfg.per_user_power / std::pow(10.0, snr_db[si] / 10.0);
    long long trials = 0, errors = 0, redraws = 0;

    while (true) {
      const long long batch = std::min<long long>(rule.batch, rule.max_trials - trials);
      if (batch <= 0) break;

      std::vector<TrialOutcome> slot(nw);
      std::vector<std::exception_ptr> failure(nw);
      auto work = [&](int w) {
        try {
          for (long long t = trials + w; t < trials + batch; t += nw) {
            CounterRng rng(seed, (static_cast<std::uint64_t>(si) << 32) |
                                     static_cast<std::uint64_t>(t));
            const TrialOutcome r =
                run_trial(cfg, scheme, sigma2, radius, cons, rng, seed);
            slot[w].bit_errors += r.bit_errors;
            slot[w].redraws += r.redraws;
          }
        } catch (...) {
          failure[w] = std::current_exception();
        }
      };
      if (nw == 1) {
        work(0);
      } else {
        std::vector<std::thread> pool;
        pool.reserve(nw);
        for (int w = 0; w < nw; ++w) pool.emplace_back(work, w);
        for (std::thread& th : pool) th.join();
      }
      for (int w = 0; w < nw; ++w)
        if (failure[w]) std::rethrow_exception(failure[w]);
      for (int w = 0; w < nw; ++w) {
        errors += slot[w].bit_errors;
        redraws += slot[w].redraws;
      }
      trials += batch;

      if (errors >= rule.min_bit_errors && trials >= rule.min_trials) break;
    }

    BerPoint pt;
    pt.snr_db = snr_db[si];
    pt.trials = trials;
    pt.bits = trials * bits_per_trial;
    pt.bit_errors = errors;
    pt.ber = pt.bits > 0 ? static_cast<double>(errors) / static_cast<double>(pt.bits) : 0.0;
    pt.redraws = redraws;
    curve.points.push_back(pt);
  }
  return curve;
}

double diversity_slope(const BerCurve& curve, int tail_points) {
  if (tail_points < 2)
    throw std::invalid_argument("diversity_slope: need at least two tail points");
  const std::size_t n = curve.points.size();
  const std::size_t start = n > static_cast<std::size_t>(tail_points)
                                ? n - static_cast<std::size_t>(tail_points)
                                : 0;
  std::vector<double> xs, ys;
  for (std::size_t i = start; i < n; ++i) {
    if (curve.points[i].bit_errors <= 0) continue;  // nothing measured there
    xs.push_back(curve.points[i].snr_db);
    ys.push_back(std::log10(curve.points[i].ber));
  }
  if (xs.size() < 2)
    throw std::invalid_argument(
        "diversity_slope: fewer than two tail points with observed errors");

  const double m = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double denom = m * sxx - sx * sx;
  if (denom == 0.0)
    throw std::invalid_argument("diversity_slope: tail points share one SNR");
  return (m * sxy - sx * sy) / denom * 10.0;
}

}  // namespace mimo
