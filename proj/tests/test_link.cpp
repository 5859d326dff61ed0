// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "mimo/link.hpp"
#include "support.hpp"

using namespace mimo;
using namespace testsupport;

namespace {

PrecoderSet identity_precoders(int streams, int users) {
  PrecoderSet ps;
  for (int k = 0; k < users; ++k) {
    UserPrecoder u;
    u.nulling = CMatrix::Identity(streams * users, streams);
    u.h_eff = CMatrix::Identity(streams, streams);
    u.h_eff_svd = svd(u.h_eff);
    u.h_eff_inv = CMatrix::Identity(streams, streams);
    ps.users.push_back(u);
  }
  return ps;
}

}  // namespace

TEST_CASE("scheme labels and parsing") {
  CHECK(scheme_label(SchemeId::LbMuSm) == "LB-MU-SM");
  CHECK(scheme_label(SchemeId::ZfMuSm) == "ZF-MU-SM");
  CHECK(scheme_label(SchemeId::ZfRx) == "ZF-RX");
  CHECK(scheme_label(SchemeId::MlRx) == "ML-RX");
  CHECK(parse_scheme("lb") == SchemeId::LbMuSm);
  CHECK(parse_scheme("LB-MU-SM") == SchemeId::LbMuSm);
  CHECK(parse_scheme("zf") == SchemeId::ZfMuSm);
  CHECK(parse_scheme("zf-rx") == SchemeId::ZfRx);
  CHECK(parse_scheme("ML") == SchemeId::MlRx);
  CHECK_THROWS_AS(parse_scheme("dirty-paper"), ConfigError);
  const auto list = parse_scheme_list("lb, zf-rx ,ml");
  REQUIRE(list.size() == 3);
  CHECK(list[0] == SchemeId::LbMuSm);
  CHECK(list[1] == SchemeId::ZfRx);
  CHECK(list[2] == SchemeId::MlRx);
  CHECK_THROWS_AS(parse_scheme_list("lb,,zf"), ConfigError);
}

TEST_CASE("perturbed transmit on the identity channel normalizes the offset vector") {
  const Constellation c = Constellation::qam4();
  CounterRng rng(61, 0);
  const PrecoderSet ps = identity_precoders(2, 1);
  for (int it = 0; it < 20; ++it) {
    const CVector s = random_qam_vector(2, c, rng);
    const TxVector tx = transmit_lb(ps.users[0], s, c, 2);
    CHECK(tx.x.norm() == doctest::Approx(1.0).epsilon(1e-12));
    // Identity channel: no offset helps, so x is s scaled to unit power.
    CHECK((tx.x - s / s.norm()).norm() < 1e-12);
    CHECK(tx.gamma == doctest::Approx(s.squaredNorm()).epsilon(1e-12));
  }
}

TEST_CASE("radius-zero perturbed transmit equals the plain inversion transmit") {
  const Constellation c = Constellation::qam4();
  CounterRng rng(62, 0);
  const SystemConfig cfg = make_config(2, 2);
  for (int it = 0; it < 30; ++it) {
    ChannelSet set = draw_channels(cfg, rng, 62);
    PrecoderSet ps;
    try {
      ps = build_precoder_set(set, cfg);
    } catch (const DegenerateChannelError&) {
      continue;
    }
    const CVector s = random_qam_vector(2, c, rng);
    const TxVector a = transmit_lb(ps.users[0], s, c, 0);
    const TxVector b = transmit_zf(ps.users[0], s);
    CHECK(a.gamma == b.gamma);
    CHECK((a.x - b.x).norm() == 0.0);
    CHECK(a.x.norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("modulo receiver undoes lattice offsets exactly without noise") {
  const Constellation c = Constellation::qam4();
  CounterRng rng(63, 0);
  const PrecoderSet ps = identity_precoders(2, 1);
  for (int it = 0; it < 200; ++it) {
    const BitVec bits = random_bits(4, rng);
    const CVector s = qam_modulate(bits, c);
    // Receive s plus a random lattice offset, scaled as the receiver expects.
    CVector offset(2);
    for (int l = 0; l < 2; ++l) {
      const double re = c.lattice_step * (static_cast<int>(rng.next_u32() % 5) - 2);
      const double im = c.lattice_step * (static_cast<int>(rng.next_u32() % 5) - 2);
      offset(l) = Complex(re, im);
    }
    const double gamma = 1.7;
    const CVector y = (s + offset) / std::sqrt(gamma);
    const BitVec out = receive_lb(y, gamma, 1.0, c);
    CHECK(out == bits);
  }
}

TEST_CASE("single-user loopback has no errors for every scheme") {
  const Constellation c = Constellation::qam4();
  for (const auto& [n_rx, n_users] : kScenarios) {
    const SystemConfig cfg = make_config(n_rx, n_users);
    CounterRng rng(64, static_cast<uint64_t>(n_rx * 16 + n_users));
    for (int it = 0; it < 25; ++it) {
      ChannelSet set = draw_channels(cfg, rng, 64);
      PrecoderSet ps;
      try {
        ps = build_precoder_set(set, cfg);
      } catch (const DegenerateChannelError&) {
        continue;
      }
      const int L = cfg.streams_per_user;
      for (int k = 0; k < cfg.n_users; ++k) {
        const BitVec bits = random_bits(2 * L, rng);
        const CVector s = qam_modulate(bits, c);

        // Perturbed and plain inversion both go through the modulo receiver.
        const TxVector lb = transmit_lb(ps.users[k], s, c, 2);
        const CVector y_lb = set.users[k] * (ps.users[k].nulling * lb.x);
        CHECK(receive_lb(y_lb, lb.gamma, 1.0, c) == bits);

        const TxVector zf = transmit_zf(ps.users[k], s);
        const CVector y_zf = set.users[k] * (ps.users[k].nulling * zf.x);
        CHECK(receive_lb(y_zf, zf.gamma, 1.0, c) == bits);

        // Receiver-side equalization schemes use the unprecoded transmit;
        // the end-to-end channel they invert includes the transmit scale.
        const CVector x_plain = transmit_bd_plain(s, c);
        const CVector y_rx = ps.users[k].h_eff * x_plain;
        const double scale = 1.0 / std::sqrt(L * c.mean_energy());
        const CMatrix end_to_end = scale * ps.users[k].h_eff;
        CHECK(receive_zf(y_rx, end_to_end, c) == bits);
        CHECK(receive_ml(y_rx, end_to_end, c) == bits);
      }
    }
  }
}

TEST_CASE("pure noise gives a coin-flip bit error rate through the modulo receiver") {
  const Constellation c = Constellation::qam4();
  CounterRng rng(65, 0);
  long errors = 0, total = 0;
  for (int it = 0; it < 12500; ++it) {
    const BitVec bits = random_bits(4, rng);
    CVector y(2);
    for (int l = 0; l < 2; ++l) y(l) = 3.0 * rng.next_cgaussian();
    const BitVec out = receive_lb(y, 1.0, 1.0, c);
    for (int b = 0; b < 4; ++b) errors += (out[b] != bits[b]) ? 1 : 0;
    total += 4;
  }
  const double ber = static_cast<double>(errors) / static_cast<double>(total);
  CHECK(ber == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("perturbation never increases the power penalty") {
  const Constellation c = Constellation::qam4();
  CounterRng rng(66, 0);
  const SystemConfig cfg = make_config(2, 2);
  int strict_wins = 0, used = 0;
  for (int it = 0; it < 400; ++it) {
    ChannelSet set = draw_channels(cfg, rng, 66);
    PrecoderSet ps;
    try {
      ps = build_precoder_set(set, cfg);
    } catch (const DegenerateChannelError&) {
      continue;
    }
    const CVector s = random_qam_vector(2, c, rng);
    const TxVector lb = transmit_lb(ps.users[0], s, c, 2);
    const TxVector zf = transmit_zf(ps.users[0], s);
    CHECK(lb.gamma <= zf.gamma);
    if (lb.gamma < zf.gamma) ++strict_wins;
    ++used;
  }
  REQUIRE(used >= 380);
  // On well-conditioned draws the zero offset is already optimal, but the
  // search must find strict improvements on a solid share of channels.
  CHECK(strict_wins > used / 5);
}

TEST_CASE("exhaustive receiver agrees with forced equalization at high SNR") {
  const Constellation c = Constellation::qam4();
  CounterRng rng(67, 0);
  const SystemConfig cfg = make_config(2, 2);
  int compared = 0;
  for (int it = 0; it < 60; ++it) {
    ChannelSet set = draw_channels(cfg, rng, 67);
    PrecoderSet ps;
    try {
      ps = build_precoder_set(set, cfg);
    } catch (const DegenerateChannelError&) {
      continue;
    }
    const BitVec bits = random_bits(4, rng);
    const CVector s = qam_modulate(bits, c);
    const CVector x = transmit_bd_plain(s, c);
    CVector y = ps.users[0].h_eff * x;
    for (int l = 0; l < 2; ++l) y(l) += 1e-7 * rng.next_cgaussian();
    const double scale = 1.0 / std::sqrt(2 * c.mean_energy());
    const CMatrix end_to_end = scale * ps.users[0].h_eff;
    CHECK(receive_ml(y, end_to_end, c) == receive_zf(y, end_to_end, c));
    ++compared;
  }
  CHECK(compared >= 55);
}

TEST_CASE("full downlink is interference-free end to end") {
  const Constellation c = Constellation::qam4();
  const SystemConfig cfg = make_config(2, 3);
  CounterRng rng(68, 0);
  for (int it = 0; it < 20; ++it) {
    ChannelSet set = draw_channels(cfg, rng, 68);
    PrecoderSet ps;
    try {
      ps = build_precoder_set(set, cfg);
    } catch (const DegenerateChannelError&) {
      continue;
    }
    // Superimpose all users' precoded signals at the array, then check each
    // receiver sees only its own effective channel output.
    std::vector<TxVector> txs;
    CVector antenna = CVector::Zero(cfg.n_tx);
    for (int k = 0; k < cfg.n_users; ++k) {
      const CVector s = random_qam_vector(2, c, rng);
      txs.push_back(transmit_lb(ps.users[k], s, c, 2));
      antenna += ps.users[k].nulling * txs.back().x;
    }
    for (int k = 0; k < cfg.n_users; ++k) {
      const CVector own = ps.users[k].h_eff * txs[k].x;
      const CVector got = set.users[k] * antenna;
      CHECK((got - own).norm() < 1e-8);
    }
  }
}

TEST_CASE("monte carlo runner: noiseless points decode perfectly") {
  for (const auto& [n_rx, n_users] : kScenarios) {
    const SystemConfig base = make_config(n_rx, n_users);
    StoppingRule stop;
    stop.min_bit_errors = 1;
    stop.min_trials = 30;
    stop.max_trials = 30;
    stop.batch = 8;
    for (SchemeId scheme :
         {SchemeId::LbMuSm, SchemeId::ZfMuSm, SchemeId::ZfRx, SchemeId::MlRx}) {
      const BerCurve curve =
          run_ber(base, scheme, {300.0}, stop, 99, 2, 1);
      REQUIRE(curve.points.size() == 1);
      CHECK(curve.points[0].bit_errors == 0);
      CHECK(curve.points[0].ber == 0.0);
      CHECK(curve.points[0].trials >= 30);
    }
  }
}

TEST_CASE("monte carlo runner is reproducible and thread-count independent") {
  const SystemConfig cfg = make_config(2, 2);
  StoppingRule stop;
  stop.min_bit_errors = 50;
  stop.min_trials = 200;
  stop.max_trials = 2000;
  stop.batch = 64;
  const std::vector<double> grid = {6.0, 10.0};
  const BerCurve one = run_ber(cfg, SchemeId::ZfMuSm, grid, stop, 7, 2, 1);
  const BerCurve four = run_ber(cfg, SchemeId::ZfMuSm, grid, stop, 7, 2, 4);
  const BerCurve again = run_ber(cfg, SchemeId::ZfMuSm, grid, stop, 7, 2, 4);
  REQUIRE(one.points.size() == 2);
  REQUIRE(four.points.size() == 2);
  for (size_t i = 0; i < 2; ++i) {
    CHECK(one.points[i].trials == four.points[i].trials);
    CHECK(one.points[i].bit_errors == four.points[i].bit_errors);
    CHECK(one.points[i].ber == four.points[i].ber);
    CHECK(four.points[i].trials == again.points[i].trials);
    CHECK(four.points[i].bit_errors == again.points[i].bit_errors);
  }
  // Different seed, different counts.
  const BerCurve other = run_ber(cfg, SchemeId::ZfMuSm, grid, stop, 8, 2, 4);
  CHECK(other.points[0].bit_errors != one.points[0].bit_errors);
}

TEST_CASE("monte carlo runner honors the stopping rule") {
  const SystemConfig cfg = make_config(2, 2);
  StoppingRule stop;
  stop.min_bit_errors = 25;
  stop.min_trials = 100;
  stop.max_trials = 100000;
  stop.batch = 32;
  // Low SNR: plenty of errors, so the error floor binds.
  const BerCurve low = run_ber(cfg, SchemeId::ZfMuSm, {0.0}, stop, 11, 2, 1);
  CHECK(low.points[0].bit_errors >= 25);
  CHECK(low.points[0].trials >= 100);
  CHECK(low.points[0].trials % stop.batch == 0);
  // Noiseless: no errors ever, so the trial cap binds.
  const BerCurve clean = run_ber(cfg, SchemeId::ZfMuSm, {300.0}, stop, 11, 2, 1);
  CHECK(clean.points[0].trials == 100000);
}

TEST_CASE("schemes order as expected at moderate SNR") {
  const SystemConfig cfg = make_config(2, 2);
  StoppingRule stop;
  stop.min_bit_errors = 400;
  stop.min_trials = 4000;
  stop.max_trials = 400000;
  stop.batch = 256;
  const double snr = 14.0;
  const double lb = run_ber(cfg, SchemeId::LbMuSm, {snr}, stop, 21, 2, 0)
                        .points[0]
                        .ber;
  const double zf = run_ber(cfg, SchemeId::ZfMuSm, {snr}, stop, 21, 2, 0)
                        .points[0]
                        .ber;
  const double zfrx = run_ber(cfg, SchemeId::ZfRx, {snr}, stop, 21, 2, 0)
                          .points[0]
                          .ber;
  const double ml = run_ber(cfg, SchemeId::MlRx, {snr}, stop, 21, 2, 0)
                        .points[0]
                        .ber;
  // Offset search beats plain inversion; exhaustive detection beats forced
  // equalization; and the perturbed transmitter beats the plain receivers'
  // zero-forcing at this operating point.
  CHECK(lb < 0.5 * zf);
  CHECK(ml < 0.5 * zfrx);
  CHECK(lb < zfrx);
}

TEST_CASE("worker resolution respects the environment cap") {
  CHECK(resolve_workers(3) == 3);
  CHECK(resolve_workers(0) >= 1);
#ifndef _WIN32
  ::setenv("MIMO_SIM_THREADS", "2", 1);
  CHECK(resolve_workers(8) == 2);
  CHECK(resolve_workers(1) == 1);
  ::setenv("MIMO_SIM_THREADS", "junk", 1);
  CHECK_THROWS_AS(resolve_workers(4), ConfigError);
  ::unsetenv("MIMO_SIM_THREADS");
#endif
}

TEST_CASE("diversity slope fits synthetic curves") {
  // BER = 10^(-snr/10): one decade per 10 dB.
  BerCurve c1;
  for (double snr = 10.0; snr <= 40.0; snr += 2.0) {
    BerPoint p;
    p.snr_db = snr;
    p.ber = std::pow(10.0, -snr / 10.0);
    p.trials = 1000;
    p.bit_errors = 10;
    c1.points.push_back(p);
  }
  CHECK(diversity_slope(c1, 4) == doctest::Approx(-1.0).epsilon(1e-9));

  BerCurve c2;
  for (double snr = 10.0; snr <= 40.0; snr += 2.0) {
    BerPoint p;
    p.snr_db = snr;
    p.ber = std::pow(10.0, -snr / 5.0);
    p.trials = 1000;
    p.bit_errors = 10;
    c2.points.push_back(p);
  }
  CHECK(diversity_slope(c2, 5) == doctest::Approx(-2.0).epsilon(1e-9));

  // Zero-error tail points are excluded from the fit.
  BerCurve c3 = c1;
  BerPoint dead;
  dead.snr_db = 50.0;
  dead.ber = 0.0;
  dead.trials = 1000;
  dead.bit_errors = 0;
  c3.points.push_back(dead);
  CHECK(diversity_slope(c3, 4) == doctest::Approx(-1.0).epsilon(1e-9));

  BerCurve tiny;
  tiny.points.push_back(c1.points[0]);
  CHECK_THROWS_AS(diversity_slope(tiny, 3), std::invalid_argument);
}
