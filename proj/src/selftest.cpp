// SPDX-License-Identifier: Apache-2.0
#include "mimo/selftest.hpp"

#include <cmath>
#include <functional>
#include <sstream>
#include <vector>

#include "mimo/channel.hpp"
#include "mimo/constellation.hpp"
#include "mimo/lattice.hpp"
#include "mimo/link.hpp"
#include "mimo/precoder.hpp"
#include "mimo/rates.hpp"
#include "mimo/rng.hpp"

namespace mimo {
namespace {

struct Suite {
  const char* name;
  std::function<bool(std::ostringstream&)> run;
};

constexpr std::pair<int, int> kGeometries[] = {{2, 2}, {2, 3}, {3, 2}};

CVector random_symbols(Eigen::Index n, const Constellation& c, CounterRng& rng) {
  BitVec bits(static_cast<std::size_t>(n) * c.bits_per_symbol());
  for (auto& b : bits) b = static_cast<uint8_t>(rng.next_u32() & 1u);
  return qam_modulate(bits, c);
}

bool precoders_for(const SystemConfig& cfg, CounterRng& rng, ChannelSet& set,
                   PrecoderSet& ps) {
  for (int attempt = 0; attempt < 16; ++attempt) {
    set = draw_channels(cfg, rng, 0);
    try {
      ps = build_precoder_set(set, cfg);
      return true;
    } catch (const DegenerateChannelError&) {
    }
  }
  return false;
}

bool suite_nulling(std::ostringstream& detail) {
  double worst = 0.0;
  int built = 0;
  for (const auto& [n_rx, n_users] : kGeometries) {
    const SystemConfig cfg = make_config(n_rx, n_users);
    CounterRng rng(101, static_cast<uint64_t>(n_rx * 10 + n_users));
    for (int it = 0; it < 50; ++it) {
      ChannelSet set;
      PrecoderSet ps;
      if (!precoders_for(cfg, rng, set, ps)) return false;
      ++built;
      for (int k = 0; k < cfg.n_users; ++k)
        for (int j = 0; j < cfg.n_users; ++j) {
          if (j == k) continue;
          const double leak = (set.users[j] * ps.users[k].nulling).norm() /
                              set.users[j].norm();
          worst = std::max(worst, leak);
        }
    }
  }
  detail << "worst cross-user leakage " << worst << " over " << built
         << " precoder sets";
  return worst < 1e-9;
}

bool suite_offset_search(std::ostringstream& detail) {
  const Constellation c = Constellation::qam4();
  const int radius = 2;
  const SystemConfig cfg = make_config(2, 2);
  CounterRng rng(102, 0);
  int agreed = 0;
  for (int it = 0; it < 25; ++it) {
    ChannelSet set;
    PrecoderSet ps;
    if (!precoders_for(cfg, rng, set, ps)) return false;
    const CVector s = random_symbols(2, c, rng);
    const PerturbationSolution fast = perturb(s, ps.users[0].h_eff_inv, c, radius);

    // Plain enumeration over every candidate offset, scored identically.
    const double step = c.lattice_step;
    const int span = 2 * radius + 1;
    double best = -1.0;
    CVector cv(2);
    for (int a = 0; a < span * span * span * span; ++a) {
      int d = a;
      int digits[4];
      for (int i = 3; i >= 0; --i) {
        digits[i] = d % span - radius;
        d /= span;
      }
      cv(0) = Complex(digits[0], digits[1]);
      cv(1) = Complex(digits[2], digits[3]);
      const double g = gamma_of(s + step * cv, ps.users[0].h_eff_inv);
      if (best < 0.0 || g < best) best = g;
    }
    if (fast.gamma == best) ++agreed;
  }
  detail << agreed << "/25 searches matched plain enumeration exactly";
  return agreed == 25;
}

bool suite_waterfilling(std::ostringstream& detail) {
  CounterRng rng(103, 0);
  double worst = 0.0;
  for (int it = 0; it < 200; ++it) {
    const int n = 1 + static_cast<int>(rng.next_u32() % 8);
    RVector gains(n);
    for (int i = 0; i < n; ++i) gains(i) = std::norm(rng.next_cgaussian());
    const double power = 0.1 + 20.0 * rng.next_unit();
    const auto alloc = waterfill(gains, power, 1.0);

    // Optimality conditions: powers non-negative and conserved, active
    // modes level, inactive modes already above the water line.
    double v = std::abs(alloc.powers.sum() - power) / power;
    for (int i = 0; i < n; ++i) {
      if (alloc.powers(i) < 0.0) v = 1.0;
      const double inv_gain = 1.0 / gains(i);
      if (alloc.powers(i) > 1e-12 * std::max(1.0, power))
        v = std::max(v, std::abs(alloc.powers(i) + inv_gain - alloc.water_level) /
                            std::max(1.0, alloc.water_level));
      else if (inv_gain < alloc.water_level)
        v = std::max(v, (alloc.water_level - inv_gain) /
                            std::max(1.0, alloc.water_level));
    }
    worst = std::max(worst, v);
  }
  detail << "worst optimality violation " << worst << " over 200 allocations";
  return worst < 1e-9;
}

bool suite_rate_identities(std::ostringstream& detail) {
  const SystemConfig cfg = make_config(2, 2);
  CounterRng rng(104, 0);
  double worst = 0.0;
  for (int it = 0; it < 200; ++it) {
    ChannelSet set;
    PrecoderSet ps;
    if (!precoders_for(cfg, rng, set, ps)) return false;
    const double rho = std::pow(10.0, 3.0 * rng.next_unit());
    const UserPrecoder& u = ps.users[0];

    // Equal-split mode rate against the determinant identity.
    const double direct = rate_prop(u, rho);
    const CMatrix gram =
        CMatrix::Identity(2, 2) + (rho / 2.0) * u.h_eff * u.h_eff.adjoint();
    const double via_det = std::log2(gram.determinant().real());
    worst = std::max(worst, std::abs(direct - via_det) / std::max(1.0, via_det));

    // Inversion power via the pseudo-inverse against the spectral route.
    const Constellation c = Constellation::qam4();
    const CVector s = random_symbols(2, c, rng);
    const double g_direct = gamma_of(s, u.h_eff_inv);
    double g_modes = 0.0;
    for (Eigen::Index l = 0; l < u.h_eff_svd.sigma.size(); ++l) {
      const Complex proj = u.h_eff_svd.U.col(l).adjoint() * s;
      g_modes += std::norm(proj) / (u.h_eff_svd.sigma(l) * u.h_eff_svd.sigma(l));
    }
    worst = std::max(worst, std::abs(g_direct - g_modes) / std::max(1.0, g_modes));
  }
  detail << "worst relative identity error " << worst << " over 200 draws";
  return worst < 1e-9;
}

bool suite_loopback(std::ostringstream& detail) {
  StoppingRule rule;
  rule.min_bit_errors = 1;
  rule.min_trials = 30;
  rule.max_trials = 30;
  rule.batch = 10;
  long long errors = 0, bits = 0;
  for (const auto& [n_rx, n_users] : kGeometries) {
    const SystemConfig cfg = make_config(n_rx, n_users);
    for (SchemeId scheme : {SchemeId::LbMuSm, SchemeId::ZfMuSm, SchemeId::ZfRx,
                            SchemeId::MlRx}) {
      const BerCurve curve = run_ber(cfg, scheme, {300.0}, rule, 105, 2, 1);
      errors += curve.points[0].bit_errors;
      bits += curve.points[0].bits;
    }
  }
  detail << errors << " bit errors in " << bits
         << " noiseless bits across 4 schemes x 3 geometries";
  return errors == 0;
}

bool suite_modulo(std::ostringstream& detail) {
  const Constellation c = Constellation::qam4();
  const double step = c.lattice_step;
  CounterRng rng(106, 0);
  double worst = 0.0;
  for (int it = 0; it < 500; ++it) {
    const Complex z(8.0 * (rng.next_unit() - 0.5), 8.0 * (rng.next_unit() - 0.5));
    const Complex f = modulo_fold(z, step);
    // Stays in the fundamental region ...
    if (std::abs(f.real()) > step / 2 || std::abs(f.imag()) > step / 2) worst = 1.0;
    // ... differs from the input by an exact lattice point ...
    const Complex diff = (z - f) / step;
    worst = std::max(worst, std::abs(diff.real() - std::round(diff.real())));
    worst = std::max(worst, std::abs(diff.imag() - std::round(diff.imag())));
    // ... and folding twice changes nothing.
    worst = std::max(worst, std::abs(modulo_fold(f, step) - f));
  }
  detail << "worst congruence defect " << worst << " over 500 folds";
  return worst < 1e-9;
}

}  // namespace

bool run_invariant_suites(std::ostream& out) {
  const Suite suites[] = {
      {"interference-nulling", suite_nulling},
      {"offset-search-optimality", suite_offset_search},
      {"water-filling-optimality", suite_waterfilling},
      {"rate-identities", suite_rate_identities},
      {"noiseless-loopback", suite_loopback},
      {"modulo-arithmetic", suite_modulo},
  };
  bool all_ok = true;
  for (const Suite& s : suites) {
    std::ostringstream detail;
    bool ok = false;
    try {
      ok = s.run(detail);
    } catch (const std::exception& e) {
      detail << "exception: " << e.what();
    }
    out << (ok ? "[PASS] " : "[FAIL] ") << s.name;
    const std::string d = detail.str();
    if (!d.empty()) out << " (" << d << ")";
    out << '\n';
    all_ok = all_ok && ok;
  }
  return all_ok;
}

}  // namespace mimo
