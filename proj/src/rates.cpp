// SPDX-License-Identifier: Apache-2.0
#include "mimo/rates.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mimo {

WaterfillAllocation waterfill(const RVector& eig_sq, double total_power,
                              double noise_var) {
  if (!(noise_var > 0.0))
    throw std::invalid_argument("waterfill: noise_var must be positive");
  if (!(total_power >= 0.0))
    throw std::invalid_argument("waterfill: total_power must be non-negative");
  for (Eigen::Index i = 0; i < eig_sq.size(); ++i)
    if (!(eig_sq(i) >= 0.0))
      throw std::invalid_argument("waterfill: gains must be non-negative");

  WaterfillAllocation alloc;
  alloc.powers = RVector::Zero(eig_sq.size());
  if (eig_sq.size() == 0 || total_power == 0.0) return alloc;

  // Inverse gains of the modes that can carry power, cheapest first.
  std::vector<std::pair<double, Eigen::Index>> inv;
  inv.reserve(eig_sq.size());
  for (Eigen::Index i = 0; i < eig_sq.size(); ++i)
    if (eig_sq(i) > 0.0) inv.emplace_back(noise_var / eig_sq(i), i);
  if (inv.empty()) return alloc;
  std::sort(inv.begin(), inv.end());

  // Largest active set whose common water level sits strictly above every
  // member's inverse gain.
  double prefix = 0.0;
  double level = 0.0;
  std::size_t active = 0;
  for (std::size_t m = 0; m < inv.size(); ++m) {
    prefix += inv[m].first;
    const double candidate = (total_power + prefix) / static_cast<double>(m + 1);
    if (candidate > inv[m].first) {
      level = candidate;
      active = m + 1;
    }
  }

  alloc.water_level = level;
  for (std::size_t m = 0; m < active; ++m)
    alloc.powers(inv[m].second) = level - inv[m].first;
  for (std::size_t m = 0; m < active; ++m) {
    const Eigen::Index i = inv[m].second;
    alloc.achieved_rate += std::log2(1.0 + eig_sq(i) * alloc.powers(i) / noise_var);
  }
  return alloc;
}

namespace {

RateReport report_from_gains(const std::vector<RVector>& gains, double total_power,
                             double noise_var, PowerConstraint mode,
                             const std::string& label) {
  RateReport rep;
  rep.scheme = label;
  rep.rho = total_power / noise_var;
  const int n_users = static_cast<int>(gains.size());
  rep.per_user.assign(n_users, 0.0);

  if (mode == PowerConstraint::Total) {
    Eigen::Index total_modes = 0;
    for (const RVector& g : gains) total_modes += g.size();
    RVector pooled(total_modes);
    Eigen::Index at = 0;
    for (const RVector& g : gains) {
      pooled.segment(at, g.size()) = g;
      at += g.size();
    }
    const WaterfillAllocation alloc = waterfill(pooled, total_power, noise_var);
    at = 0;
    for (int k = 0; k < n_users; ++k) {
      double r = 0.0;
      for (Eigen::Index m = 0; m < gains[k].size(); ++m, ++at)
        r += std::log2(1.0 + gains[k](m) * alloc.powers(at) / noise_var);
      rep.per_user[k] = r;
    }
  } else {
    const double share = total_power / static_cast<double>(n_users);
    for (int k = 0; k < n_users; ++k)
      rep.per_user[k] = waterfill(gains[k], share, noise_var).achieved_rate;
  }
  rep.sum = std::accumulate(rep.per_user.begin(), rep.per_user.end(), 0.0);
  return rep;
}

std::vector<RVector> mode_gains(const PrecoderSet& precoders) {
  std::vector<RVector> gains;
  gains.reserve(precoders.users.size());
  for (const UserPrecoder& u : precoders.users)
    gains.push_back(u.h_eff_svd.sigma.cwiseProduct(u.h_eff_svd.sigma));
  return gains;
}

}  // namespace

RateReport c_bd_from(const PrecoderSet& precoders, double total_power,
                     double noise_var, PowerConstraint mode) {
  if (precoders.users.empty())
    throw std::invalid_argument("c_bd: empty precoder set");
  return report_from_gains(mode_gains(precoders), total_power, noise_var, mode,
                           mode == PowerConstraint::Total ? "c_bd_wf_total"
                                                          : "c_bd_wf_per_user");
}

RateReport c_bd(const ChannelSet& channels, const SystemConfig& cfg,
                double total_power, PowerConstraint mode) {
  return c_bd_from(build_precoder_set(channels, cfg), total_power, cfg.noise_var,
                   mode);
}

RateReport rate_ci(const PrecoderSet& precoders, double rho) {
  if (!(rho >= 0.0)) throw std::invalid_argument("rate_ci: rho must be non-negative");
  RateReport rep;
  rep.scheme = "r_ci";
  rep.rho = rho;
  for (std::size_t k = 0; k < precoders.users.size(); ++k) {
    const auto& sigma = precoders.users[k].h_eff_svd.sigma;
    double inv_sq_sum = 0.0;
    bool singular = false;
    for (Eigen::Index l = 0; l < sigma.size(); ++l) {
      if (sigma(l) > 0.0)
        inv_sq_sum += 1.0 / (sigma(l) * sigma(l));
      else
        singular = true;
    }
    if (singular || inv_sq_sum == 0.0) {
      rep.per_user.push_back(0.0);
      rep.warnings.push_back("user " + std::to_string(k) +
                             ": singular effective channel, inversion rate 0");
    } else {
      rep.per_user.push_back(std::log2(1.0 + rho / inv_sq_sum));
    }
  }
  rep.sum = std::accumulate(rep.per_user.begin(), rep.per_user.end(), 0.0);
  return rep;
}

RVector per_stream_snr(const UserPrecoder& user, const CVector& s_tilde, double rho) {
  if (!(rho >= 0.0))
    throw std::invalid_argument("per_stream_snr: rho must be non-negative");
  if (s_tilde.size() != user.h_eff_svd.U.rows())
    throw std::invalid_argument("per_stream_snr: dimension mismatch");
  if (s_tilde.isZero(0.0))
    throw std::invalid_argument("per_stream_snr: zero symbol vector has no defined SNR");

  const auto& sigma = user.h_eff_svd.sigma;
  const CVector proj = user.h_eff_svd.U.adjoint() * s_tilde;
  double gamma = 0.0;
  for (Eigen::Index l = 0; l < sigma.size(); ++l)
    gamma += std::norm(proj(l)) / (sigma(l) * sigma(l));

  RVector snr(sigma.size());
  for (Eigen::Index l = 0; l < sigma.size(); ++l)
    snr(l) = rho * std::norm(proj(l)) / gamma;
  return snr;
}

double rate_realized(const UserPrecoder& user, const CVector& s_tilde, double rho) {
  const RVector snr = per_stream_snr(user, s_tilde, rho);
  double r = 0.0;
  for (Eigen::Index l = 0; l < snr.size(); ++l) r += std::log2(1.0 + snr(l));
  return r;
}

double rate_prop(const UserPrecoder& user, double rho) {
  if (!(rho >= 0.0)) throw std::invalid_argument("rate_prop: rho must be non-negative");
  const auto& sigma = user.h_eff_svd.sigma;
  const double per_mode = rho / static_cast<double>(sigma.size());
  double r = 0.0;
  for (Eigen::Index l = 0; l < sigma.size(); ++l)
    r += std::log2(1.0 + per_mode * sigma(l) * sigma(l));
  return r;
}

RateReport rate_sum_prop(const PrecoderSet& precoders, double rho) {
  RateReport rep;
  rep.scheme = "r_sum";
  rep.rho = rho;
  for (const UserPrecoder& u : precoders.users)
    rep.per_user.push_back(rate_prop(u, rho));
  rep.sum = std::accumulate(rep.per_user.begin(), rep.per_user.end(), 0.0);
  return rep;
}

}  // namespace mimo
