// SPDX-License-Identifier: Apache-2.0
#include "mimo/precoder.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "mimo/rates.hpp"

namespace mimo {

namespace {

constexpr double kRankTol = 1e-10;
constexpr double kMaxCondition = 1e12;

void check_channels(const ChannelSet& channels, const SystemConfig& cfg) {
  if (static_cast<int>(channels.users.size()) != cfg.n_users)
    throw ConfigError("precoder: channel set has " +
                      std::to_string(channels.users.size()) + " users, config " +
                      std::to_string(cfg.n_users));
  for (const CMatrix& h : channels.users)
    if (h.rows() != cfg.n_rx || h.cols() != cfg.n_tx)
      throw ConfigError("precoder: channel dimensions do not match config");
}

}  // namespace

CMatrix stack_complement(const ChannelSet& channels, int user) {
  const int k = static_cast<int>(channels.users.size());
  if (k == 0) throw std::invalid_argument("stack_complement: empty channel set");
  if (user < 0 || user >= k)
    throw std::invalid_argument("stack_complement: user index out of range");
  const Eigen::Index n_tx = channels.users[0].cols();

  Eigen::Index rows = 0;
  for (int l = 0; l < k; ++l) {
    if (channels.users[l].cols() != n_tx)
      throw std::invalid_argument("stack_complement: inconsistent column counts");
    if (l != user) rows += channels.users[l].rows();
  }

  CMatrix stack(rows, n_tx);
  Eigen::Index at = 0;
  for (int l = 0; l < k; ++l) {
    if (l == user) continue;
    stack.middleRows(at, channels.users[l].rows()) = channels.users[l];
    at += channels.users[l].rows();
  }
  return stack;
}

namespace {

// Shared by the public function and build_precoder_set, which also needs
// the rank for its dimension audit.
CMatrix null_space_basis(const CMatrix& h_tilde, int streams, Eigen::Index* rank_out) {
  if (streams < 1)
    throw std::invalid_argument("null_space_precoder: streams must be at least 1");
  const Eigen::Index n_tx = h_tilde.cols();
  if (n_tx == 0) throw std::invalid_argument("null_space_precoder: no columns");

  if (h_tilde.rows() == 0) {
    // Nothing to null; any orthonormal basis works.
    if (rank_out) *rank_out = 0;
    if (streams > n_tx)
      throw ConfigError("null_space_precoder: need " + std::to_string(streams) +
                        " null-space dimensions, have " + std::to_string(n_tx));
    return CMatrix::Identity(n_tx, streams);
  }

  const auto f = svd(h_tilde);
  const Eigen::Index rank = f.rank(kRankTol);
  if (rank_out) *rank_out = rank;
  const Eigen::Index available = n_tx - rank;
  if (available < streams)
    throw ConfigError("null_space_precoder: need " + std::to_string(streams) +
                      " null-space dimensions, have " + std::to_string(available) +
                      " (rank " + std::to_string(rank) + " of a " +
                      std::to_string(h_tilde.rows()) + "x" + std::to_string(n_tx) +
                      " stack)");
  return f.V.rightCols(streams);
}

}  // namespace

CMatrix null_space_precoder(const CMatrix& h_tilde, int streams) {
  return null_space_basis(h_tilde, streams, nullptr);
}

PrecoderSet build_precoder_set(const ChannelSet& channels, const SystemConfig& cfg) {
  cfg.validate();
  check_channels(channels, cfg);

  PrecoderSet set;
  set.users.reserve(cfg.n_users);
  for (int k = 0; k < cfg.n_users; ++k) {
    const CMatrix h_tilde = stack_complement(channels, k);
    Eigen::Index rank = 0;
    UserPrecoder u;
    u.nulling = null_space_basis(h_tilde, cfg.streams_per_user, &rank);

    // In the square geometry the stack must be full rank; losing rank means
    // the draw is pathological, not that more streams fit.
    const Eigen::Index expected_null = cfg.n_tx - (cfg.n_users - 1) * cfg.n_rx;
    if (cfg.n_tx - rank != expected_null)
      throw NumericalError("build_precoder_set: null space of user " +
                           std::to_string(k) + "'s interference stack has dimension " +
                           std::to_string(cfg.n_tx - rank) + ", expected " +
                           std::to_string(expected_null));

    u.h_eff = channels.users[k] * u.nulling;
    u.h_eff_svd = svd(u.h_eff);
    const auto& sigma = u.h_eff_svd.sigma;
    const double s_min = sigma(sigma.size() - 1);
    if (!(s_min > 0.0) || sigma(0) / s_min > kMaxCondition)
      throw DegenerateChannelError("build_precoder_set: effective channel of user " +
                                   std::to_string(k) + " is ill-conditioned");
    u.h_eff_inv = u.h_eff_svd.V * sigma.cwiseInverse().asDiagonal() *
                  u.h_eff_svd.U.adjoint();
    set.users.push_back(std::move(u));
  }
  return set;
}

std::vector<CMatrix> bd_wf_precoder(const ChannelSet& channels,
                                    const SystemConfig& cfg, double total_power) {
  if (!(total_power >= 0.0))
    throw std::invalid_argument("bd_wf_precoder: total_power must be non-negative");
  const PrecoderSet set = build_precoder_set(channels, cfg);

  // Pool every user's modes into one water-filling problem.
  const int l = cfg.streams_per_user;
  RVector gains(cfg.n_users * l);
  for (int k = 0; k < cfg.n_users; ++k)
    for (int m = 0; m < l; ++m)
      gains(k * l + m) = set.users[k].h_eff_svd.sigma(m) * set.users[k].h_eff_svd.sigma(m);
  const WaterfillAllocation alloc = waterfill(gains, total_power, cfg.noise_var);

  std::vector<CMatrix> out;
  out.reserve(cfg.n_users);
  for (int k = 0; k < cfg.n_users; ++k) {
    RVector q = alloc.powers.segment(k * l, l).cwiseMax(0.0).cwiseSqrt();
    out.push_back(set.users[k].nulling * set.users[k].h_eff_svd.V *
                  q.asDiagonal().toDenseMatrix().cast<Complex>());
  }
  return out;
}

}  // namespace mimo
