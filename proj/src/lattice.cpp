// SPDX-License-Identifier: Apache-2.0
#include "mimo/lattice.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/QR>

#include "mimo/errors.hpp"

namespace mimo {

double gamma_of(const CVector& s_tilde, const CMatrix& h_eff_inv) {
  if (h_eff_inv.rows() != h_eff_inv.cols() || h_eff_inv.cols() != s_tilde.size())
    throw std::invalid_argument("gamma_of: dimension mismatch");
  if (!s_tilde.allFinite() || !h_eff_inv.allFinite())
    throw std::invalid_argument("gamma_of: non-finite input");
  return (h_eff_inv * s_tilde).squaredNorm();
}

PerturbationSolution perturb(const CVector& s, const CMatrix& h_eff_inv,
                             const Constellation& c, int radius) {
  const Eigen::Index n = s.size();
  if (h_eff_inv.rows() != h_eff_inv.cols() || h_eff_inv.cols() != n)
    throw std::invalid_argument("perturb: h_eff_inv must be square and match s");
  if (radius < 0) throw std::invalid_argument("perturb: radius must be non-negative");
  if (!(c.lattice_step > 0.0))
    throw std::invalid_argument("perturb: lattice step must be positive");
  if (!s.allFinite() || !h_eff_inv.allFinite())
    throw std::invalid_argument("perturb: non-finite input");

  const double step = c.lattice_step;

  PerturbationSolution best;
  best.p = CVector::Zero(n);
  best.s_tilde = s;
  best.gamma = gamma_of(s, h_eff_inv);
  best.candidates_examined = 1;
  if (radius == 0 || n == 0) return best;

  // Triangularize once: ||B v|| == ||R v|| for the R factor of B = QR.
  // Scaling each row by a unit-magnitude phase keeps every norm and makes
  // the diagonal real positive, which decouples the real and imaginary
  // parts of a coefficient when scanning one level.
  Eigen::HouseholderQR<CMatrix> qr(h_eff_inv);
  CMatrix R = qr.matrixQR().triangularView<Eigen::Upper>();
  double diag_min = 0.0, diag_max = 0.0;
  for (Eigen::Index l = 0; l < n; ++l) {
    const double mag = std::abs(R(l, l));
    if (!(mag > 0.0)) throw NumericalError("perturb: inverted channel is singular");
    R.row(l) *= std::conj(R(l, l)) / mag;
    R(l, l) = Complex(mag, 0.0);
    diag_min = (l == 0) ? mag : std::min(diag_min, mag);
    diag_max = (l == 0) ? mag : std::max(diag_max, mag);
  }

  // Candidates are scored exactly (same expression as gamma_of); the
  // triangularized partial sums only gate the search. The slack keeps the
  // gate from cutting a true optimum or an exact tie on the far side of
  // the rounding gap between the two norm computations; widening it can
  // only cost extra exact evaluations.
  const double slack = 1e-9 + 1e-13 * (diag_max / diag_min);
  double bound = best.gamma * (1.0 + slack) + 1e-300;

  const int span = 2 * radius + 1;
  std::vector<std::vector<int>> re_order(n, std::vector<int>(span));
  std::vector<std::vector<int>> im_order(n, std::vector<int>(span));
  std::vector<int> cre(n, 0), cim(n, 0);
  std::vector<int> best_key(2 * n, 0), cur_key(2 * n, 0);
  CVector s_buf(n);

  auto sort_axis = [&](std::vector<int>& ord, double offset, double scale) {
    auto contribution = [&](int k) {
      const double v = offset + scale * k;
      return v * v;
    };
    for (int i = 0; i < span; ++i) ord[i] = i - radius;
    for (int i = 1; i < span; ++i)
      for (int j = i; j > 0 && contribution(ord[j]) < contribution(ord[j - 1]); --j)
        std::swap(ord[j], ord[j - 1]);
  };

  auto leaf = [&]() {
    for (Eigen::Index m = 0; m < n; ++m)
      s_buf(m) = s(m) + step * Complex(static_cast<double>(cre[m]),
                                       static_cast<double>(cim[m]));
    const double g = gamma_of(s_buf, h_eff_inv);
    ++best.candidates_examined;
    bool better = g < best.gamma;
    if (!better && g == best.gamma) {
      for (Eigen::Index m = 0; m < n; ++m) {
        cur_key[m] = cre[m];
        cur_key[n + m] = cim[m];
      }
      better = cur_key < best_key;
    }
    if (better) {
      best.gamma = g;
      best.s_tilde = s_buf;
      for (Eigen::Index m = 0; m < n; ++m) {
        best.p(m) = step * Complex(static_cast<double>(cre[m]),
                                   static_cast<double>(cim[m]));
        best_key[m] = cre[m];
        best_key[n + m] = cim[m];
      }
      bound = g * (1.0 + slack) + 1e-300;
    }
  };

  auto descend = [&](auto&& self, Eigen::Index l, double partial) -> void {
    Complex t = R(l, l) * s(l);
    for (Eigen::Index m = l + 1; m < n; ++m)
      t += R(l, m) * (s(m) + step * Complex(static_cast<double>(cre[m]),
                                            static_cast<double>(cim[m])));
    const double scale = R(l, l).real() * step;
    sort_axis(re_order[l], t.real(), scale);
    sort_axis(im_order[l], t.imag(), scale);
    for (int k : re_order[l]) {
      const double vre = t.real() + scale * k;
      const double after_re = partial + vre * vre;
      if (after_re > bound) break;  // sorted ascending: siblings only worse
      cre[l] = k;
      for (int j : im_order[l]) {
        const double vim = t.imag() + scale * j;
        const double after = after_re + vim * vim;
        if (after > bound) break;
        cim[l] = j;
        if (l == 0)
          leaf();
        else
          self(self, l - 1, after);
      }
    }
  };
  descend(descend, n - 1, 0.0);

  return best;
}

}  // namespace mimo
