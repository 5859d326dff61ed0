// SPDX-License-Identifier: Apache-2.0
//
// Dense linear-algebra substrate shared by every module: full singular
// value decomposition, Moore-Penrose pseudo-inverse, Frobenius norm.
// Everything here is a pure free function over Eigen expressions.
#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "mimo/errors.hpp"

namespace mimo {

template <class Derived>
bool is_finite(const Eigen::MatrixBase<Derived>& a) {
  return a.allFinite();
}

// sqrt of the entrywise sum of squared magnitudes.
template <class Derived>
double frobenius_norm(const Eigen::MatrixBase<Derived>& a) {
  if (!is_finite(a)) throw std::invalid_argument("frobenius_norm: non-finite entries");
  return a.norm();
}

// Full factorization A = U * diag(sigma) * V^H with square U (m x m) and
// square V (n x n); sigma holds min(m, n) values sorted descending. V
// always spans the whole domain, so for a wide matrix its trailing columns
// are an orthonormal null-space basis. That property is what the
// interference-nulling precoder is built on, which is why the thin SVD is
// not offered.
template <class Scalar>
struct SvdFactorization {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Matrix U;
  Eigen::VectorXd sigma;
  Matrix V;

  // Number of singular values above rel_tol * sigma(0).
  Eigen::Index rank(double rel_tol = 1e-10) const {
    if (sigma.size() == 0) return 0;
    const double thr = rel_tol * sigma(0);
    Eigen::Index r = 0;
    while (r < sigma.size() && sigma(r) > thr) ++r;
    return r;
  }

  Matrix reconstruct() const {
    Matrix s = Matrix::Zero(U.rows(), V.rows());
    for (Eigen::Index i = 0; i < sigma.size(); ++i) s(i, i) = sigma(i);
    return U * s * V.adjoint();
  }
};

template <class Derived>
SvdFactorization<typename Derived::Scalar> svd(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (a.rows() == 0 || a.cols() == 0)
    throw std::invalid_argument("svd: matrix must be non-empty");
  if (!is_finite(a)) throw std::invalid_argument("svd: non-finite entries");
  Eigen::JacobiSVD<Matrix> dec(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (dec.info() != Eigen::Success)
    throw NumericalError("svd: no convergence on a " + std::to_string(a.rows()) +
                         "x" + std::to_string(a.cols()) + " matrix");
  return {dec.matrixU(), dec.singularValues(), dec.matrixV()};
}

// Moore-Penrose pseudo-inverse. Singular values at or below
// rank_tol * sigma_max are treated as exact zeros, so a zero matrix maps
// to a (transposed) zero matrix rather than to infinities.
template <class Derived>
typename SvdFactorization<typename Derived::Scalar>::Matrix pseudo_inverse(
    const Eigen::MatrixBase<Derived>& a, double rank_tol = 1e-10) {
  using Matrix = typename SvdFactorization<typename Derived::Scalar>::Matrix;
  if (!(rank_tol >= 0.0))
    throw std::invalid_argument("pseudo_inverse: rank_tol must be non-negative");
  const auto f = svd(a);
  const double thr = f.sigma.size() ? rank_tol * f.sigma(0) : 0.0;
  Matrix result = Matrix::Zero(a.cols(), a.rows());
  for (Eigen::Index i = 0; i < f.sigma.size(); ++i) {
    if (f.sigma(i) > thr && f.sigma(i) > 0.0)
      result.noalias() += (1.0 / f.sigma(i)) * f.V.col(i) * f.U.col(i).adjoint();
  }
  return result;
}

}  // namespace mimo
