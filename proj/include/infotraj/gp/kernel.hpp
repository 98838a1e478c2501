// Copyright 2026 The infotraj Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef INFOTRAJ_GP_KERNEL_HPP_
#define INFOTRAJ_GP_KERNEL_HPP_

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "infotraj/common.hpp"

namespace infotraj::gp {

/// Squared-exponential (ARD) covariance with additive white noise.
///
///   k(a, b) = signal_variance * exp(-0.5 * sum_j ((a_j - b_j) / lengthscale_j)^2)
///
/// The noise variance is not part of k(a, b); it is added on the diagonal of
/// training covariances and to predictive variances.
template <typename Scalar>
struct SquaredExponential {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Scalar signal_variance{1};
  Vector lengthscales;
  Scalar noise_variance{0};

  SquaredExponential() = default;
  SquaredExponential(Scalar signal, Vector ell, Scalar noise)
      : signal_variance(signal), lengthscales(std::move(ell)), noise_variance(noise) {
    validate();
  }

  static SquaredExponential isotropic(Eigen::Index dim, Scalar signal, Scalar ell, Scalar noise) {
    return SquaredExponential(signal, Vector::Constant(dim, ell), noise);
  }

  Eigen::Index dim() const { return lengthscales.size(); }

  void validate() const {
    if (!(signal_variance > Scalar(0))) throw InputError("kernel: signal_variance must be > 0");
    if (!(noise_variance >= Scalar(0))) throw InputError("kernel: noise_variance must be >= 0");
    if (lengthscales.size() == 0) throw InputError("kernel: no lengthscales");
    if (!(lengthscales.array() > Scalar(0)).all()) {
      throw InputError("kernel: lengthscales must be > 0");
    }
  }

  template <typename A, typename B>
  Scalar operator()(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) const {
    Scalar r2(0);
    for (Eigen::Index i = 0; i < lengthscales.size(); ++i) {
      const Scalar d = (Scalar(a(i)) - Scalar(b(i))) / lengthscales(i);
      r2 += d * d;
    }
    return signal_variance * std::exp(Scalar(-0.5) * r2);
  }

  /// Cross-covariance between the rows of `left` and the rows of `right`.
  Matrix cross(const Matrix& left, const Matrix& right) const {
    check_columns(left);
    check_columns(right);
    const Vector inv = lengthscales.cwiseInverse();
    const Matrix ls = left * inv.asDiagonal();
    const Matrix rs = right * inv.asDiagonal();
    Matrix out(left.rows(), right.rows());
    for (Eigen::Index j = 0; j < rs.rows(); ++j) {
      for (Eigen::Index i = 0; i < ls.rows(); ++i) {
        out(i, j) = signal_variance * std::exp(Scalar(-0.5) * (ls.row(i) - rs.row(j)).squaredNorm());
      }
    }
    return out;
  }

  /// k(x, rows) as a column vector.
  Vector column(const Matrix& rows, const Vector& x) const {
    if (x.size() != dim()) throw InputError("kernel: query dimension mismatch");
    check_columns(rows);
    const Vector inv = lengthscales.cwiseInverse();
    const Vector xs = x.cwiseProduct(inv);
    Vector out(rows.rows());
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
      out(i) = signal_variance *
               std::exp(Scalar(-0.5) * (rows.row(i).transpose().cwiseProduct(inv) - xs).squaredNorm());
    }
    return out;
  }

  /// Training covariance K + noise * I.
  Matrix gram(const Matrix& rows) const {
    Matrix k = cross(rows, rows);
    k.diagonal().array() += noise_variance;
    return k;
  }

  template <typename Other>
  SquaredExponential<Other> cast() const {
    SquaredExponential<Other> out;
    out.signal_variance = static_cast<Other>(signal_variance);
    out.lengthscales = lengthscales.template cast<Other>();
    out.noise_variance = static_cast<Other>(noise_variance);
    return out;
  }

 private:
  void check_columns(const Matrix& rows) const {
    if (rows.cols() != dim() && rows.rows() > 0) {
      throw InputError("kernel: input dimension " + std::to_string(rows.cols()) +
                       " does not match " + std::to_string(dim()) + " lengthscales");
    }
  }
};

using Kernel = SquaredExponential<double>;

/// Checked single evaluation.
template <typename Scalar, typename A, typename B>
Scalar kernel_eval(const SquaredExponential<Scalar>& k, const Eigen::MatrixBase<A>& a,
                   const Eigen::MatrixBase<B>& b) {
  if (a.size() != k.dim() || b.size() != k.dim()) {
    throw InputError("kernel_eval: dimension mismatch");
  }
  return k(a, b);
}

/// Box bounds for hyperparameter fitting.
struct KernelBounds {
  double signal_variance_min = 1e-6;
  double signal_variance_max = 1e6;
  double lengthscale_min = 1e-3;
  double lengthscale_max = 1e3;
  double noise_variance_min = 1e-8;
  double noise_variance_max = 1e2;
};

}  // namespace infotraj::gp

#endif  // INFOTRAJ_GP_KERNEL_HPP_
