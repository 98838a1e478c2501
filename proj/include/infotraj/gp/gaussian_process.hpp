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

#ifndef INFOTRAJ_GP_GAUSSIAN_PROCESS_HPP_
#define INFOTRAJ_GP_GAUSSIAN_PROCESS_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "infotraj/gp/kernel.hpp"

namespace infotraj::gp {

/// Relative diagonal jitter levels tried, in order, when K + noise*I is not
/// numerically positive definite. The first attempt uses no jitter.
inline constexpr std::array<double, 6> kJitterLadder = {0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6};

template <typename Scalar>
struct Factorization {
  Eigen::LLT<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> llt;
  Scalar jitter{0};
};

/// Cholesky of a symmetric matrix, escalating diagonal jitter (relative to the
/// mean diagonal) until the factor exists and is finite.
///
/// `scale` overrides the reference magnitude for the jitter (useful when the
/// matrix can be exactly singular, e.g. a posterior covariance at training
/// inputs); `first_level` skips the leading rungs of the ladder.
template <typename Scalar>
Factorization<Scalar> factorize_spd(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& a,
                                    Scalar scale = Scalar(0), std::size_t first_level = 0) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Factorization<Scalar> out;
  if (a.rows() == 0) return out;
  if (!(scale > Scalar(0))) {
    scale = std::max<Scalar>(a.diagonal().cwiseAbs().mean(), Scalar(1e-300));
  }
  for (std::size_t rung = first_level; rung < kJitterLadder.size(); ++rung) {
    const double level = kJitterLadder[rung];
    Matrix m = a;
    const Scalar jitter = static_cast<Scalar>(level) * scale;
    m.diagonal().array() += jitter;
    out.llt.compute(m);
    if (out.llt.info() == Eigen::Success) {
      const Matrix l = out.llt.matrixL();
      if (l.allFinite() && (l.diagonal().array() > Scalar(0)).all()) {
        out.jitter = jitter;
        return out;
      }
    }
  }
  throw NumericalError("covariance is not positive definite after jitter escalation");
}

/// Exact GP regression for one output channel. Immutable once built: all
/// queries are const and safe to issue from several threads.
template <typename Scalar>
class GaussianProcess {
 public:
  using KernelType = SquaredExponential<Scalar>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  explicit GaussianProcess(KernelType kernel)
      : GaussianProcess(std::move(kernel), Matrix(0, 0), Vector(0)) {}

  GaussianProcess(KernelType kernel, Matrix inputs, Vector targets)
      : kernel_(std::move(kernel)), inputs_(std::move(inputs)), targets_(std::move(targets)) {
    kernel_.validate();
    if (inputs_.rows() != targets_.size()) {
      throw InputError("GaussianProcess: inputs and targets differ in length");
    }
    if (inputs_.rows() == 0) {
      inputs_.resize(0, kernel_.dim());
      return;
    }
    if (inputs_.cols() != kernel_.dim()) {
      throw InputError("GaussianProcess: input dimension does not match kernel");
    }
    factor_ = factorize_spd<Scalar>(kernel_.gram(inputs_));
    alpha_ = factor_.llt.solve(targets_);
  }

  const KernelType& kernel() const { return kernel_; }
  const Matrix& inputs() const { return inputs_; }
  const Vector& targets() const { return targets_; }
  Eigen::Index size() const { return inputs_.rows(); }
  Eigen::Index dim() const { return kernel_.dim(); }
  Scalar jitter() const { return factor_.jitter; }
  const Vector& alpha() const { return alpha_; }

  Scalar prior_variance() const { return kernel_.signal_variance + kernel_.noise_variance; }

  Scalar mean(const Vector& query) const {
    check_query(query);
    if (size() == 0) return Scalar(0);
    return kernel_.column(inputs_, query).dot(alpha_);
  }

  /// Predictive variance of a noisy observation at `query`.
  Scalar variance(const Vector& query) const {
    check_query(query);
    if (size() == 0) return prior_variance();
    Vector k = kernel_.column(inputs_, query);
    factor_.llt.matrixL().solveInPlace(k);
    return clamp_variance(prior_variance() - k.squaredNorm());
  }

  std::pair<Scalar, Scalar> predict(const Vector& query) const {
    check_query(query);
    if (size() == 0) return {Scalar(0), prior_variance()};
    Vector k = kernel_.column(inputs_, query);
    const Scalar mu = k.dot(alpha_);
    factor_.llt.matrixL().solveInPlace(k);
    return {mu, clamp_variance(prior_variance() - k.squaredNorm())};
  }

  /// Means at the rows of `queries`.
  Vector mean_rows(const Matrix& queries) const {
    if (size() == 0) return Vector::Zero(queries.rows());
    return kernel_.cross(queries, inputs_) * alpha_;
  }

  /// Predictive variances at the rows of `queries`.
  Vector variance_rows(const Matrix& queries) const {
    Vector out(queries.rows());
    if (size() == 0) {
      out.setConstant(prior_variance());
      return out;
    }
    Matrix ks = kernel_.cross(inputs_, queries);
    factor_.llt.matrixL().solveInPlace(ks);
    for (Eigen::Index j = 0; j < queries.rows(); ++j) {
      out(j) = clamp_variance(prior_variance() - ks.col(j).squaredNorm());
    }
    return out;
  }

  /// Posterior covariance of the latent function at the rows of `points`
  /// (no observation noise).
  Matrix latent_covariance(const Matrix& points) const {
    Matrix cov = kernel_.cross(points, points);
    if (size() == 0) return cov;
    Matrix ks = kernel_.cross(inputs_, points);
    factor_.llt.matrixL().solveInPlace(ks);
    cov.noalias() -= ks.transpose() * ks;
    return cov;
  }

  /// (K + noise*I)^-1 * rhs.
  Matrix solve(const Matrix& rhs) const {
    if (size() == 0) return Matrix(0, rhs.cols());
    return factor_.llt.solve(rhs);
  }

  Scalar log_marginal_likelihood() const {
    if (size() == 0) return Scalar(0);
    const Matrix l = factor_.llt.matrixL();
    const Scalar log_det = Scalar(2) * l.diagonal().array().log().sum();
    return Scalar(-0.5) * targets_.dot(alpha_) - Scalar(0.5) * log_det -
           Scalar(0.5) * static_cast<Scalar>(size()) * std::log(Scalar(2) * Scalar(M_PI));
  }

  /// New process trained on the union of the current and the new data.
  GaussianProcess condition(const Matrix& new_inputs, const Vector& new_targets) const {
    if (new_inputs.rows() != new_targets.size()) {
      throw InputError("condition: inputs and targets differ in length");
    }
    if (new_inputs.rows() == 0) return *this;
    if (new_inputs.cols() != dim()) throw InputError("condition: dimension mismatch");
    Matrix x(size() + new_inputs.rows(), dim());
    x << inputs_, new_inputs;
    Vector y(size() + new_targets.size());
    y << targets_, new_targets;
    return GaussianProcess(kernel_, std::move(x), std::move(y));
  }

  GaussianProcess with_kernel(KernelType kernel) const {
    return GaussianProcess(std::move(kernel), inputs_, targets_);
  }

 private:
  void check_query(const Vector& query) const {
    if (query.size() != dim()) throw InputError("GaussianProcess: query dimension mismatch");
  }

  Scalar clamp_variance(Scalar v) const {
    return std::clamp(v, Scalar(0), prior_variance());
  }

  KernelType kernel_;
  Matrix inputs_;
  Vector targets_;
  Factorization<Scalar> factor_;
  Vector alpha_;
};

}  // namespace infotraj::gp

#endif  // INFOTRAJ_GP_GAUSSIAN_PROCESS_HPP_
