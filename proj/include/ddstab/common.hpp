/*
 Copyright 2026 The ddstab Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#ifndef DDSTAB_COMMON_HPP
#define DDSTAB_COMMON_HPP

#include <Eigen/Dense>

#include <random>
#include <stdexcept>
#include <string>

namespace ddstab {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Caller-owned random state; never shared between concurrent tasks.
using Rng = std::mt19937_64;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a quadratic-form ellipsoid is not strictly bounded (A or the
/// completed-square term has a nonpositive eigenvalue).
class DegenerateEllipsoid : public Error {
 public:
  using Error::Error;
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

/// Raised when [X0; U0] lacks full row rank, so the energy set is unbounded.
class UnboundedSet : public Error {
 public:
  using Error::Error;
};

class InfeasibleContainment : public Error {
 public:
  using Error::Error;
};

class NumericalFailure : public Error {
 public:
  using Error::Error;
};

namespace linalg {

template <typename Derived>
MatrixX<typename Derived::Scalar> symmetrized(const Eigen::MatrixBase<Derived>& m) {
  return (m + m.transpose()) / typename Derived::Scalar(2);
}

/// Relative Frobenius asymmetry ||M - M^T|| / max(1, ||M||).
template <typename Derived>
typename Derived::Scalar asymmetry(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  const Scalar scale = std::max(Scalar(1), m.norm());
  return (m - m.transpose()).norm() / scale;
}

template <typename Derived>
typename Derived::Scalar min_eigenvalue(const Eigen::MatrixBase<Derived>& m) {
  Eigen::SelfAdjointEigenSolver<MatrixX<typename Derived::Scalar>> es(
      symmetrized(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

template <typename Derived>
typename Derived::Scalar max_eigenvalue(const Eigen::MatrixBase<Derived>& m) {
  Eigen::SelfAdjointEigenSolver<MatrixX<typename Derived::Scalar>> es(
      symmetrized(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(es.eigenvalues().size() - 1);
}

/// Largest eigenvalue modulus of a general square matrix.
template <typename Derived>
typename Derived::Scalar spectral_radius(const Eigen::MatrixBase<Derived>& m) {
  if (m.rows() == 1) return std::abs(m(0, 0));
  Eigen::EigenSolver<MatrixX<typename Derived::Scalar>> es(m.eval(), false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

/// Induced 2-norm.
template <typename Derived>
typename Derived::Scalar operator_norm(const Eigen::MatrixBase<Derived>& m) {
  if (m.cols() == 1 || m.rows() == 1) return m.norm();
  Eigen::JacobiSVD<MatrixX<typename Derived::Scalar>> svd(m.eval());
  return svd.singularValues()(0);
}

}  // namespace linalg
}  // namespace ddstab

#endif  // DDSTAB_COMMON_HPP
