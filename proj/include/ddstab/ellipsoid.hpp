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
#ifndef DDSTAB_ELLIPSOID_HPP
#define DDSTAB_ELLIPSOID_HPP

#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "ddstab/common.hpp"

namespace ddstab {

/// Dimensions p x q of the matrices Z belonging to an ellipsoid.
struct MatrixShape {
  Index p = 1;
  Index q = 1;

  friend bool operator==(const MatrixShape&, const MatrixShape&) = default;
};

enum class Definiteness { StrictlyBounded, Degenerate };

/// {Z : (Z - Zc)^T P^{-2} (Z - Zc) <= Q}, with P > 0 and Q > 0.
template <typename Scalar>
struct CenterFormEllipsoid {
  MatrixShape shape;
  MatrixX<Scalar> Zc;
  MatrixX<Scalar> P;
  MatrixX<Scalar> Q;
};

/// {Z : Z^T A Z + Z^T B + B^T Z + C <= 0}. Degenerate instances (singular A,
/// as for a single data sample) are representable and carry the flag.
template <typename Scalar>
struct QuadraticFormEllipsoid {
  MatrixShape shape;
  MatrixX<Scalar> A;
  MatrixX<Scalar> B;
  MatrixX<Scalar> C;
  Definiteness definiteness = Definiteness::Degenerate;

  bool strictly_bounded() const { return definiteness == Definiteness::StrictlyBounded; }
};

using CenterFormEllipsoidd = CenterFormEllipsoid<double>;
using QuadraticFormEllipsoidd = QuadraticFormEllipsoid<double>;

namespace detail {

// Eigenvalues at or below this fraction of the largest one count as zero.
inline constexpr double kRelativeEigenTolerance = 1e-10;
inline constexpr double kSymmetryTolerance = 1e-12;

template <typename Scalar>
bool is_positive_definite(const Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>>& es) {
  const auto& ev = es.eigenvalues();
  const Scalar largest = ev(ev.size() - 1);
  if (!(largest > Scalar(0))) return false;
  return ev(0) > Scalar(kRelativeEigenTolerance) * largest;
}

template <typename Derived>
MatrixX<typename Derived::Scalar> ingest_symmetric(const Eigen::MatrixBase<Derived>& m,
                                                   const char* what) {
  if (m.rows() != m.cols()) throw ShapeMismatch(std::string(what) + " must be square");
  if (linalg::asymmetry(m) > typename Derived::Scalar(kSymmetryTolerance)) {
    throw std::invalid_argument(std::string(what) + " is not symmetric");
  }
  return linalg::symmetrized(m);
}

}  // namespace detail

/// Symmetric PSD square root via eigendecomposition.
template <typename Derived>
MatrixX<typename Derived::Scalar> symmetric_sqrt(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(linalg::symmetrized(m));
  const VectorX<Scalar> root = es.eigenvalues().cwiseMax(Scalar(0)).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

template <typename Scalar>
Definiteness classify(const MatrixX<Scalar>& A, const MatrixX<Scalar>& B,
                      const MatrixX<Scalar>& C) {
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es_a(A);
  if (!detail::is_positive_definite(es_a)) return Definiteness::Degenerate;
  const MatrixX<Scalar> Q = linalg::symmetrized(MatrixX<Scalar>(B.transpose() * A.ldlt().solve(B) - C));
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es_q(Q, Eigen::EigenvaluesOnly);
  return detail::is_positive_definite(es_q) ? Definiteness::StrictlyBounded
                                            : Definiteness::Degenerate;
}

template <typename DA, typename DB, typename DC>
QuadraticFormEllipsoid<typename DA::Scalar> make_quadratic_form(const Eigen::MatrixBase<DA>& A,
                                                                const Eigen::MatrixBase<DB>& B,
                                                                const Eigen::MatrixBase<DC>& C) {
  using Scalar = typename DA::Scalar;
  QuadraticFormEllipsoid<Scalar> e;
  e.A = detail::ingest_symmetric(A, "A");
  e.C = detail::ingest_symmetric(C, "C");
  e.B = B;
  if (e.B.rows() != e.A.rows() || e.B.cols() != e.C.rows()) {
    throw ShapeMismatch("quadratic form: B must be p x q with A p x p and C q x q");
  }
  e.shape = {e.A.rows(), e.C.rows()};
  e.definiteness = classify<Scalar>(e.A, e.B, e.C);
  return e;
}

template <typename DZ, typename DP, typename DQ>
CenterFormEllipsoid<typename DZ::Scalar> make_center_form(const Eigen::MatrixBase<DZ>& Zc,
                                                          const Eigen::MatrixBase<DP>& P,
                                                          const Eigen::MatrixBase<DQ>& Q) {
  using Scalar = typename DZ::Scalar;
  CenterFormEllipsoid<Scalar> e;
  e.Zc = Zc;
  e.P = detail::ingest_symmetric(P, "P");
  e.Q = detail::ingest_symmetric(Q, "Q");
  if (e.P.rows() != e.Zc.rows() || e.Q.rows() != e.Zc.cols()) {
    throw ShapeMismatch("center form: P must be p x p and Q q x q for a p x q center");
  }
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es_p(e.P, Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es_q(e.Q, Eigen::EigenvaluesOnly);
  if (!detail::is_positive_definite(es_p) || !detail::is_positive_definite(es_q)) {
    throw DegenerateEllipsoid("center form requires P > 0 and Q > 0");
  }
  e.shape = {e.Zc.rows(), e.Zc.cols()};
  return e;
}

/// Zc = -A^{-1} B, P = A^{-1/2}, Q = B^T A^{-1} B - C.
template <typename Scalar>
CenterFormEllipsoid<Scalar> quadratic_to_center(const QuadraticFormEllipsoid<Scalar>& e) {
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(e.A);
  if (!detail::is_positive_definite(es)) {
    throw DegenerateEllipsoid("quadratic form has a singular A");
  }
  const VectorX<Scalar> inv_root = es.eigenvalues().cwiseSqrt().cwiseInverse();
  const MatrixX<Scalar>& V = es.eigenvectors();
  const MatrixX<Scalar> A_inv = V * inv_root.cwiseAbs2().asDiagonal() * V.transpose();

  CenterFormEllipsoid<Scalar> c;
  c.shape = e.shape;
  c.Zc = -A_inv * e.B;
  c.P = linalg::symmetrized(MatrixX<Scalar>(V * inv_root.asDiagonal() * V.transpose()));
  c.Q = linalg::symmetrized(MatrixX<Scalar>(e.B.transpose() * A_inv * e.B - e.C));
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es_q(c.Q, Eigen::EigenvaluesOnly);
  if (!detail::is_positive_definite(es_q)) {
    throw DegenerateEllipsoid("B^T A^{-1} B - C is not positive definite");
  }
  return c;
}

/// A = P^{-2}, B = -A Zc, C = Zc^T A Zc - Q.
template <typename Scalar>
QuadraticFormEllipsoid<Scalar> center_to_quadratic(const CenterFormEllipsoid<Scalar>& e) {
  const MatrixX<Scalar> P_inv = e.P.ldlt().solve(MatrixX<Scalar>::Identity(e.P.rows(), e.P.cols()));
  QuadraticFormEllipsoid<Scalar> q;
  q.shape = e.shape;
  q.A = linalg::symmetrized(MatrixX<Scalar>(P_inv * P_inv));
  q.B = -q.A * e.Zc;
  q.C = linalg::symmetrized(MatrixX<Scalar>(e.Zc.transpose() * q.A * e.Zc - e.Q));
  q.definiteness = Definiteness::StrictlyBounded;
  return q;
}

/// Z^T A Z + Z^T B + B^T Z + C.
template <typename DA, typename DB, typename DC, typename DZ>
MatrixX<typename DA::Scalar> quadric_value(const Eigen::MatrixBase<DA>& A,
                                           const Eigen::MatrixBase<DB>& B,
                                           const Eigen::MatrixBase<DC>& C,
                                           const Eigen::MatrixBase<DZ>& Z) {
  using Scalar = typename DA::Scalar;
  const MatrixX<Scalar> ZtB = Z.transpose() * B;
  return linalg::symmetrized(MatrixX<Scalar>(Z.transpose() * A * Z + ZtB + ZtB.transpose() + C));
}

/// Negated largest eigenvalue of the quadric; nonnegative iff Z is a member.
template <typename Scalar, typename DZ>
Scalar membership(const QuadraticFormEllipsoid<Scalar>& e, const Eigen::MatrixBase<DZ>& Z) {
  if (Z.rows() != e.shape.p || Z.cols() != e.shape.q) {
    throw ShapeMismatch("membership: Z has the wrong shape");
  }
  return -linalg::max_eigenvalue(quadric_value(e.A, e.B, e.C, Z));
}

/// log of (det Q)^{p/2} (det P)^q.
template <typename Scalar>
Scalar log_size(const CenterFormEllipsoid<Scalar>& e) {
  const Scalar logdet_q = MatrixX<Scalar>(e.Q.llt().matrixL()).diagonal().array().log().sum() * 2;
  const Scalar logdet_p = MatrixX<Scalar>(e.P.llt().matrixL()).diagonal().array().log().sum() * 2;
  return Scalar(e.shape.p) / 2 * logdet_q + Scalar(e.shape.q) * logdet_p;
}

/// log of (det(B^T A^{-1} B - C))^{p/2} (det A^{-1})^{q/2}.
template <typename Scalar>
Scalar log_size(const QuadraticFormEllipsoid<Scalar>& e) {
  if (!e.strictly_bounded()) throw DegenerateEllipsoid("size of a degenerate ellipsoid");
  Eigen::LLT<MatrixX<Scalar>> llt_a(e.A);
  const MatrixX<Scalar> Q = linalg::symmetrized(MatrixX<Scalar>(e.B.transpose() * llt_a.solve(e.B) - e.C));
  Eigen::LLT<MatrixX<Scalar>> llt_q(Q);
  if (llt_a.info() != Eigen::Success || llt_q.info() != Eigen::Success) {
    throw DegenerateEllipsoid("size: factorization failed");
  }
  const Scalar logdet_a = MatrixX<Scalar>(llt_a.matrixL()).diagonal().array().log().sum() * 2;
  const Scalar logdet_q = MatrixX<Scalar>(llt_q.matrixL()).diagonal().array().log().sum() * 2;
  return Scalar(e.shape.p) / 2 * logdet_q - Scalar(e.shape.q) / 2 * logdet_a;
}

template <typename Scalar>
Scalar size(const CenterFormEllipsoid<Scalar>& e) {
  return std::exp(log_size(e));
}

template <typename Scalar>
Scalar size(const QuadraticFormEllipsoid<Scalar>& e) {
  return std::exp(log_size(e));
}

namespace detail {

// Largest eigenvalue of the smaller Gram matrix of Y, that is |Y|^2. Column
// norms bound it from below, so most rejections end before any eigenvalue.
template <typename Scalar>
Scalar gram_top_eigenvalue(const MatrixX<Scalar>& Y) {
  const MatrixX<Scalar> G = Y.rows() >= Y.cols() ? MatrixX<Scalar>(Y.transpose() * Y)
                                                 : MatrixX<Scalar>(Y * Y.transpose());
  const Scalar diag = G.diagonal().maxCoeff();
  if (diag > Scalar(1)) return diag;
  if (G.rows() == 1) return G(0, 0);
  if (G.rows() == 2) {
    const Scalar half = (G(0, 0) - G(1, 1)) / Scalar(2);
    return (G(0, 0) + G(1, 1)) / Scalar(2) + std::sqrt(half * half + G(0, 1) * G(0, 1));
  }
  if (G.rows() == 3) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<Scalar, 3, 3>> es;
    es.computeDirect(Eigen::Matrix<Scalar, 3, 3>(G), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(2);
  }
  return linalg::max_eigenvalue(G);
}

}  // namespace detail

/// Uniform draw from {Y in R^{p x q} : |Y| <= 1}. Exact for vectors; for
/// matrices, rejection from the Frobenius ball of radius sqrt(min(p, q)),
/// which contains the operator-norm ball.
template <typename Scalar, typename Rng>
MatrixX<Scalar> sample_operator_ball(MatrixShape shape, Rng& rng) {
  std::normal_distribution<Scalar> normal(0, 1);
  std::uniform_real_distribution<Scalar> uniform(0, 1);
  const Index dim = shape.p * shape.q;
  const Scalar radius = std::sqrt(Scalar(std::min(shape.p, shape.q)));
  MatrixX<Scalar> Y(shape.p, shape.q);
  for (;;) {
    for (Index k = 0; k < dim; ++k) Y(k) = normal(rng);
    const Scalar r = radius * std::pow(uniform(rng), Scalar(1) / Scalar(dim));
    Y *= r / Y.norm();
    if (radius == Scalar(1) || r <= Scalar(1)) return Y;  // |Y| <= |Y|_F
    if (detail::gram_top_eigenvalue(Y) <= Scalar(1)) return Y;
  }
}

/// Same center, left factor P scaled by `factor` (>= 1 gives a superset).
template <typename Scalar>
CenterFormEllipsoid<Scalar> inflate(const CenterFormEllipsoid<Scalar>& e, Scalar factor) {
  if (!(factor > Scalar(0))) throw std::invalid_argument("inflate: factor must be positive");
  CenterFormEllipsoid<Scalar> out = e;
  out.P *= factor;
  return out;
}

/// Zc + P Y Q^{1/2} with Y uniform in the operator-norm unit ball.
template <typename Scalar, typename Rng>
MatrixX<Scalar> sample_member(const CenterFormEllipsoid<Scalar>& e, Rng& rng) {
  return e.Zc + e.P * sample_operator_ball<Scalar>(e.shape, rng) * symmetric_sqrt(e.Q);
}

/// Zc + P Y Q^{1/2} for a caller-chosen Y.
template <typename Scalar, typename DY>
MatrixX<Scalar> member_at(const CenterFormEllipsoid<Scalar>& e, const Eigen::MatrixBase<DY>& Y) {
  return e.Zc + e.P * Y * symmetric_sqrt(e.Q);
}

struct VolumeRatioEstimate {
  double ratio = 0.0;
  double standard_error = 0.0;
  long hits_first = 0;
  long hits_second = 0;
  long draws = 0;
};

namespace detail {

// Hit-and-miss inside the axis-aligned box enclosing vec(E). Entry (i, j) of
// P Y Q^{1/2} is bounded by |P_i.| |Q^{1/2}_.j| whenever |Y| <= 1.
template <typename Scalar, typename Rng>
std::pair<long, Scalar> hit_and_miss(const CenterFormEllipsoid<Scalar>& e, long draws, Rng& rng) {
  const MatrixX<Scalar> Q_half = symmetric_sqrt(e.Q);
  const VectorX<Scalar> row_norms = e.P.rowwise().norm();
  const VectorX<Scalar> col_norms = Q_half.colwise().norm().transpose();
  const MatrixX<Scalar> half_width = row_norms * col_norms.transpose();
  const Scalar log_box = (Scalar(2) * half_width.array()).log().sum();

  const MatrixX<Scalar> P_inv = e.P.ldlt().solve(MatrixX<Scalar>::Identity(e.shape.p, e.shape.p));
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(e.Q);
  const MatrixX<Scalar> Q_inv_half = es.eigenvectors() *
                                     es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                                     es.eigenvectors().transpose();

  std::uniform_real_distribution<Scalar> unit(-1, 1);
  MatrixX<Scalar> offset(e.shape.p, e.shape.q);
  long hits = 0;
  for (long k = 0; k < draws; ++k) {
    for (Index c = 0; c < offset.size(); ++c) offset(c) = half_width(c) * unit(rng);
    const MatrixX<Scalar> W = P_inv * offset * Q_inv_half;
    // |W| <= 1 iff the larger Gram matrix has eigenvalues <= 1.
    const MatrixX<Scalar> gram = W.rows() >= W.cols() ? MatrixX<Scalar>(W.transpose() * W)
                                                      : MatrixX<Scalar>(W * W.transpose());
    if (gram.rows() == 1 ? gram(0, 0) <= Scalar(1) : linalg::max_eigenvalue(gram) <= Scalar(1)) {
      ++hits;
    }
  }
  return {hits, log_box};
}

}  // namespace detail

/// Monte-Carlo estimate of vol(e1) / vol(e2) over the vectorized sets, with a
/// delta-method standard error. Both ellipsoids must share (p, q).
template <typename Scalar, typename Rng>
VolumeRatioEstimate monte_carlo_volume_ratio(const CenterFormEllipsoid<Scalar>& e1,
                                             const CenterFormEllipsoid<Scalar>& e2, long draws,
                                             Rng& rng) {
  if (!(e1.shape == e2.shape)) throw ShapeMismatch("volume ratio needs equal shapes");
  if (draws <= 0) throw std::invalid_argument("volume ratio needs a positive draw count");
  const auto [hits1, log_box1] = detail::hit_and_miss(e1, draws, rng);
  const auto [hits2, log_box2] = detail::hit_and_miss(e2, draws, rng);
  VolumeRatioEstimate out;
  out.hits_first = hits1;
  out.hits_second = hits2;
  out.draws = draws;
  if (hits1 == 0 || hits2 == 0) {
    out.ratio = std::numeric_limits<double>::quiet_NaN();
    out.standard_error = std::numeric_limits<double>::infinity();
    return out;
  }
  const double f1 = double(hits1) / double(draws);
  const double f2 = double(hits2) / double(draws);
  out.ratio = std::exp(double(log_box1 - log_box2)) * f1 / f2;
  const double rel_var = (1 - f1) / (double(draws) * f1) + (1 - f2) / (double(draws) * f2);
  out.standard_error = out.ratio * std::sqrt(rel_var);
  return out;
}

}  // namespace ddstab

#endif  // DDSTAB_ELLIPSOID_HPP
