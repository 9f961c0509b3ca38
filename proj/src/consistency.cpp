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
#include "ddstab/consistency.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace ddstab {

ConsistencySets::ConsistencySets(DataSet data) : data_(std::move(data)) {
  data_.validate();
  const Index n = data_.n();
  const double eps = data_.epsilon;
  const Matrix W = data_.regressor();
  const Matrix I = Matrix::Identity(n, n);

  samples_.reserve(std::size_t(data_.T()));
  for (Index i = 0; i < data_.T(); ++i) {
    const Vector w = W.col(i);
    const Vector next = data_.X1.col(i);
    SampleQuadric s;
    s.index = i;
    s.A = w * w.transpose();
    s.B = -w * next.transpose();
    s.C = -eps * I + next * next.transpose();
    samples_.push_back(std::move(s));
  }
  aggregate_.A = W * W.transpose();
  aggregate_.B = -W * data_.X1.transpose();
  aggregate_.C = -double(data_.T()) * eps * I + data_.X1 * data_.X1.transpose();
}

QuadraticFormEllipsoidd ConsistencySets::energy_set() const {
  return make_quadratic_form(aggregate_.A, aggregate_.B, aggregate_.C);
}

Matrix stack_dynamics(const Matrix& A, const Matrix& B) {
  Matrix Z(A.cols() + B.cols(), A.rows());
  Z << A.transpose(), B.transpose();
  return Z;
}

std::pair<Matrix, Matrix> split_dynamics(const Matrix& Z, Index n) {
  return {Z.topRows(n).transpose(), Z.bottomRows(Z.rows() - n).transpose()};
}

void ConsistencySets::check_shapes(const Matrix& A, const Matrix& B) const {
  if (A.rows() != n() || A.cols() != n() || B.rows() != n() || B.cols() != m()) {
    throw ShapeMismatch("(A, B) does not match the data dimensions");
  }
}

double ConsistencySets::member_C(const Matrix& A, const Matrix& B) const {
  check_shapes(A, B);
  const Matrix Z = stack_dynamics(A, B);
  return -linalg::max_eigenvalue(quadric_value(aggregate_.A, aggregate_.B, aggregate_.C, Z));
}

double ConsistencySets::member_sample(Index i, const Matrix& A, const Matrix& B) const {
  check_shapes(A, B);
  const Vector r = data_.X1.col(i) - A * data_.X0.col(i) - B * data_.U0.col(i);
  return data_.epsilon - r.squaredNorm();
}

double ConsistencySets::member_I(const Matrix& A, const Matrix& B) const {
  check_shapes(A, B);
  const Matrix R = data_.X1 - A * data_.X0 - B * data_.U0;
  return data_.epsilon - R.colwise().squaredNorm().maxCoeff();
}

double ConsistencySets::member_I(const Matrix& Z) const {
  if (Z.rows() != n() + m() || Z.cols() != n()) throw ShapeMismatch("Z must be (n + m) x n");
  const auto [A, B] = split_dynamics(Z, n());
  return member_I(A, B);
}

bool ConsistencySets::is_bounded(double tol) const {
  Eigen::SelfAdjointEigenSolver<Matrix> es(aggregate_.A, Eigen::EigenvaluesOnly);
  const double largest = es.eigenvalues().maxCoeff();
  return largest > 0.0 && es.eigenvalues().minCoeff() > tol * largest;
}

ScalarQuadricCoefficients scalar_coefficients(const Matrix& A, const Matrix& B, const Matrix& C,
                                              double A0, double B0) {
  if (A.rows() != 2 || A.cols() != 2 || B.rows() != 2 || B.cols() != 1 || C.size() != 1) {
    throw ShapeMismatch("scalar coefficients need a 2 x 2 / 2 x 1 / 1 x 1 quadric");
  }
  // slack(Z0 + dZ) = -(dZ^T A dZ + 2 dZ^T (A Z0 + B) + Z0^T A Z0 + 2 Z0^T B + C)
  const Eigen::Vector2d z0(A0, B0);
  const Eigen::Vector2d lin = A * z0 + B;
  ScalarQuadricCoefficients c;
  c.c0 = -(z0.dot(A * z0) + 2.0 * z0.dot(B.col(0)) + C(0, 0));
  c.cA = -2.0 * lin(0);
  c.cB = -2.0 * lin(1);
  c.cAA = -A(0, 0);
  c.cBB = -A(1, 1);
  c.cAB = -2.0 * A(0, 1);
  return c;
}

std::vector<Eigen::Vector2d> ellipse_boundary(const CenterFormEllipsoidd& e, int points) {
  if (e.shape.p != 2 || e.shape.q != 1) throw ShapeMismatch("ellipse boundary needs a 2 x 1 shape");
  std::vector<Eigen::Vector2d> out;
  out.reserve(std::size_t(std::max(points, 0)));
  const double radius = std::sqrt(e.Q(0, 0));
  for (int k = 0; k < points; ++k) {
    const double t = 2.0 * std::numbers::pi * double(k) / double(points);
    const Eigen::Vector2d y(std::cos(t), std::sin(t));
    out.emplace_back(e.Zc.col(0) + e.P * y * radius);
  }
  return out;
}

std::vector<GridPoint> membership_grid_I(const ConsistencySets& cs, double a_lo, double a_hi,
                                         double b_lo, double b_hi, int nx, int ny) {
  if (cs.n() != 1 || cs.m() != 1) throw ShapeMismatch("membership grid is for scalar systems");
  if (nx < 2 || ny < 2) throw std::invalid_argument("grid needs at least 2 x 2 points");
  std::vector<GridPoint> out;
  out.reserve(std::size_t(nx) * std::size_t(ny));
  Matrix A(1, 1), B(1, 1);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      GridPoint g;
      g.a = a_lo + (a_hi - a_lo) * double(i) / double(nx - 1);
      g.b = b_lo + (b_hi - b_lo) * double(j) / double(ny - 1);
      A(0, 0) = g.a;
      B(0, 0) = g.b;
      g.member = cs.member_I(A, B) >= 0.0;
      out.push_back(g);
    }
  }
  return out;
}

}  // namespace ddstab
