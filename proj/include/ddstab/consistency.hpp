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
#ifndef DDSTAB_CONSISTENCY_HPP
#define DDSTAB_CONSISTENCY_HPP

#include <vector>

#include "ddstab/common.hpp"
#include "ddstab/data_gen.hpp"
#include "ddstab/ellipsoid.hpp"

namespace ddstab {

/// Pairs (A, B) explaining sample i with |d|^2 <= epsilon satisfy
/// Z^T A_i Z + Z^T B_i + B_i^T Z + C_i <= 0 for Z^T = [A B].
struct SampleQuadric {
  Index index = 0;
  Matrix A;  // w w^T, w = [x(i); u(i)]
  Matrix B;  // -w x(i+1)^T
  Matrix C;  // -epsilon I + x(i+1) x(i+1)^T
};

/// Quadric of the energy-bounded set, built from the whole record with the
/// energy bound epsilon * T.
struct AggregateQuadric {
  Matrix A;  // [X0; U0][X0; U0]^T
  Matrix B;  // -[X0; U0] X1^T
  Matrix C;  // -T epsilon I + X1 X1^T
};

/// Data-consistent dynamics: the energy set C, the per-sample sets C_i and
/// their intersection I.
class ConsistencySets {
 public:
  explicit ConsistencySets(DataSet data);

  const DataSet& data() const { return data_; }
  const std::vector<SampleQuadric>& samples() const { return samples_; }
  const AggregateQuadric& aggregate() const { return aggregate_; }
  Index n() const { return data_.n(); }
  Index m() const { return data_.m(); }

  /// The energy set as a quadratic-form ellipsoid with Z = [A B]^T.
  QuadraticFormEllipsoidd energy_set() const;

  /// Negated largest eigenvalue of the aggregate quadric at Z = [A B]^T.
  double member_C(const Matrix& A, const Matrix& B) const;
  /// Slack of a single sample: epsilon - |x(i+1) - A x(i) - B u(i)|^2, which is
  /// the negated largest eigenvalue of the rank-one sample quadric.
  double member_sample(Index i, const Matrix& A, const Matrix& B) const;
  /// Minimum sample slack; nonnegative iff (A, B) lies in every C_i.
  double member_I(const Matrix& A, const Matrix& B) const;
  /// Same as member_I for a stacked Z = [A B]^T.
  double member_I(const Matrix& Z) const;

  /// [X0; U0] has full row rank, i.e. the smallest eigenvalue of the
  /// aggregate A exceeds tol times the largest.
  bool is_bounded(double tol = 1e-8) const;

 private:
  void check_shapes(const Matrix& A, const Matrix& B) const;

  DataSet data_;
  std::vector<SampleQuadric> samples_;
  AggregateQuadric aggregate_;
};

inline ConsistencySets build_consistency(DataSet data) { return ConsistencySets(std::move(data)); }

/// Z = [A B]^T, the (n + m) x n matrix on which the quadrics act.
Matrix stack_dynamics(const Matrix& A, const Matrix& B);
/// Inverse of stack_dynamics.
std::pair<Matrix, Matrix> split_dynamics(const Matrix& Z, Index n);

/// Slack polynomial c0 + cA a + cB b + cAA a^2 + cBB b^2 + cAB a b of a
/// scalar-system quadric, in shifted coordinates a = A - A0, b = B - B0.
struct ScalarQuadricCoefficients {
  double c0 = 0, cA = 0, cB = 0, cAA = 0, cBB = 0, cAB = 0;
};
ScalarQuadricCoefficients scalar_coefficients(const Matrix& A, const Matrix& B, const Matrix& C,
                                              double A0, double B0);

/// Closed boundary of a 2 x 1 center-form ellipsoid, as `points` vertices of
/// Zc + P [cos t; sin t] sqrt(Q).
std::vector<Eigen::Vector2d> ellipse_boundary(const CenterFormEllipsoidd& e, int points);

struct GridPoint {
  double a = 0;
  double b = 0;
  bool member = false;
};

/// Membership of I on a regular (nx x ny) grid over [a_lo, a_hi] x [b_lo, b_hi]
/// for scalar systems.
std::vector<GridPoint> membership_grid_I(const ConsistencySets& cs, double a_lo, double a_hi,
                                         double b_lo, double b_hi, int nx, int ny);

}  // namespace ddstab

#endif  // DDSTAB_CONSISTENCY_HPP
