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
#include "ddstab/sampling.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace ddstab {

namespace {

// [[I, r_i], [r_i^T, bound]] >= 0 for each sample, r_i = x(i+1) - Z^T w_i.
sdp::ConicProblem interior_problem(const ConsistencySets& cs, double bound) {
  const DataSet& d = cs.data();
  const Index n = cs.n();
  const Index p = n + cs.m();
  const Matrix W = d.regressor();
  sdp::ConicProblem problem;
  const sdp::Variable z = problem.layout.add_matrix("Z", p, n);
  for (Index i = 0; i < d.T(); ++i) {
    sdp::LmiBlock block("sample" + std::to_string(i), n + 1);
    block.add_constant(Matrix::Identity(n, n), 0, 0);
    block.add_constant(Matrix(d.X1.col(i)), 0, n);
    block.add_constant(Matrix::Constant(1, 1, bound), n, n);
    for (Index k = 0; k < z.size; ++k) {
      const Matrix E = sdp::DecisionLayout::basis(z, k);
      const Vector coef = -E.transpose() * W.col(i);
      if (coef.squaredNorm() > 0.0) block.add_term(z.offset + k, Matrix(coef), 0, n);
    }
    problem.blocks.push_back(std::move(block));
  }
  return problem;
}

}  // namespace

std::optional<Matrix> interior_point_I(const ConsistencySets& cs, const sdp::SolverSettings& settings) {
  const double eps = cs.data().epsilon;
  for (const double shrink : {0.5, 0.9, 0.99, 1.0}) {
    const sdp::ConicProblem problem = interior_problem(cs, shrink * eps);
    const sdp::SolveReport report = sdp::solve_feasibility(problem, settings);
    if (report.status != sdp::SolveStatus::Solved) continue;
    const Matrix Z = problem.layout.value(report.x, "Z");
    if (cs.member_I(Z) > 0.0) return Z;
  }
  return std::nullopt;
}

IntersectionWalk::IntersectionWalk(const ConsistencySets& cs, Matrix start, Rng& rng,
                                   HitAndRunOptions options)
    : cs_(cs), W_(cs.data().regressor()), Z_(std::move(start)), options_(options) {
  if (!cs.is_bounded()) throw UnboundedSet("hit-and-run needs a bounded energy set");
  if (!(cs.member_I(Z_) > 0.0)) throw Error("hit-and-run needs a start strictly inside I");
  const CenterFormEllipsoidd C = quadratic_to_center(cs.energy_set());
  P_ = C.P;
  Q_half_ = symmetric_sqrt(C.Q);
  residual_ = cs.data().X1 - Z_.transpose() * W_;
  for (Index k = 0; k < options_.burn_in; ++k) step(rng);
}

void IntersectionWalk::step(Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  Matrix G(Z_.rows(), Z_.cols());
  for (Index k = 0; k < G.size(); ++k) G(k) = normal(rng);
  const Matrix D = P_ * G * Q_half_;

  // Along Z + s D the residual of sample i is r_i - s g_i with g_i = D^T w_i,
  // and |r_i - s g_i|^2 <= eps is an interval in s containing 0.
  const Matrix Gs = D.transpose() * W_;
  const double eps = cs_.data().epsilon;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < Gs.cols(); ++i) {
    const double a = Gs.col(i).squaredNorm();
    if (a == 0.0) continue;
    const double b = residual_.col(i).dot(Gs.col(i));
    const double c = residual_.col(i).squaredNorm() - eps;
    const double root = std::sqrt(std::max(0.0, b * b - a * c));
    lo = std::max(lo, (b - root) / a);
    hi = std::min(hi, (b + root) / a);
  }
  if (!std::isfinite(lo) || !std::isfinite(hi)) throw UnboundedSet("hit-and-run chord is unbounded");
  const double s = lo + (hi - lo) * uniform(rng);
  Z_ += s * D;
  residual_ -= s * Gs;
  ++steps_;
  // Rebuild now and then so rank-one updates do not drift.
  if (steps_ % 256 == 0) residual_ = cs_.data().X1 - Z_.transpose() * W_;
}

const Matrix& IntersectionWalk::next(Rng& rng) {
  for (Index k = 0; k < std::max<Index>(1, options_.thinning); ++k) step(rng);
  return Z_;
}

}  // namespace ddstab
