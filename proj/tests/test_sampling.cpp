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
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ddstab/sampling.hpp"

using namespace ddstab;

TEST_CASE("interior point of the rhombus and uniform walk over it") {
  const ConsistencySets cs(example1_dataset(2));
  const auto start = interior_point_I(cs);
  REQUIRE(start.has_value());
  CHECK(cs.member_I(*start) > 0.0);

  Rng rng(10);
  IntersectionWalk walk(cs, *start, rng);
  // The rhombus |a + b - 1| <= 1, |a - b| <= 1 is a square of area 2 centered
  // at (1/2, 1/2); the disk of radius 1/2 covers pi / 8 of it.
  const int draws = 40000;
  int inner = 0;
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (int k = 0; k < draws; ++k) {
    const Matrix& Z = walk.next(rng);
    REQUIRE(cs.member_I(Z) >= -1e-12);
    const Eigen::Vector2d v(Z(0, 0), Z(1, 0));
    mean += v / draws;
    if ((v - Eigen::Vector2d(0.5, 0.5)).norm() <= 0.5) ++inner;
  }
  CHECK(std::abs(double(inner) / draws - std::numbers::pi / 8.0) < 0.02);
  CHECK((mean - Eigen::Vector2d(0.5, 0.5)).norm() < 0.02);
  CHECK(walk.steps() == 1000 + 10 * draws);
}

TEST_CASE("walk rejects bad starts and unbounded sets") {
  Rng rng(1);
  const ConsistencySets cs(example1_dataset(2));
  CHECK_THROWS_AS(IntersectionWalk(cs, Matrix::Constant(2, 1, 5.0), rng), Error);
  CHECK_THROWS_AS(IntersectionWalk(ConsistencySets(example1_dataset(1)), Matrix::Constant(2, 1, 0.5), rng),
                  UnboundedSet);
}

TEST_CASE("no interior point when the samples contradict each other") {
  DataSet d;
  d.X0 = (Matrix(1, 2) << 1.0, 1.0).finished();
  d.U0 = Matrix::Zero(1, 2);
  d.X1 = (Matrix(1, 2) << 0.0, 3.0).finished();
  d.epsilon = 1.0;
  // |a| <= 1 and |3 - a| <= 1 cannot both hold.
  CHECK_FALSE(interior_point_I(ConsistencySets(d)).has_value());
}

TEST_CASE("walk members stay in I for a multivariable record") {
  LtiSystem s;
  s.A = (Matrix(2, 2) << 0.6, 0.2, -0.1, 0.8).finished();
  s.B = (Matrix(2, 1) << 1.0, 0.5).finished();
  DisturbanceModel dm;
  dm.kind = DisturbanceKind::UniformBall;
  dm.epsilon = 0.1;
  Rng rng(4);
  const ConsistencySets cs(simulate(s, Vector::Zero(2), InputModel{}, dm, 80, rng).data);
  const auto start = interior_point_I(cs);
  REQUIRE(start.has_value());
  IntersectionWalk walk(cs, *start, rng, {200, 5});
  double worst = 1.0;
  for (int k = 0; k < 5000; ++k) worst = std::min(worst, cs.member_I(walk.next(rng)));
  CHECK(worst >= -1e-12);
}
