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
#ifndef DDSTAB_DATA_GEN_HPP
#define DDSTAB_DATA_GEN_HPP

#include <string>
#include <string_view>

#include "ddstab/common.hpp"

namespace ddstab {

/// x(i+1) = A x(i) + B u(i) + d(i).
struct LtiSystem {
  Matrix A;
  Matrix B;

  Index n() const { return A.rows(); }
  Index m() const { return B.cols(); }
  void validate() const;
};

enum class DisturbanceKind { Zero, UniformInterval, UniformBall };

/// Disturbances obey |d|^2 <= epsilon. The optional prefix holds explicit
/// leading columns; draws from `kind` start after it.
struct DisturbanceModel {
  DisturbanceKind kind = DisturbanceKind::Zero;
  double epsilon = 0.0;
  Matrix prefix;
};

enum class InputKind { ExplicitSequence, Uniform, StandardNormal };

/// For ExplicitSequence the prefix must cover every step.
struct InputModel {
  InputKind kind = InputKind::StandardNormal;
  double lower = -1.0;
  double upper = 1.0;
  Matrix prefix;
};

/// Measured data: column i of X1 is the successor of column i of X0 under
/// input column i of U0. The energy bound is always epsilon * T.
struct DataSet {
  Matrix X0;
  Matrix X1;
  Matrix U0;
  double epsilon = 0.0;

  Index n() const { return X0.rows(); }
  Index m() const { return U0.rows(); }
  Index T() const { return X0.cols(); }
  double energy_bound() const { return epsilon * double(T()); }

  /// Stacked regressor [X0; U0].
  Matrix regressor() const;
  /// First `length` samples.
  DataSet prefix(Index length) const;
  void validate() const;
};

struct Trajectory {
  DataSet data;
  Matrix disturbances;  // n x T, column i is d(i)
};

Trajectory simulate(const LtiSystem& system, const Vector& x0, const InputModel& inputs,
                    const DisturbanceModel& disturbances, Index T, Rng& rng);

/// Uniform on the Euclidean ball of radius sqrt(epsilon).
Vector sample_uniform_ball(Index dim, double epsilon, Rng& rng);

/// The scalar three-sample record with A* = B* = 1/2, x(0) = 1, u = (1, -1, 0),
/// d = 0 and epsilon = 1, truncated to T in {1, 2, 3}.
DataSet example1_dataset(int T);

std::string to_csv(const DataSet& data);
DataSet dataset_from_csv(std::string_view text);

}  // namespace ddstab

#endif  // DDSTAB_DATA_GEN_HPP
