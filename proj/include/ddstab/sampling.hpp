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
#ifndef DDSTAB_SAMPLING_HPP
#define DDSTAB_SAMPLING_HPP

#include <optional>

#include "ddstab/common.hpp"
#include "ddstab/consistency.hpp"
#include "ddstab/sdp.hpp"

namespace ddstab {

/// How members of I are drawn. Rejection filters draws from a proposal
/// ellipsoid; HitAndRun walks inside I, which stays cheap when I fills only a
/// sliver of every enclosing ellipsoid.
enum class ISampling { Rejection, HitAndRun };

/// A point Z = [A B]^T with every sample slack positive, or nullopt when none
/// is found. Tries the shrunken bounds epsilon * {1/2, 9/10, 99/100, 1} in turn
/// so that the point sits deep inside I when I has room.
std::optional<Matrix> interior_point_I(const ConsistencySets& cs, const sdp::SolverSettings& settings = {});

struct HitAndRunOptions {
  Index burn_in = 1000;
  /// Walk steps between returned members.
  Index thinning = 10;
};

/// Hit-and-run on the convex set I. Directions are Gaussian after the affine
/// map Y -> P Y Q^{1/2} of the energy set's center form, which roughly matches
/// the shape of I; chords are exact from the per-sample quadratics. Successive
/// members are correlated; the chain converges to the uniform law on I.
class IntersectionWalk {
 public:
  /// Throws UnboundedSet when the energy set is unbounded and Error when
  /// `start` is not strictly inside I.
  IntersectionWalk(const ConsistencySets& cs, Matrix start, Rng& rng, HitAndRunOptions options = {});

  /// Advances `thinning` steps and returns the current member.
  const Matrix& next(Rng& rng);
  Index steps() const { return steps_; }

 private:
  void step(Rng& rng);

  const ConsistencySets& cs_;
  Matrix W_;  // regressor [X0; U0]
  Matrix Z_;
  Matrix residual_;  // X1 - Z^T W, updated along each chord
  Matrix P_;
  Matrix Q_half_;
  HitAndRunOptions options_;
  Index steps_ = 0;
};

}  // namespace ddstab

#endif  // DDSTAB_SAMPLING_HPP
