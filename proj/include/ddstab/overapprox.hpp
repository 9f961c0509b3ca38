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
#ifndef DDSTAB_OVERAPPROX_HPP
#define DDSTAB_OVERAPPROX_HPP

#include <json.hpp>
#include <optional>
#include <vector>

#include "ddstab/common.hpp"
#include "ddstab/consistency.hpp"
#include "ddstab/ellipsoid.hpp"
#include "ddstab/sampling.hpp"
#include "ddstab/sdp.hpp"

namespace ddstab {

struct OverapproxSettings {
  sdp::SolverSettings solver;
  /// Floor on Abar; defaults to default_overapprox_delta.
  std::optional<double> delta;
};

/// 1e-8 * max(1, trace(A_I) / T).
double default_overapprox_delta(const ConsistencySets& cs);

/// Ellipsoid {Z : Z^T Abar Z + Z^T Bbar + Bbar^T Z + Cbar <= 0} covering I,
/// normalized so that Cbar = Bbar^T Abar^-1 Bbar - I.
struct OverapproxResult {
  sdp::SolveStatus status = sdp::SolveStatus::NumericalFailure;
  Matrix Abar;
  Matrix Bbar;
  Vector tau;
  /// log det Abar at the returned point.
  double logdet = 0.0;
  /// det(Abar)^(-n/2).
  double size = 0.0;
  double delta = 0.0;
  double worst_residual = 0.0;
  double gap = 0.0;
  int iterations = 0;
  double seconds = 0.0;
  std::string message;

  bool solved() const { return status == sdp::SolveStatus::Solved; }
  Index n() const { return Bbar.cols(); }
  Matrix Cbar() const;
  QuadraticFormEllipsoidd ellipsoid() const;
};

/// Log-det program over (Abar, Bbar, tau): the containment block
///   [ -I - sum tau C_i    Bbar^T - sum tau B_i^T   Bbar^T ]
///   [ Bbar - sum tau B_i  Abar - sum tau A_i       0      ]  <= 0
///   [ Bbar                0                        -Abar  ]
/// with tau >= 0 and Abar >= delta I, maximizing log det Abar.
sdp::ConicProblem assemble_overapprox(const ConsistencySets& cs, double delta);

/// Throws InfeasibleContainment when the energy set is unbounded or the
/// program is proven infeasible.
OverapproxResult compute_overapprox(const ConsistencySets& cs, const OverapproxSettings& settings = {});

struct ContainmentReport {
  Index candidates = 0;
  Index in_I = 0;
  Index violations = 0;
  /// Smallest membership slack in the over-approximation among members of I.
  double min_slack = 0.0;
};

struct ContainmentOptions {
  double slack_tol = 1e-7;
  ISampling sampling = ISampling::Rejection;
  /// Rejection proposal; the center form of the energy set when absent. It
  /// must contain I for the check to cover all of I.
  std::optional<CenterFormEllipsoidd> proposal;
  HitAndRunOptions walk;
};

/// Draws `candidates` points (rejection proposals or walk members), keeps the
/// members of I and counts those outside the over-approximation by more than
/// slack_tol.
ContainmentReport containment_check(const OverapproxResult& r, const ConsistencySets& cs,
                                    Index candidates, Rng& rng, const ContainmentOptions& options = {});

/// size(C) / size(Ibar), computed from log sizes.
double size_ratio(const ConsistencySets& cs, const OverapproxResult& r);

/// Boundary polyline of a scalar-system over-approximation in (A, B).
std::vector<Eigen::Vector2d> overapprox_boundary(const OverapproxResult& r, int points);

nlohmann::json to_json(const OverapproxResult& r);

}  // namespace ddstab

#endif  // DDSTAB_OVERAPPROX_HPP
