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
#ifndef DDSTAB_SYNTHESIS_HPP
#define DDSTAB_SYNTHESIS_HPP

#include <json.hpp>
#include <optional>
#include <string>

#include "ddstab/common.hpp"
#include "ddstab/consistency.hpp"
#include "ddstab/data_gen.hpp"
#include "ddstab/ellipsoid.hpp"
#include "ddstab/sampling.hpp"
#include "ddstab/sdp.hpp"

namespace ddstab {

/// Energy: one multiplier for the aggregate quadric. Instantaneous: one
/// multiplier per sample.
enum class Approach { Energy, Instantaneous };

const char* to_string(Approach approach);
Approach approach_from_string(const std::string& text);

struct SynthesisSettings {
  sdp::SolverSettings solver;
  /// Strictness margin; defaults to default_synthesis_delta(data).
  std::optional<double> delta;
};

/// 1e-6 * max(1, |X1|_2).
double default_synthesis_delta(const DataSet& data);

struct SynthesisResult {
  Approach approach = Approach::Energy;
  sdp::SolveStatus status = sdp::SolveStatus::NumericalFailure;
  Matrix P;
  Matrix Y;
  double beta = 0.0;
  /// alpha (one entry) or tau_0 ... tau_{T-1}.
  Vector multipliers;
  /// Y P^-1; empty unless solved.
  Matrix K;
  double delta = 0.0;
  double margin = 0.0;
  double worst_residual = 0.0;
  int iterations = 0;
  double seconds = 0.0;
  std::string message;

  bool solved() const { return status == sdp::SolveStatus::Solved; }
};

/// Outer block of dimension 3n + m in the variables P, Y, beta, less
/// alpha * N diag(T eps I, -I) N^T, with alpha >= 0, beta >= delta,
/// P >= delta I and trace(P) <= n.
sdp::ConicProblem assemble_energy(const DataSet& data, double delta);

/// The same outer block less sum_i tau_i N_i diag(eps I, -1) N_i^T with
/// tau_i >= 0.
sdp::ConicProblem assemble_instantaneous(const DataSet& data, double delta);

/// N = [[I, X1], [0, -X0], [0, -U0], [0, 0]].
Matrix multiplier_frame(const DataSet& data);

SynthesisResult design(const DataSet& data, Approach approach, const SynthesisSettings& settings = {});

/// Decision vector of assemble_instantaneous at (P, Y, beta) with every
/// tau_i = alpha.
Vector transfer_point(const SynthesisResult& energy, const DataSet& data);

struct TransferReport {
  double residual = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

/// Re-checks the energy certificate inside the instantaneous program.
TransferReport certificate_transfer(const SynthesisResult& energy, const DataSet& data,
                                    double feas_tol = 1e-8);

struct GainValidation {
  Index samples_C = 0;
  double max_rho_C = 0.0;
  Index samples_I = 0;
  /// Rejection proposals, or walk steps for hit-and-run.
  Index proposals_I = 0;
  double max_rho_I = 0.0;
  /// True when samples_I reached the requested count.
  bool I_complete = false;
};

struct ValidationOptions {
  Index samples = 10000;
  ISampling sampling = ISampling::Rejection;
  /// Budget of proposals when sampling I by rejection.
  Index max_proposals = 1000000;
  /// Proposal for I; the center form of C when absent. Must contain I.
  std::optional<CenterFormEllipsoidd> proposal;
  HitAndRunOptions walk;
};

/// Spectral radius of A + B K over sampled members of C and of I.
GainValidation validate_gain(const Matrix& K, const ConsistencySets& cs, Rng& rng,
                             const ValidationOptions& options = {});

/// Largest eigenvalue of (A + B K) P (A + B K)^T - P.
double lyapunov_decrease(const Matrix& A, const Matrix& B, const Matrix& K, const Matrix& P);

nlohmann::json to_json(const SynthesisResult& result);
nlohmann::json to_json(const GainValidation& validation);

}  // namespace ddstab

#endif  // DDSTAB_SYNTHESIS_HPP
