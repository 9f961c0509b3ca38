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
#include "ddstab/synthesis.hpp"

#include <stdexcept>

namespace ddstab {

namespace {

std::string tau_name(Index i) { return "tau" + std::to_string(i); }

// Outer block shared by both programs; rows are grouped (n, n, m, n).
sdp::ConicProblem outer_problem(const DataSet& data, double delta) {
  const Index n = data.n();
  const Index m = data.m();
  sdp::ConicProblem problem;
  problem.delta = delta;
  problem.layout.add_symmetric("P", n);
  problem.layout.add_matrix("Y", m, n);
  problem.layout.add_scalar("beta");

  sdp::LmiBlock main("decrease", 3 * n + m);
  main.add_variable(problem.layout, "P", 0, 0);
  main.add_scaled_identity(problem.layout, "beta", 0, n, -1.0);
  main.add_variable(problem.layout, "P", n, n, -1.0);
  main.add_variable(problem.layout, "Y", n, 2 * n, -1.0, true);
  main.add_variable(problem.layout, "Y", 2 * n, 2 * n + m);
  main.add_variable(problem.layout, "P", 2 * n + m, 2 * n + m);
  problem.blocks.push_back(std::move(main));

  sdp::LmiBlock beta_floor("beta>=delta", 1);
  beta_floor.add_constant(-delta * Matrix::Identity(1, 1));
  beta_floor.add_scaled_identity(problem.layout, "beta", 0, 1);
  problem.blocks.push_back(std::move(beta_floor));

  sdp::LmiBlock p_floor("P>=delta", n);
  p_floor.add_constant(-delta * Matrix::Identity(n, n));
  p_floor.add_variable(problem.layout, "P", 0, 0);
  problem.blocks.push_back(std::move(p_floor));

  // The programs are homogeneous in (P, Y, beta, multipliers); fixing the
  // scale keeps the margin comparable to delta.
  sdp::LmiBlock trace_cap("trace(P)<=n", 1);
  trace_cap.add_constant(double(n) * Matrix::Identity(1, 1));
  const sdp::Variable& p = problem.layout["P"];
  for (Index k = 0; k < p.size; ++k) {
    const double tr = sdp::DecisionLayout::basis(p, k).trace();
    if (tr != 0.0) trace_cap.add_term(p.offset + k, -tr * Matrix::Identity(1, 1));
  }
  problem.blocks.push_back(std::move(trace_cap));
  return problem;
}

void set_initial_point(sdp::ConicProblem& problem, Index n) {
  problem.initial_point = Vector::Zero(problem.layout.size());
  problem.layout.assign(problem.initial_point, "P", 0.5 * Matrix::Identity(n, n));
}

}  // namespace

const char* to_string(Approach approach) {
  return approach == Approach::Energy ? "energy" : "instantaneous";
}

Approach approach_from_string(const std::string& text) {
  if (text == "energy") return Approach::Energy;
  if (text == "instantaneous") return Approach::Instantaneous;
  throw std::invalid_argument("unknown approach '" + text + "'");
}

double default_synthesis_delta(const DataSet& data) {
  return 1e-6 * std::max(1.0, linalg::operator_norm(data.X1));
}

Matrix multiplier_frame(const DataSet& data) {
  const Index n = data.n();
  const Index m = data.m();
  const Index T = data.T();
  Matrix N = Matrix::Zero(3 * n + m, n + T);
  N.topLeftCorner(n, n).setIdentity();
  N.block(0, n, n, T) = data.X1;
  N.block(n, n, n, T) = -data.X0;
  N.block(2 * n, n, m, T) = -data.U0;
  return N;
}

sdp::ConicProblem assemble_energy(const DataSet& data, double delta) {
  data.validate();
  sdp::ConicProblem problem = outer_problem(data, delta);
  const Index n = data.n();
  const Index T = data.T();
  const sdp::Variable alpha = problem.layout.add_scalar("alpha");
  problem.require_nonnegative("alpha");

  const Matrix N = multiplier_frame(data);
  Vector weights(n + T);
  weights.head(n).setConstant(data.energy_bound());
  weights.tail(T).setConstant(-1.0);
  const Matrix term = N * weights.asDiagonal() * N.transpose();
  problem.blocks[0].add_term(alpha.offset, -linalg::symmetrized(term));
  set_initial_point(problem, n);
  return problem;
}

sdp::ConicProblem assemble_instantaneous(const DataSet& data, double delta) {
  data.validate();
  sdp::ConicProblem problem = outer_problem(data, delta);
  const Index n = data.n();
  const Index m = data.m();
  const Index dim = 3 * n + m;
  for (Index i = 0; i < data.T(); ++i) {
    const sdp::Variable tau = problem.layout.add_scalar(tau_name(i));
    problem.require_nonnegative(tau.name);
    Vector column = Vector::Zero(dim);
    column.head(n) = data.X1.col(i);
    column.segment(n, n) = -data.X0.col(i);
    column.segment(2 * n, m) = -data.U0.col(i);
    Matrix term = -column * column.transpose();
    term.topLeftCorner(n, n).diagonal().array() += data.epsilon;
    problem.blocks[0].add_term(tau.offset, -term);
  }
  set_initial_point(problem, n);
  return problem;
}

SynthesisResult design(const DataSet& data, Approach approach, const SynthesisSettings& settings) {
  const double delta = settings.delta.value_or(default_synthesis_delta(data));
  const sdp::ConicProblem problem = approach == Approach::Energy
                                        ? assemble_energy(data, delta)
                                        : assemble_instantaneous(data, delta);
  const sdp::SolveReport report = sdp::solve_feasibility(problem, settings.solver);

  SynthesisResult result;
  result.approach = approach;
  result.status = report.status;
  result.delta = delta;
  result.margin = report.margin;
  result.worst_residual = report.worst_residual;
  result.iterations = report.iterations;
  result.seconds = report.seconds;
  result.message = report.message;
  result.P = problem.layout.value(report.x, "P");
  result.Y = problem.layout.value(report.x, "Y");
  result.beta = problem.layout.scalar(report.x, "beta");
  if (approach == Approach::Energy) {
    result.multipliers = Vector::Constant(1, problem.layout.scalar(report.x, "alpha"));
  } else {
    result.multipliers = report.x.segment(problem.layout[tau_name(0)].offset, data.T());
  }
  if (result.solved()) {
    result.K = linalg::symmetrized(result.P).llt().solve(result.Y.transpose()).transpose();
  }
  return result;
}

Vector transfer_point(const SynthesisResult& energy, const DataSet& data) {
  if (energy.approach != Approach::Energy || energy.multipliers.size() != 1) {
    throw std::invalid_argument("transfer needs an energy design");
  }
  const sdp::ConicProblem target = assemble_instantaneous(data, energy.delta);
  Vector x = Vector::Zero(target.layout.size());
  target.layout.assign(x, "P", linalg::symmetrized(energy.P));
  target.layout.assign(x, "Y", energy.Y);
  target.layout.assign(x, "beta", Matrix::Constant(1, 1, energy.beta));
  x.segment(target.layout[tau_name(0)].offset, data.T()).setConstant(energy.multipliers(0));
  return x;
}

TransferReport certificate_transfer(const SynthesisResult& energy, const DataSet& data,
                                    double feas_tol) {
  if (!energy.solved()) throw std::invalid_argument("certificate transfer needs a solved design");
  const sdp::ConicProblem target = assemble_instantaneous(data, energy.delta);
  TransferReport report;
  report.residual = sdp::worst_residual(target, transfer_point(energy, data));
  report.tolerance = 10.0 * feas_tol;
  report.passed = report.residual >= -report.tolerance;
  return report;
}

GainValidation validate_gain(const Matrix& K, const ConsistencySets& cs, Rng& rng,
                             const ValidationOptions& options) {
  if (!cs.is_bounded()) throw UnboundedSet("validate_gain: the energy set is unbounded");
  const Index n = cs.n();
  if (K.rows() != cs.m() || K.cols() != n) throw ShapeMismatch("validate_gain: K has the wrong shape");
  const auto closed_loop_rho = [&](const Matrix& Z) {
    const auto [A, B] = split_dynamics(Z, n);
    return linalg::spectral_radius(A + B * K);
  };

  GainValidation out;
  const CenterFormEllipsoidd C = quadratic_to_center(cs.energy_set());
  for (Index i = 0; i < options.samples; ++i) {
    out.max_rho_C = std::max(out.max_rho_C, closed_loop_rho(sample_member(C, rng)));
  }
  out.samples_C = options.samples;

  if (options.sampling == ISampling::HitAndRun) {
    const std::optional<Matrix> start = interior_point_I(cs);
    if (start) {
      IntersectionWalk walk(cs, *start, rng, options.walk);
      for (Index i = 0; i < options.samples; ++i) {
        const Matrix& Z = walk.next(rng);
        if (cs.member_I(Z) < 0.0) continue;  // chord endpoint hit in roundoff
        ++out.samples_I;
        out.max_rho_I = std::max(out.max_rho_I, closed_loop_rho(Z));
      }
      out.proposals_I = walk.steps();
    }
    out.I_complete = out.samples_I >= options.samples;
    return out;
  }

  const CenterFormEllipsoidd& proposal = options.proposal ? *options.proposal : C;
  while (out.samples_I < options.samples && out.proposals_I < options.max_proposals) {
    const Matrix Z = sample_member(proposal, rng);
    ++out.proposals_I;
    if (cs.member_I(Z) < 0.0) continue;
    ++out.samples_I;
    out.max_rho_I = std::max(out.max_rho_I, closed_loop_rho(Z));
  }
  out.I_complete = out.samples_I >= options.samples;
  return out;
}

double lyapunov_decrease(const Matrix& A, const Matrix& B, const Matrix& K, const Matrix& P) {
  const Matrix Acl = A + B * K;
  return linalg::max_eigenvalue(linalg::symmetrized(Acl * P * Acl.transpose() - P));
}

namespace {

nlohmann::json matrix_json(const Matrix& M) {
  nlohmann::json rows = nlohmann::json::array();
  for (Index i = 0; i < M.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

nlohmann::json to_json(const SynthesisResult& r) {
  nlohmann::json j;
  j["approach"] = to_string(r.approach);
  j["status"] = sdp::to_string(r.status);
  j["K"] = r.solved() ? matrix_json(r.K) : nlohmann::json(nullptr);
  j["P"] = matrix_json(r.P);
  j["beta"] = r.beta;
  j["multiplier_count"] = r.multipliers.size();
  j["multiplier_max"] = r.multipliers.size() ? r.multipliers.maxCoeff() : 0.0;
  j["delta"] = r.delta;
  j["margin"] = r.margin;
  j["worst_residual"] = r.worst_residual;
  j["iterations"] = r.iterations;
  j["seconds"] = r.seconds;
  j["message"] = r.message;
  return j;
}

nlohmann::json to_json(const GainValidation& v) {
  return {{"samples_C", v.samples_C},   {"max_rho_C", v.max_rho_C},
          {"samples_I", v.samples_I},   {"proposals_I", v.proposals_I},
          {"max_rho_I", v.max_rho_I},   {"I_complete", v.I_complete}};
}

}  // namespace ddstab
