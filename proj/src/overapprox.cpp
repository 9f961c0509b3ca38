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
#include "ddstab/overapprox.hpp"

#include <cmath>
#include <stdexcept>

namespace ddstab {

double default_overapprox_delta(const ConsistencySets& cs) {
  return 1e-8 * std::max(1.0, cs.aggregate().A.trace() / double(cs.data().T()));
}

Matrix OverapproxResult::Cbar() const {
  return linalg::symmetrized(Bbar.transpose() * Abar.llt().solve(Bbar)) -
         Matrix::Identity(n(), n());
}

QuadraticFormEllipsoidd OverapproxResult::ellipsoid() const {
  return make_quadratic_form(Abar, Bbar, Cbar());
}

sdp::ConicProblem assemble_overapprox(const ConsistencySets& cs, double delta) {
  const Index n = cs.n();
  const Index p = n + cs.m();
  const Index dim = n + 2 * p;
  sdp::ConicProblem problem;
  problem.delta = delta;
  problem.layout.add_symmetric("Abar", p);
  problem.layout.add_matrix("Bbar", p, n);

  sdp::LmiBlock block("containment", dim, sdp::Sense::NegativeSemidefinite);
  block.add_constant(-Matrix::Identity(n, n), 0, 0);
  block.add_variable(problem.layout, "Bbar", n, 0);
  block.add_variable(problem.layout, "Bbar", n + p, 0);
  block.add_variable(problem.layout, "Abar", n, n);
  block.add_variable(problem.layout, "Abar", n + p, n + p, -1.0);
  for (const SampleQuadric& q : cs.samples()) {
    const sdp::Variable tau = problem.layout.add_scalar("tau" + std::to_string(q.index));
    problem.require_nonnegative(tau.name);
    Matrix coef = Matrix::Zero(dim, dim);
    coef.topLeftCorner(n, n) = -q.C;
    coef.block(n, 0, p, n) = -q.B;
    coef.block(0, n, n, p) = -q.B.transpose();
    coef.block(n, n, p, p) = -q.A;
    block.add_term(tau.offset, linalg::symmetrized(coef));
  }
  problem.blocks.push_back(std::move(block));

  sdp::LmiBlock floor("Abar>=delta", p);
  floor.add_constant(-delta * Matrix::Identity(p, p));
  floor.add_variable(problem.layout, "Abar", 0, 0);
  problem.blocks.push_back(std::move(floor));

  problem.maximize_logdet("Abar");
  return problem;
}

OverapproxResult compute_overapprox(const ConsistencySets& cs, const OverapproxSettings& settings) {
  if (!cs.is_bounded()) {
    throw InfeasibleContainment("the energy set is unbounded, so no bounded over-approximation exists");
  }
  const double delta = settings.delta.value_or(default_overapprox_delta(cs));
  const sdp::ConicProblem problem = assemble_overapprox(cs, delta);
  const sdp::SolveReport report = sdp::solve_maxdet(problem, settings.solver);
  if (report.status == sdp::SolveStatus::Infeasible) {
    throw InfeasibleContainment("containment program is infeasible: " + report.message);
  }

  OverapproxResult r;
  r.status = report.status;
  r.Abar = problem.layout.value(report.x, "Abar");
  r.Bbar = problem.layout.value(report.x, "Bbar");
  r.tau = report.x.tail(cs.data().T());
  r.logdet = report.objective;
  r.size = std::exp(-0.5 * double(cs.n()) * r.logdet);
  r.delta = delta;
  r.worst_residual = report.worst_residual;
  r.gap = report.gap;
  r.iterations = report.iterations;
  r.seconds = report.seconds;
  r.message = report.message;
  return r;
}

ContainmentReport containment_check(const OverapproxResult& r, const ConsistencySets& cs,
                                    Index candidates, Rng& rng, const ContainmentOptions& options) {
  ContainmentReport out;
  out.min_slack = std::numeric_limits<double>::infinity();
  if (candidates <= 0) return out;
  const QuadraticFormEllipsoidd bar = r.ellipsoid();
  const auto record = [&](const Matrix& Z) {
    ++out.candidates;
    if (cs.member_I(Z) < 0.0) return;
    ++out.in_I;
    const double slack = membership(bar, Z);
    out.min_slack = std::min(out.min_slack, slack);
    if (slack < -options.slack_tol) ++out.violations;
  };
  if (options.sampling == ISampling::HitAndRun) {
    const std::optional<Matrix> start = interior_point_I(cs);
    if (!start) return out;
    IntersectionWalk walk(cs, *start, rng, options.walk);
    for (Index k = 0; k < candidates; ++k) record(walk.next(rng));
    return out;
  }
  const CenterFormEllipsoidd source =
      options.proposal ? *options.proposal : quadratic_to_center(cs.energy_set());
  for (Index k = 0; k < candidates; ++k) record(sample_member(source, rng));
  return out;
}

double size_ratio(const ConsistencySets& cs, const OverapproxResult& r) {
  if (!r.solved()) throw std::invalid_argument("size_ratio needs a solved over-approximation");
  return std::exp(log_size(cs.energy_set()) + 0.5 * double(cs.n()) * r.logdet);
}

std::vector<Eigen::Vector2d> overapprox_boundary(const OverapproxResult& r, int points) {
  if (r.Abar.rows() != 2 || r.n() != 1) throw ShapeMismatch("boundary export needs n = m = 1");
  return ellipse_boundary(quadratic_to_center(r.ellipsoid()), points);
}

nlohmann::json to_json(const OverapproxResult& r) {
  const auto matrix_json = [](const Matrix& M) {
    nlohmann::json rows = nlohmann::json::array();
    for (Index i = 0; i < M.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
      rows.push_back(row);
    }
    return rows;
  };
  nlohmann::json j;
  j["status"] = sdp::to_string(r.status);
  j["Abar"] = matrix_json(r.Abar);
  j["Bbar"] = matrix_json(r.Bbar);
  j["Cbar"] = r.solved() ? matrix_json(r.Cbar()) : nlohmann::json(nullptr);
  j["tau"] = std::vector<double>(r.tau.data(), r.tau.data() + r.tau.size());
  j["logdet_Abar"] = r.logdet;
  j["size"] = r.size;
  j["delta"] = r.delta;
  j["worst_residual"] = r.worst_residual;
  j["gap"] = r.gap;
  j["iterations"] = r.iterations;
  j["seconds"] = r.seconds;
  j["message"] = r.message;
  return j;
}

}  // namespace ddstab
