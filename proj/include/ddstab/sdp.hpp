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
#ifndef DDSTAB_SDP_HPP
#define DDSTAB_SDP_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ddstab/common.hpp"

/// Small dense LMI feasibility and log-det maximization.
///
/// Problems are posed over a flat coordinate vector x. Every constraint is an
/// affine symmetric block F(x) = F0 + sum_k x_k F_k with a declared sense, plus
/// plain nonnegativity on selected scalar coordinates. The engine is a
/// log-barrier path-following method: a phase that maximizes the common margin
/// t with F_j(x) >= t I for all blocks (and x_k >= t for nonnegative
/// coordinates), followed for log-det objectives by a centering phase from the
/// strictly feasible point. Nonnegative coordinates are eliminated from the
/// Newton system in closed form, so problems with many multipliers and few
/// small blocks cost time linear in the multiplier count.
namespace ddstab::sdp {

enum class VariableKind { Scalar, Symmetric, Matrix };

/// A named slice of the coordinate vector. Symmetric variables use scaled
/// upper-triangular coordinates (off-diagonal entries carry sqrt(2)), so the
/// coordinate basis is orthonormal under the Frobenius product.
struct Variable {
  std::string name;
  VariableKind kind = VariableKind::Scalar;
  Index rows = 1;
  Index cols = 1;
  Index offset = 0;
  Index size = 1;
};

class DecisionLayout {
 public:
  Variable add_scalar(const std::string& name);
  Variable add_symmetric(const std::string& name, Index dim);
  Variable add_matrix(const std::string& name, Index rows, Index cols);

  const Variable& operator[](const std::string& name) const;
  bool contains(const std::string& name) const { return index_.count(name) > 0; }
  Index size() const { return size_; }
  const std::vector<Variable>& variables() const { return variables_; }

  /// Matrix multiplied by coordinate `local` of `v` (rows x cols).
  static Matrix basis(const Variable& v, Index local);
  Matrix value(const Vector& x, const std::string& name) const;
  double scalar(const Vector& x, const std::string& name) const;
  void assign(Vector& x, const std::string& name, const Matrix& value) const;

 private:
  Variable push(Variable v);

  std::vector<Variable> variables_;
  std::map<std::string, std::size_t> index_;
  Index size_ = 0;
};

enum class Sense { PositiveSemidefinite, NegativeSemidefinite };

/// F(x) = F0 + sum_k x_k F_k, required >= 0 or <= 0.
class LmiBlock {
 public:
  LmiBlock(std::string name, Index dim, Sense sense = Sense::PositiveSemidefinite);

  /// Adds `value` at block offset (row, col) and its transpose at (col, row).
  /// Diagonal placements (row == col) must be symmetric.
  LmiBlock& add_constant(const Matrix& value, Index row = 0, Index col = 0);
  /// Adds x_coordinate * coefficient at (row, col), mirrored as above.
  LmiBlock& add_term(Index coordinate, const Matrix& coefficient, Index row = 0, Index col = 0);
  /// Places scale * V (or scale * V^T) at (row, col), V being a layout variable.
  LmiBlock& add_variable(const DecisionLayout& layout, const std::string& name, Index row,
                         Index col, double scale = 1.0, bool transpose = false);
  /// Adds scale * v * I (dim x dim) at (row, row) for a scalar variable v.
  LmiBlock& add_scaled_identity(const DecisionLayout& layout, const std::string& scalar,
                                Index row, Index dim, double scale = 1.0);

  Matrix evaluate(const Vector& x) const;

  const std::string& name() const { return name_; }
  Index dim() const { return dim_; }
  Sense sense() const { return sense_; }
  const Matrix& constant() const { return constant_; }
  const std::map<Index, Matrix>& terms() const { return terms_; }

  /// Multiplies the constant and every coefficient by `factor`.
  void scale(double factor);

 private:
  void place(Matrix& target, const Matrix& value, Index row, Index col) const;

  std::string name_;
  Index dim_;
  Sense sense_;
  Matrix constant_;
  std::map<Index, Matrix> terms_;
};

struct ConicProblem {
  DecisionLayout layout;
  std::vector<LmiBlock> blocks;
  std::vector<Index> nonnegative;
  /// When set, log det of this (positive semidefinite sense) block is maximized.
  std::optional<LmiBlock> logdet_objective;
  /// Strictness margin already built into the blocks; recorded in reports.
  /// Infeasibility is declared when the optimal margin is below -feas_tol.
  double delta = 0.0;
  /// Optional starting point; zero when empty.
  Vector initial_point;

  void require_nonnegative(const std::string& scalar);
  /// Sets the objective to log det of a symmetric layout variable.
  void maximize_logdet(const std::string& symmetric);
  void validate() const;
  /// Sum of block dimensions plus the number of nonnegative coordinates.
  Index barrier_degree() const;
};

/// How the Newton system is solved. LeastSquares eliminates the nonnegative
/// coordinates and factors the rest by QR; NormalEquations factors the full
/// Hessian by Cholesky and serves as a reference.
enum class NewtonSolve { LeastSquares, NormalEquations };

struct SolverSettings {
  double feas_tol = 1e-8;
  /// The log-det phase stops once the duality-gap bound falls below gap_tol
  /// times max(1, |log det|).
  double gap_tol = 1e-6;
  /// Cap on Newton iterations across both phases.
  int max_iterations = 500;
  double barrier_growth = 10.0;
  NewtonSolve newton = NewtonSolve::LeastSquares;
};

enum class SolveStatus { Solved, Infeasible, NumericalFailure };

const char* to_string(SolveStatus status);

struct SolveReport {
  SolveStatus status = SolveStatus::NumericalFailure;
  Vector x;
  /// Best common margin reached in the margin phase (min eigenvalue over all
  /// blocks and nonnegative coordinates).
  double margin = 0.0;
  /// Most negative eigenvalue across blocks at x, from an independent
  /// eigenvalue computation.
  double worst_residual = 0.0;
  /// log det of the objective block at x (log-det problems only).
  double objective = 0.0;
  /// Final duality-gap bound.
  double gap = 0.0;
  int iterations = 0;
  double seconds = 0.0;
  double delta = 0.0;
  std::string message;
};

SolveReport solve_feasibility(const ConicProblem& problem, const SolverSettings& settings = {});

/// Maximizes log det of the objective block already set on `problem`.
SolveReport solve_maxdet(const ConicProblem& problem, const SolverSettings& settings = {});
/// Maximizes log det of the named symmetric variable.
SolveReport solve_maxdet(ConicProblem problem, const std::string& target,
                         const SolverSettings& settings = {});

/// Smallest eigenvalue over all constraint blocks (sense-adjusted) and
/// nonnegative coordinates at x.
double worst_residual(const ConicProblem& problem, const Vector& x);

/// Plain-text dump: a header line with the coordinate count, then for each
/// block its dimension, sense and dense F0, F_k rows.
std::string dump(const ConicProblem& problem);

}  // namespace ddstab::sdp

#endif  // DDSTAB_SDP_HPP
