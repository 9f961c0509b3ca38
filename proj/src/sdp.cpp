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
#include "ddstab/sdp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace ddstab::sdp {

// ---------------------------------------------------------------------------
// Layout

Variable DecisionLayout::push(Variable v) {
  if (v.name.empty() || contains(v.name)) {
    throw std::invalid_argument("variable name is empty or already used: '" + v.name + "'");
  }
  v.offset = size_;
  size_ += v.size;
  index_[v.name] = variables_.size();
  variables_.push_back(v);
  return v;
}

Variable DecisionLayout::add_scalar(const std::string& name) {
  return push({name, VariableKind::Scalar, 1, 1, 0, 1});
}

Variable DecisionLayout::add_symmetric(const std::string& name, Index dim) {
  if (dim < 1) throw std::invalid_argument("symmetric variable needs dim >= 1");
  return push({name, VariableKind::Symmetric, dim, dim, 0, dim * (dim + 1) / 2});
}

Variable DecisionLayout::add_matrix(const std::string& name, Index rows, Index cols) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("matrix variable needs positive dims");
  return push({name, VariableKind::Matrix, rows, cols, 0, rows * cols});
}

const Variable& DecisionLayout::operator[](const std::string& name) const {
  const auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("unknown variable '" + name + "'");
  return variables_[it->second];
}

namespace {

// Upper-triangular, column-major enumeration of a symmetric variable.
std::pair<Index, Index> symmetric_entry(Index local) {
  Index j = 0;
  while (local > j) {
    local -= j + 1;
    ++j;
  }
  return {local, j};
}

}  // namespace

Matrix DecisionLayout::basis(const Variable& v, Index local) {
  Matrix E = Matrix::Zero(v.rows, v.cols);
  switch (v.kind) {
    case VariableKind::Scalar:
      E(0, 0) = 1.0;
      break;
    case VariableKind::Matrix:
      E(local % v.rows, local / v.rows) = 1.0;
      break;
    case VariableKind::Symmetric: {
      const auto [i, j] = symmetric_entry(local);
      if (i == j) {
        E(i, i) = 1.0;
      } else {
        E(i, j) = E(j, i) = 1.0 / std::numbers::sqrt2;
      }
      break;
    }
  }
  return E;
}

Matrix DecisionLayout::value(const Vector& x, const std::string& name) const {
  const Variable& v = (*this)[name];
  if (x.size() < v.offset + v.size) throw std::out_of_range("coordinate vector is too short");
  Matrix M = Matrix::Zero(v.rows, v.cols);
  for (Index k = 0; k < v.size; ++k) M += x(v.offset + k) * basis(v, k);
  return M;
}

double DecisionLayout::scalar(const Vector& x, const std::string& name) const {
  const Variable& v = (*this)[name];
  if (v.kind != VariableKind::Scalar) throw std::invalid_argument("'" + name + "' is not a scalar");
  return x(v.offset);
}

void DecisionLayout::assign(Vector& x, const std::string& name, const Matrix& value) const {
  const Variable& v = (*this)[name];
  if (value.rows() != v.rows || value.cols() != v.cols) throw ShapeMismatch("assign: wrong shape");
  if (x.size() != size_) x = Vector::Zero(size_);
  // The basis is orthonormal, so coordinates are Frobenius projections.
  for (Index k = 0; k < v.size; ++k) {
    x(v.offset + k) = (basis(v, k).array() * value.array()).sum();
  }
}

// ---------------------------------------------------------------------------
// Blocks and problems

LmiBlock::LmiBlock(std::string name, Index dim, Sense sense)
    : name_(std::move(name)), dim_(dim), sense_(sense), constant_(Matrix::Zero(dim, dim)) {
  if (dim < 1) throw std::invalid_argument("LMI block needs dim >= 1");
}

void LmiBlock::place(Matrix& target, const Matrix& value, Index row, Index col) const {
  const Index r = value.rows();
  const Index c = value.cols();
  if (row < 0 || col < 0 || row + r > dim_ || col + c > dim_) {
    throw ShapeMismatch("block '" + name_ + "': placement out of range");
  }
  if (row == col) {
    if (r != c || linalg::asymmetry(value) > 1e-12) {
      throw std::invalid_argument("block '" + name_ + "': diagonal placement must be symmetric");
    }
    target.block(row, row, r, r) += linalg::symmetrized(value);
    return;
  }
  if (row < col + c && col < row + r) {
    throw std::invalid_argument("block '" + name_ + "': off-diagonal placement overlaps its mirror");
  }
  target.block(row, col, r, c) += value;
  target.block(col, row, c, r) += value.transpose();
}

LmiBlock& LmiBlock::add_constant(const Matrix& value, Index row, Index col) {
  place(constant_, value, row, col);
  return *this;
}

LmiBlock& LmiBlock::add_term(Index coordinate, const Matrix& coefficient, Index row, Index col) {
  if (coordinate < 0) throw std::out_of_range("negative coordinate");
  auto [it, inserted] = terms_.try_emplace(coordinate, Matrix::Zero(dim_, dim_));
  place(it->second, coefficient, row, col);
  return *this;
}

LmiBlock& LmiBlock::add_variable(const DecisionLayout& layout, const std::string& name, Index row,
                                 Index col, double scale, bool transpose) {
  const Variable& v = layout[name];
  for (Index k = 0; k < v.size; ++k) {
    Matrix E = DecisionLayout::basis(v, k);
    if (transpose) E.transposeInPlace();
    add_term(v.offset + k, scale * E, row, col);
  }
  return *this;
}

LmiBlock& LmiBlock::add_scaled_identity(const DecisionLayout& layout, const std::string& scalar,
                                        Index row, Index dim, double scale) {
  const Variable& v = layout[scalar];
  if (v.kind != VariableKind::Scalar) throw std::invalid_argument("'" + scalar + "' is not a scalar");
  return add_term(v.offset, scale * Matrix::Identity(dim, dim), row, row);
}

Matrix LmiBlock::evaluate(const Vector& x) const {
  Matrix F = constant_;
  for (const auto& [k, Fk] : terms_) {
    if (k >= x.size()) throw std::out_of_range("block '" + name_ + "': coordinate out of range");
    F += x(k) * Fk;
  }
  return F;
}

void LmiBlock::scale(double factor) {
  constant_ *= factor;
  for (auto& [k, Fk] : terms_) Fk *= factor;
}

void ConicProblem::require_nonnegative(const std::string& scalar) {
  const Variable& v = layout[scalar];
  if (v.kind != VariableKind::Scalar) throw std::invalid_argument("'" + scalar + "' is not a scalar");
  nonnegative.push_back(v.offset);
}

void ConicProblem::maximize_logdet(const std::string& symmetric) {
  const Variable& v = layout[symmetric];
  if (v.kind != VariableKind::Symmetric) {
    throw std::invalid_argument("log-det target '" + symmetric + "' is not symmetric");
  }
  LmiBlock objective("logdet(" + symmetric + ")", v.rows);
  objective.add_variable(layout, symmetric, 0, 0);
  logdet_objective = std::move(objective);
}

void ConicProblem::validate() const {
  const auto check_block = [&](const LmiBlock& b) {
    for (const auto& [k, Fk] : b.terms()) {
      if (k >= layout.size()) {
        throw std::out_of_range("block '" + b.name() + "' references a missing coordinate");
      }
    }
  };
  for (const auto& b : blocks) check_block(b);
  if (logdet_objective) {
    check_block(*logdet_objective);
    if (logdet_objective->sense() != Sense::PositiveSemidefinite) {
      throw std::invalid_argument("log-det objective block must have PSD sense");
    }
  }
  for (Index k : nonnegative) {
    if (k < 0 || k >= layout.size()) throw std::out_of_range("nonnegative coordinate out of range");
  }
  if (initial_point.size() != 0 && initial_point.size() != layout.size()) {
    throw ShapeMismatch("initial point has the wrong length");
  }
}

namespace {

std::vector<Index> unique_sorted(std::vector<Index> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

Index ConicProblem::barrier_degree() const {
  Index degree = Index(unique_sorted(nonnegative).size());
  for (const auto& b : blocks) degree += b.dim();
  return degree;
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Solved:
      return "solved";
    case SolveStatus::Infeasible:
      return "infeasible";
    case SolveStatus::NumericalFailure:
      return "numerical-failure";
  }
  return "unknown";
}

double worst_residual(const ConicProblem& problem, const Vector& x) {
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& b : problem.blocks) {
    const Matrix F = b.evaluate(x);
    const double lo = b.sense() == Sense::PositiveSemidefinite ? linalg::min_eigenvalue(F)
                                                               : -linalg::max_eigenvalue(F);
    worst = std::min(worst, lo);
  }
  for (Index k : problem.nonnegative) worst = std::min(worst, x(k));
  return worst;
}

// ---------------------------------------------------------------------------
// Barrier engine

namespace {

// Sense-normalized block: F(z) = F0 + sum_j z[coords[j]] coefs[j] >= 0.
struct NormalBlock {
  Index dim = 0;
  Matrix F0;
  std::vector<Index> coords;
  std::vector<Matrix> coefs;
  Index svec_offset = 0;

  Index svec_dim() const { return dim * (dim + 1) / 2; }

  Matrix assemble(const Vector& z) const {
    Matrix F = F0;
    for (std::size_t j = 0; j < coords.size(); ++j) {
      const double v = z(coords[j]);
      if (v != 0.0) F.noalias() += v * coefs[j];
    }
    return F;
  }
};

NormalBlock normalize(const LmiBlock& b, Index margin_coord) {
  const double sign = b.sense() == Sense::PositiveSemidefinite ? 1.0 : -1.0;
  NormalBlock out;
  out.dim = b.dim();
  out.F0 = sign * b.constant();
  for (const auto& [k, Fk] : b.terms()) {
    out.coords.push_back(k);
    out.coefs.push_back(sign * Fk);
  }
  if (margin_coord >= 0) {
    out.coords.push_back(margin_coord);
    out.coefs.push_back(-Matrix::Identity(b.dim(), b.dim()));
  }
  return out;
}

void svec_into(const Matrix& G, double scale, Eigen::Ref<Vector> out) {
  Index r = 0;
  for (Index j = 0; j < G.cols(); ++j) {
    for (Index i = 0; i <= j; ++i) {
      out(r++) += scale * (i == j ? G(i, i) : std::numbers::sqrt2 * G(i, j));
    }
  }
}

double logdet_or_nan(const Matrix& F) {
  Eigen::LLT<Matrix> llt(F);
  if (llt.info() != Eigen::Success) return std::numeric_limits<double>::quiet_NaN();
  const auto& L = llt.matrixLLT();
  double s = 0.0;
  for (Index i = 0; i < L.rows(); ++i) {
    if (!(L(i, i) > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    s += std::log(L(i, i));
  }
  return 2.0 * s;
}

struct Derivatives {
  Vector grad;
  Matrix V;     // svec rows x coordinates; H = V^T V + E
  Vector diag;  // E(k, k) for nonnegative coordinates (aligned with Barrier::nonneg)
  // Least-squares form of the gradient: grad = V^T c - (1 / z_S) + extra, the
  // middle term on the nonnegative coordinates and extra on the margin only.
  Vector c;
  Vector z_s;
  Vector extra;
  std::vector<Matrix> L_inv;  // inverse Cholesky factor per block, objective last
  bool ok = true;
};

// f(z + a dz) - f(z) as an exact function of the step a:
//   linear * a - sum_b w_b sum_i log1p(a mu_bi) - sum_k log1p(a r_k),
// where mu_b are the eigenvalues of L_b^-1 dF_b L_b^-T. Evaluating increments
// this way avoids the cancellation in f itself, which grows like s.
struct LineProfile {
  double linear = 0.0;
  std::vector<std::pair<double, Vector>> blocks;  // (weight, mu)
  Vector ratios;                                  // dz_k / z_k for nonnegative k
  double max_step = std::numeric_limits<double>::infinity();

  double increment(double a) const {
    double f = linear * a;
    for (const auto& [w, mu] : blocks) {
      double sum = 0.0;
      for (Index i = 0; i < mu.size(); ++i) sum += std::log1p(a * mu(i));
      f -= w * sum;
    }
    for (Index k = 0; k < ratios.size(); ++k) f -= std::log1p(a * ratios(k));
    return f;
  }
};

class Barrier {
 public:
  Barrier(const ConicProblem& problem, bool margin_phase, NewtonSolve mode)
      : mode_(mode),
        n_(problem.layout.size() + (margin_phase ? 1 : 0)),
        t_(margin_phase ? problem.layout.size() : -1),
        nonneg_(unique_sorted(problem.nonnegative)) {
    for (const auto& b : problem.blocks) blocks_.push_back(normalize(b, t_));
    if (problem.logdet_objective) {
      if (margin_phase) {
        blocks_.push_back(normalize(*problem.logdet_objective, t_));
      } else {
        objective_ = normalize(*problem.logdet_objective, -1);
      }
    }
    if (margin_phase) shift_margin();
    degree_ = Index(nonneg_.size());
    for (auto& b : blocks_) {
      b.svec_offset = svec_rows_;
      svec_rows_ += b.svec_dim();
      degree_ += b.dim;
    }
    if (objective_) {
      objective_->svec_offset = svec_rows_;
      svec_rows_ += objective_->svec_dim();
    }
    std::vector<char> in_s(std::size_t(n_), 0);
    for (Index k : nonneg_) in_s[std::size_t(k)] = 1;
    for (Index k = 0; k < n_; ++k) {
      if (!in_s[std::size_t(k)]) dense_.push_back(k);
    }
  }

  Index size() const { return n_; }

  /// Internal point for layout point x and margin t.
  Vector to_internal(const Vector& x, double t) const {
    Vector z(n_);
    z.head(x.size()) = x;
    if (t_ >= 0) {
      for (Index k : nonneg_) z(k) -= t;
      z(t_) = t;
    }
    return z;
  }

  /// Layout point for internal point z.
  Vector to_layout(const Vector& z) const {
    if (t_ < 0) return z;
    Vector x = z.head(t_);
    for (Index k : nonneg_) x(k) += z(t_);
    return x;
  }

  Index margin_index() const { return t_; }
  Index degree() const { return degree_; }

  Derivatives derivatives(const Vector& z, double s) const {
    Derivatives d;
    d.grad = Vector::Zero(n_);
    d.V = Matrix::Zero(svec_rows_, n_);
    d.diag = Vector::Zero(Index(nonneg_.size()));
    d.c = Vector::Zero(svec_rows_);
    d.z_s = z(nonneg_);
    d.extra = Vector::Zero(n_);
    if (t_ >= 0) {
      d.grad(t_) -= s;
      d.extra(t_) = -s;
    }
    for (const auto& b : blocks_) accumulate_block(b, z, 1.0, d);
    if (objective_) accumulate_block(*objective_, z, s, d);
    for (std::size_t j = 0; j < nonneg_.size(); ++j) {
      const Index k = nonneg_[j];
      if (!(z(k) > 0.0)) d.ok = false;
      d.grad(k) -= 1.0 / z(k);
      d.diag(Index(j)) = 1.0 / (z(k) * z(k));
    }
    return d;
  }

  LineProfile profile(const Derivatives& d, const Vector& z, const Vector& dz, double s) const {
    LineProfile p;
    if (t_ >= 0) p.linear = -s * dz(t_);
    const auto add_block = [&](const NormalBlock& b, const Matrix& L_inv, double weight) {
      Matrix dF = Matrix::Zero(b.dim, b.dim);
      for (std::size_t j = 0; j < b.coords.size(); ++j) {
        const double v = dz(b.coords[j]);
        if (v != 0.0) dF.noalias() += v * b.coefs[j];
      }
      const Matrix M = linalg::symmetrized(L_inv * dF * L_inv.transpose());
      Vector mu = Eigen::SelfAdjointEigenSolver<Matrix>(M, Eigen::EigenvaluesOnly).eigenvalues();
      if (mu.minCoeff() < 0.0) p.max_step = std::min(p.max_step, -1.0 / mu.minCoeff());
      p.blocks.emplace_back(weight, std::move(mu));
    };
    for (std::size_t b = 0; b < blocks_.size(); ++b) add_block(blocks_[b], d.L_inv[b], 1.0);
    if (objective_) add_block(*objective_, d.L_inv.back(), s);
    p.ratios.resize(Index(nonneg_.size()));
    for (std::size_t j = 0; j < nonneg_.size(); ++j) {
      const double r = dz(nonneg_[j]) / z(nonneg_[j]);
      p.ratios(Index(j)) = r;
      if (r < 0.0) p.max_step = std::min(p.max_step, -1.0 / r);
    }
    return p;
  }

  /// H * v for H = V^T V + E.
  Vector hessian_times(const Derivatives& d, const Vector& v) const {
    Vector out = d.V.transpose() * (d.V * v);
    for (std::size_t j = 0; j < nonneg_.size(); ++j) {
      out(nonneg_[j]) += d.diag(Index(j)) * v(nonneg_[j]);
    }
    return out;
  }

  /// Newton direction -H^-1 grad.
  Vector newton_direction(const Derivatives& d) const {
    if (mode_ == NewtonSolve::LeastSquares) {
      // Accept the eliminated solve only when it is self-consistent:
      // -grad^T dz and dz^T H dz agree for an exact Newton step.
      const std::optional<Vector> dz = least_squares_direction(d);
      if (dz) {
        const double by_gradient = -d.grad.dot(*dz);
        const double by_hessian = dz->dot(hessian_times(d, *dz));
        if (std::abs(by_gradient - by_hessian) <= 1e-4 * std::abs(by_hessian) + 1e-14) return *dz;
      }
    }
    {
      const Vector rhs = -d.grad;
      Vector step = cholesky_solve(full_hessian(d), rhs);
      step += cholesky_solve(full_hessian(d), rhs - hessian_times(d, step));
      return step;
    }
  }

 private:
  // In the margin phase nonnegative coordinates are replaced by their slacks
  // x_k - t, so the margin picks up their block coefficients and the
  // nonnegativity barrier stays diagonal.
  void shift_margin() {
    for (auto& b : blocks_) {
      Matrix shift = Matrix::Zero(b.dim, b.dim);
      bool touched = false;
      for (std::size_t j = 0; j < b.coords.size(); ++j) {
        if (std::binary_search(nonneg_.begin(), nonneg_.end(), b.coords[j])) {
          shift += b.coefs[j];
          touched = true;
        }
      }
      if (touched) b.coefs.back() += shift;  // the margin term is appended last
    }
  }

  void accumulate_block(const NormalBlock& b, const Vector& z, double weight, Derivatives& d) const {
    const Matrix F = b.assemble(z);
    Eigen::LLT<Matrix> llt(F);
    if (llt.info() != Eigen::Success) d.ok = false;
    d.L_inv.push_back(llt.matrixL().solve(Matrix::Identity(b.dim, b.dim)));
    const Matrix& L_inv = d.L_inv.back();
    const double root_w = std::sqrt(weight);
    svec_into(Matrix::Identity(b.dim, b.dim), -root_w, d.c.segment(b.svec_offset, b.svec_dim()));
    Matrix G(b.dim, b.dim);
    for (std::size_t j = 0; j < b.coords.size(); ++j) {
      const Index k = b.coords[j];
      G.noalias() = L_inv * b.coefs[j] * L_inv.transpose();
      d.grad(k) -= weight * G.trace();
      svec_into(G, root_w, d.V.col(k).segment(b.svec_offset, b.svec_dim()));
    }
  }

  Matrix full_hessian(const Derivatives& d) const {
    Matrix H = d.V.transpose() * d.V;
    for (std::size_t j = 0; j < nonneg_.size(); ++j) {
      H(nonneg_[j], nonneg_[j]) += d.diag(Index(j));
    }
    return H;
  }

  static Vector cholesky_solve(Matrix H, const Vector& rhs) {
    Eigen::LLT<Matrix> llt(H);
    if (llt.info() == Eigen::Success) return llt.solve(rhs);
    const double bump = 1e-12 * std::max(1.0, H.diagonal().cwiseAbs().maxCoeff());
    H.diagonal().array() += bump;
    Eigen::LDLT<Matrix> ldlt(H);
    return ldlt.solve(rhs);
  }

  // H = A^T A with A = [[V_S, V_Z], [D^1/2, 0]] and the gradient is A^T c
  // plus a margin term, so the Newton step minimizes |A dz + c| up to that
  // term. With W = V_S D^-1/2 and M = I + W W^T = L L^T the nonnegative
  // coordinates drop out: dz_Z solves the small problem
  //   min |L^-1 (V_Z dz_Z + c1 - W c2)|
  // by Householder QR, and D^1/2 dz_S = -c2 - W^T M^-1 (V_Z dz_Z + c1 - W c2).
  // M >= I stays well conditioned and V^T V is never formed, so accuracy does
  // not follow the squared condition number of H. Work is linear in the
  // number of nonnegative coordinates. Returns nothing when H is singular.
  std::optional<Vector> least_squares_direction(const Derivatives& d) const {
    const Index rows = d.V.rows();
    const Index ns = Index(nonneg_.size());
    const Index nz = Index(dense_.size());
    const Matrix W = d.V(Eigen::all, nonneg_) * d.z_s.asDiagonal();
    const Vector c2 = -Vector::Ones(ns);

    // Without nonnegative coordinates M = I and is never formed.
    Eigen::LLT<Matrix> m_llt;
    if (ns > 0) {
      Matrix M = Matrix::Identity(rows, rows);
      M.selfadjointView<Eigen::Lower>().rankUpdate(W);
      m_llt.compute(M);
    }

    const Vector shifted = ns > 0 ? Vector(d.c - W * c2) : d.c;
    Vector out = Vector::Zero(n_);
    Vector residual = shifted;
    if (nz > rows) return std::nullopt;
    if (nz > 0) {
      const Matrix Vz = d.V(Eigen::all, dense_);
      const Matrix Lz = ns > 0 ? Matrix(m_llt.matrixL().solve(Vz)) : Vz;
      const Vector lc = ns > 0 ? Vector(m_llt.matrixL().solve(shifted)) : shifted;
      const Eigen::HouseholderQR<Matrix> qr(Lz);
      const auto R = qr.matrixQR().topLeftCorner(nz, nz).triangularView<Eigen::Upper>();
      const Vector r_diag = qr.matrixQR().diagonal().head(nz).cwiseAbs();
      if (!(r_diag.minCoeff() > 1e-13 * r_diag.maxCoeff())) return std::nullopt;
      Vector dz = -R.solve(Vector((qr.householderQ().transpose() * lc).head(nz)));
      const Vector extra = d.extra(dense_);
      if (extra.squaredNorm() > 0.0) dz -= R.solve(Vector(R.transpose().solve(extra)));
      out(dense_) = dz;
      residual.noalias() += Vz * dz;
    }
    if (ns > 0) {
      const Vector ys = -c2 - W.transpose() * m_llt.solve(residual);
      out(nonneg_) = d.z_s.cwiseProduct(ys);
    }
    return out;
  }

  NewtonSolve mode_;
  Index n_;
  Index t_;
  std::vector<Index> nonneg_;
  std::vector<Index> dense_;
  std::vector<NormalBlock> blocks_;
  std::optional<NormalBlock> objective_;
  Index svec_rows_ = 0;
  Index degree_ = 0;
};

enum class CenterOutcome { Centered, Stopped, Stalled, IterationCap };

// Damped Newton centering of the barrier at weight s. `stop` is checked
// after every accepted step. Centering ends when half the squared Newton
// decrement drops below 1e-8, or when it stays below 1e-5 without halving for
// several steps (the floor set by rounding in the derivatives).
CenterOutcome center(const Barrier& barrier, Vector& z, double s, int& iterations, int cap,
                     const std::function<bool(const Vector&)>& stop) {
  constexpr double kDecrementTol = 1e-8;
  constexpr double kFloorTol = 1e-5;
  constexpr int kPatience = 4;
  double best = std::numeric_limits<double>::infinity();
  int idle = 0;
  Derivatives d = barrier.derivatives(z, s);
  if (!d.ok) return CenterOutcome::Stalled;
  for (;;) {
    const Vector dz = barrier.newton_direction(d);
    const double decrement = -d.grad.dot(dz);
    if (!std::isfinite(decrement)) return CenterOutcome::Stalled;
    if (decrement / 2.0 <= kDecrementTol) return CenterOutcome::Centered;
    if (decrement < 0.5 * best) {
      best = decrement;
      idle = 0;
    } else if (decrement / 2.0 <= kFloorTol && ++idle >= kPatience) {
      return CenterOutcome::Centered;
    }
    if (iterations >= cap) return CenterOutcome::IterationCap;

    const LineProfile line = barrier.profile(d, z, dz, s);
    double step = std::min(1.0, 0.99 * line.max_step);
    while (step > 1e-14 && !(line.increment(step) <= -0.01 * step * decrement)) step *= 0.5;
    ++iterations;
    // The profile is exact in real arithmetic; near the boundary a block can
    // still lose definiteness in rounding, so the step is also shortened
    // until the derivatives exist at the new point.
    for (; step > 1e-14; step *= 0.5) {
      Derivatives next = barrier.derivatives(z + step * dz, s);
      if (next.ok) {
        z += step * dz;
        d = std::move(next);
        break;
      }
    }
    if (step <= 1e-14) {
      return decrement / 2.0 <= kFloorTol ? CenterOutcome::Centered : CenterOutcome::Stalled;
    }
    if (stop && stop(z)) return CenterOutcome::Stopped;
  }
}

double initial_margin(const ConicProblem& problem, const Vector& x) {
  double worst = worst_residual(problem, x);
  if (problem.logdet_objective) {
    worst = std::min(worst, linalg::min_eigenvalue(problem.logdet_objective->evaluate(x)));
  }
  if (!std::isfinite(worst)) worst = 0.0;
  return worst;
}

struct PhaseOneResult {
  SolveStatus status = SolveStatus::NumericalFailure;
  Vector x;
  double margin = 0.0;
  double gap = 0.0;
  std::string message;
};

PhaseOneResult maximize_margin(const ConicProblem& problem, const SolverSettings& settings,
                               int& iterations) {
  const Barrier barrier(problem, true, settings.newton);
  const Index t = barrier.margin_index();
  const Vector x0 = problem.initial_point.size() == problem.layout.size()
                       ? problem.initial_point
                       : Vector::Zero(problem.layout.size());
  Vector z = barrier.to_internal(x0, initial_margin(problem, x0) - 1.0);

  // The final decision is the sign of the optimal margin, so the search can
  // stop once its upper bound is certifiably below -feas_tol.
  const double threshold = settings.feas_tol;
  PhaseOneResult out;
  double s = 1.0;
  const auto positive = [t](const Vector& v) { return v(t) > 0.0; };
  for (;;) {
    const CenterOutcome outcome = center(barrier, z, s, iterations, settings.max_iterations, positive);
    out.x = barrier.to_layout(z);
    out.margin = z(t);
    out.gap = double(barrier.degree()) / s;
    if (outcome == CenterOutcome::Stopped || z(t) > 0.0) {
      out.status = SolveStatus::Solved;
      return out;
    }
    if (outcome == CenterOutcome::IterationCap) {
      out.message = "iteration cap reached while maximizing the margin";
      return out;
    }
    if (outcome == CenterOutcome::Stalled) {
      out.message = "line search stalled while maximizing the margin";
      return out;
    }
    if (z(t) + out.gap < -threshold) {
      out.status = SolveStatus::Infeasible;
      out.message = "margin upper bound is negative";
      return out;
    }
    if (out.gap < std::min(settings.gap_tol, settings.feas_tol)) {
      out.status = z(t) >= -settings.feas_tol ? SolveStatus::Solved : SolveStatus::Infeasible;
      out.message = "margin converged";
      return out;
    }
    s *= settings.barrier_growth;
  }
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

SolveReport solve_feasibility(const ConicProblem& problem, const SolverSettings& settings) {
  const auto start = Clock::now();
  problem.validate();
  ConicProblem plain = problem;
  plain.logdet_objective.reset();

  SolveReport report;
  report.delta = problem.delta;
  int iterations = 0;
  const PhaseOneResult phase = maximize_margin(plain, settings, iterations);
  report.x = phase.x;
  report.margin = phase.margin;
  report.gap = phase.gap;
  report.iterations = iterations;
  report.message = phase.message;
  report.status = phase.status;
  report.worst_residual = worst_residual(plain, report.x);
  if (report.status == SolveStatus::Solved && report.worst_residual < -settings.feas_tol) {
    report.status = SolveStatus::NumericalFailure;
    report.message = "independent residual check failed";
  }
  report.seconds = seconds_since(start);
  return report;
}

SolveReport solve_maxdet(const ConicProblem& problem, const SolverSettings& settings) {
  const auto start = Clock::now();
  problem.validate();
  if (!problem.logdet_objective) throw std::invalid_argument("solve_maxdet needs an objective");

  SolveReport report;
  report.delta = problem.delta;
  int iterations = 0;
  const PhaseOneResult phase = maximize_margin(problem, settings, iterations);
  report.margin = phase.margin;
  report.x = phase.x;
  if (phase.status != SolveStatus::Solved || !(phase.margin > 0.0)) {
    report.status = phase.status == SolveStatus::NumericalFailure ? SolveStatus::NumericalFailure
                                                                  : SolveStatus::Infeasible;
    report.message = phase.message.empty() ? "no strictly feasible point" : phase.message;
    report.iterations = iterations;
    report.worst_residual = worst_residual(problem, report.x);
    report.seconds = seconds_since(start);
    return report;
  }

  const Barrier barrier(problem, false, settings.newton);
  Vector z = phase.x;
  double s = 1.0;
  report.status = SolveStatus::NumericalFailure;
  for (;;) {
    const CenterOutcome outcome = center(barrier, z, s, iterations, settings.max_iterations, {});
    report.gap = double(barrier.degree()) / s;
    if (outcome == CenterOutcome::IterationCap) {
      report.message = "iteration cap reached in the log-det phase";
      break;
    }
    if (outcome == CenterOutcome::Stalled) {
      report.message = "line search stalled in the log-det phase";
      break;
    }
    const double objective = logdet_or_nan(problem.logdet_objective->evaluate(z));
    if (report.gap <= settings.gap_tol * std::max(1.0, std::abs(objective))) {
      report.status = SolveStatus::Solved;
      break;
    }
    s *= settings.barrier_growth;
  }
  report.x = z;
  report.iterations = iterations;
  report.objective = logdet_or_nan(problem.logdet_objective->evaluate(z));
  report.worst_residual = worst_residual(problem, z);
  if (report.status == SolveStatus::Solved && report.worst_residual < -settings.feas_tol) {
    report.status = SolveStatus::NumericalFailure;
    report.message = "independent residual check failed";
  }
  report.seconds = seconds_since(start);
  return report;
}

SolveReport solve_maxdet(ConicProblem problem, const std::string& target,
                         const SolverSettings& settings) {
  problem.maximize_logdet(target);
  return solve_maxdet(problem, settings);
}

std::string dump(const ConicProblem& problem) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "ddstab-conic v1 coordinates " << problem.layout.size() << " blocks "
     << problem.blocks.size() << " delta " << problem.delta << "\n";
  for (const auto& v : problem.layout.variables()) {
    os << "variable " << v.name << " offset " << v.offset << " size " << v.size << "\n";
  }
  const auto write_matrix = [&os](const Matrix& M) {
    for (Index i = 0; i < M.rows(); ++i) {
      for (Index j = 0; j < M.cols(); ++j) os << (j ? " " : "") << M(i, j);
      os << "\n";
    }
  };
  const auto write_block = [&](const char* kind, const LmiBlock& b) {
    os << kind << " " << b.name() << " dim " << b.dim() << " sense "
       << (b.sense() == Sense::PositiveSemidefinite ? "psd" : "nsd") << " terms "
       << b.terms().size() << "\n";
    os << "F0\n";
    write_matrix(b.constant());
    for (const auto& [k, Fk] : b.terms()) {
      os << "F " << k << "\n";
      write_matrix(Fk);
    }
  };
  for (const auto& b : problem.blocks) write_block("block", b);
  if (problem.logdet_objective) write_block("maximize-logdet", *problem.logdet_objective);
  os << "nonnegative";
  for (Index k : problem.nonnegative) os << " " << k;
  os << "\n";
  return os.str();
}

}  // namespace ddstab::sdp
