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
#include "ddstab/data_gen.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace ddstab {

void LtiSystem::validate() const {
  if (A.rows() == 0 || A.rows() != A.cols()) throw ShapeMismatch("A must be square and nonempty");
  if (B.rows() != A.rows() || B.cols() == 0) throw ShapeMismatch("B must have n rows and m >= 1 columns");
}

Matrix DataSet::regressor() const {
  Matrix W(n() + m(), T());
  W << X0, U0;
  return W;
}

DataSet DataSet::prefix(Index length) const {
  if (length < 1 || length > T()) throw std::out_of_range("prefix length outside [1, T]");
  DataSet out;
  out.X0 = X0.leftCols(length);
  out.X1 = X1.leftCols(length);
  out.U0 = U0.leftCols(length);
  out.epsilon = epsilon;
  return out;
}

void DataSet::validate() const {
  if (T() < 1) throw ShapeMismatch("data set needs T >= 1");
  if (n() < 1 || m() < 1) throw ShapeMismatch("data set needs n, m >= 1");
  if (X1.rows() != n() || X1.cols() != T() || U0.cols() != T()) {
    throw ShapeMismatch("X0, X1, U0 must share the sample count and state dimension");
  }
  if (!(epsilon >= 0.0)) throw std::invalid_argument("epsilon must be nonnegative");
}

Vector sample_uniform_ball(Index dim, double epsilon, Rng& rng) {
  if (!(epsilon >= 0.0)) throw std::invalid_argument("epsilon must be nonnegative");
  Vector d = Vector::Zero(dim);
  if (epsilon == 0.0) return d;
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  double norm = 0.0;
  while (norm == 0.0) {
    for (Index k = 0; k < dim; ++k) d(k) = normal(rng);
    norm = d.norm();
  }
  const double radius = std::sqrt(epsilon) * std::pow(uniform(rng), 1.0 / double(dim));
  d *= radius / norm;
  const double sq = d.squaredNorm();
  if (sq > epsilon) d *= std::sqrt(epsilon / sq);
  return d;
}

namespace {

Vector draw_input(const InputModel& model, Index m, Rng& rng) {
  Vector u(m);
  switch (model.kind) {
    case InputKind::Uniform: {
      std::uniform_real_distribution<double> dist(model.lower, model.upper);
      for (Index k = 0; k < m; ++k) u(k) = dist(rng);
      break;
    }
    case InputKind::StandardNormal: {
      std::normal_distribution<double> dist(0.0, 1.0);
      for (Index k = 0; k < m; ++k) u(k) = dist(rng);
      break;
    }
    case InputKind::ExplicitSequence:
      throw std::invalid_argument("explicit input sequence is shorter than T");
  }
  return u;
}

Vector draw_disturbance(const DisturbanceModel& model, Index n, Rng& rng) {
  switch (model.kind) {
    case DisturbanceKind::Zero:
      return Vector::Zero(n);
    case DisturbanceKind::UniformInterval: {
      if (n != 1) throw std::invalid_argument("interval disturbances are scalar only");
      const double half = std::sqrt(model.epsilon);
      std::uniform_real_distribution<double> dist(-half, half);
      Vector d(1);
      d(0) = dist(rng);
      return d;
    }
    case DisturbanceKind::UniformBall:
      return sample_uniform_ball(n, model.epsilon, rng);
  }
  return Vector::Zero(n);
}

}  // namespace

Trajectory simulate(const LtiSystem& system, const Vector& x0, const InputModel& inputs,
                    const DisturbanceModel& disturbances, Index T, Rng& rng) {
  system.validate();
  if (T < 1) throw std::invalid_argument("simulate needs T >= 1");
  const Index n = system.n();
  const Index m = system.m();
  if (x0.size() != n) throw ShapeMismatch("x0 has the wrong dimension");
  if (inputs.prefix.size() > 0 && inputs.prefix.rows() != m) throw ShapeMismatch("input prefix rows != m");
  if (disturbances.prefix.size() > 0 && disturbances.prefix.rows() != n) {
    throw ShapeMismatch("disturbance prefix rows != n");
  }
  if (inputs.kind == InputKind::ExplicitSequence && inputs.prefix.cols() != T) {
    throw std::invalid_argument("explicit input sequences must have length T");
  }
  if (!(disturbances.epsilon >= 0.0)) throw std::invalid_argument("epsilon must be nonnegative");

  Trajectory out;
  DataSet& data = out.data;
  data.X0.resize(n, T);
  data.X1.resize(n, T);
  data.U0.resize(m, T);
  data.epsilon = disturbances.epsilon;
  out.disturbances.resize(n, T);

  Vector x = x0;
  for (Index i = 0; i < T; ++i) {
    const Vector u = i < inputs.prefix.cols() ? Vector(inputs.prefix.col(i)) : draw_input(inputs, m, rng);
    const Vector d = i < disturbances.prefix.cols() ? Vector(disturbances.prefix.col(i))
                                                    : draw_disturbance(disturbances, n, rng);
    if (d.squaredNorm() > disturbances.epsilon) {
      throw std::logic_error("generated disturbance violates |d|^2 <= epsilon");
    }
    const Vector next = system.A * x + system.B * u + d;
    data.X0.col(i) = x;
    data.U0.col(i) = u;
    data.X1.col(i) = next;
    out.disturbances.col(i) = d;
    x = next;
  }
  return out;
}

DataSet example1_dataset(int T) {
  if (T < 1 || T > 3) throw std::out_of_range("example 1 has T in {1, 2, 3}");
  DataSet full;
  full.X0 = (Matrix(1, 3) << 1.0, 1.0, 0.0).finished();
  full.U0 = (Matrix(1, 3) << 1.0, -1.0, 0.0).finished();
  full.X1 = (Matrix(1, 3) << 1.0, 0.0, 0.0).finished();
  full.epsilon = 1.0;
  return full.prefix(T);
}

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string to_csv(const DataSet& data) {
  data.validate();
  std::ostringstream os;
  os << "# ddstab-dataset v1 n=" << data.n() << " m=" << data.m() << " T=" << data.T()
     << " epsilon=" << format_double(data.epsilon) << "\n";
  for (Index k = 0; k < data.n(); ++k) os << "x_" << k + 1 << ",";
  for (Index k = 0; k < data.m(); ++k) os << "u_" << k + 1 << ",";
  for (Index k = 0; k < data.n(); ++k) os << "next_x_" << k + 1 << (k + 1 < data.n() ? "," : "\n");
  for (Index i = 0; i < data.T(); ++i) {
    for (Index k = 0; k < data.n(); ++k) os << format_double(data.X0(k, i)) << ",";
    for (Index k = 0; k < data.m(); ++k) os << format_double(data.U0(k, i)) << ",";
    for (Index k = 0; k < data.n(); ++k) {
      os << format_double(data.X1(k, i)) << (k + 1 < data.n() ? "," : "\n");
    }
  }
  return os.str();
}

DataSet dataset_from_csv(std::string_view text) {
  std::istringstream is{std::string(text)};
  std::string line;
  long n = -1, m = -1;
  double epsilon = -1.0;
  if (!std::getline(is, line) || line.rfind("# ddstab-dataset v1", 0) != 0) {
    throw std::invalid_argument("dataset csv: missing '# ddstab-dataset v1' header");
  }
  {
    std::istringstream hs(line.substr(19));
    std::string field;
    while (hs >> field) {
      const auto eq = field.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = field.substr(0, eq);
      const std::string value = field.substr(eq + 1);
      if (key == "n") n = std::stol(value);
      if (key == "m") m = std::stol(value);
      if (key == "epsilon") epsilon = std::stod(value);
    }
  }
  if (n < 1 || m < 1 || epsilon < 0.0) throw std::invalid_argument("dataset csv: bad header fields");
  if (!std::getline(is, line)) throw std::invalid_argument("dataset csv: missing column header");

  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    if (long(row.size()) != 2 * n + m) throw std::invalid_argument("dataset csv: wrong column count");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::invalid_argument("dataset csv: no samples");

  DataSet data;
  const Index T = Index(rows.size());
  data.X0.resize(n, T);
  data.U0.resize(m, T);
  data.X1.resize(n, T);
  data.epsilon = epsilon;
  for (Index i = 0; i < T; ++i) {
    for (Index k = 0; k < n; ++k) data.X0(k, i) = rows[i][k];
    for (Index k = 0; k < m; ++k) data.U0(k, i) = rows[i][n + k];
    for (Index k = 0; k < n; ++k) data.X1(k, i) = rows[i][n + m + k];
  }
  data.validate();
  return data;
}

}  // namespace ddstab
