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
#include "ddstab/experiments.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "ddstab/consistency.hpp"
#include "ddstab/overapprox.hpp"
#include "ddstab/synthesis.hpp"

namespace ddstab::experiments {

namespace {

using nlohmann::json;

std::vector<Index> arithmetic(Index first, Index step, Index last) {
  std::vector<Index> out;
  for (Index v = first; v <= last; v += step) out.push_back(v);
  return out;
}

Matrix parse_matrix(const std::string& text, const char* what) {
  std::vector<std::vector<double>> rows;
  std::stringstream rs(text);
  std::string row;
  while (std::getline(rs, row, ';')) {
    std::vector<double> values;
    std::stringstream cs(row);
    std::string cell;
    while (std::getline(cs, cell, ',')) {
      try {
        values.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ConfigError(std::string("bad number in ") + what + ": '" + cell + "'");
      }
    }
    if (!values.empty()) rows.push_back(std::move(values));
  }
  if (rows.empty()) throw ConfigError(std::string(what) + " is empty");
  Matrix M(Index(rows.size()), Index(rows[0].size()));
  for (Index i = 0; i < M.rows(); ++i) {
    if (Index(rows[std::size_t(i)].size()) != M.cols()) throw ConfigError(std::string(what) + " is ragged");
    for (Index j = 0; j < M.cols(); ++j) M(i, j) = rows[std::size_t(i)][std::size_t(j)];
  }
  return M;
}

Matrix matrix_from_json(const json& j, const char* what) {
  if (j.is_string()) return parse_matrix(j.get<std::string>(), what);
  if (!j.is_array() || j.empty() || !j[0].is_array()) throw ConfigError(std::string(what) + " must be a nested array");
  Matrix M(Index(j.size()), Index(j[0].size()));
  for (Index i = 0; i < M.rows(); ++i) {
    if (Index(j[i].size()) != M.cols()) throw ConfigError(std::string(what) + " is ragged");
    for (Index k = 0; k < M.cols(); ++k) M(i, k) = j[i][k].get<double>();
  }
  return M;
}

json matrix_to_json(const Matrix& M) {
  json rows = json::array();
  for (Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Index k = 0; k < M.cols(); ++k) row.push_back(M(i, k));
    rows.push_back(row);
  }
  return rows;
}

const std::vector<std::string> kListKeys = {"epsilons", "horizons"};
const std::vector<std::string> kStringKeys = {"system", "out_dir", "A", "B"};

// key=value text to a JSON object with the same shape as the JSON format.
json key_values_to_json(const std::string& text) {
  json out = json::object();
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
    const auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (std::find(kListKeys.begin(), kListKeys.end(), key) != kListKeys.end()) {
      json list = json::array();
      std::stringstream ls(value);
      std::string cell;
      while (std::getline(ls, cell, ',')) {
        cell = trim(cell);
        if (cell.empty()) continue;
        try {
          list.push_back(std::stod(cell));
        } catch (const std::exception&) {
          throw ConfigError("line " + std::to_string(lineno) + ": bad number '" + cell + "'");
        }
      }
      out[key] = list;
    } else if (std::find(kStringKeys.begin(), kStringKeys.end(), key) != kStringKeys.end()) {
      out[key] = value;
    } else {
      try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        out[key] = v;
      } catch (const std::exception&) {
        throw ConfigError("line " + std::to_string(lineno) + ": bad number for " + key);
      }
    }
  }
  return out;
}

template <typename T>
T integral(const json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError(key + " must be a number");
  const double d = v.get<double>();
  if (d != std::floor(d)) throw ConfigError(key + " must be an integer");
  return T(d);
}

void apply_fields(ExperimentConfig& c, const json& j) {
  if (!j.is_object()) throw ConfigError("configuration must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    const json& v = it.value();
    if (key == "system") {
      c.system = v.get<std::string>();
    } else if (key == "A") {
      c.A = matrix_from_json(v, "A");
    } else if (key == "B") {
      c.B = matrix_from_json(v, "B");
    } else if (key == "epsilons") {
      if (!v.is_array()) throw ConfigError("epsilons must be a list");
      c.epsilons.clear();
      for (const auto& e : v) c.epsilons.push_back(e.get<double>());
    } else if (key == "horizons") {
      if (!v.is_array()) throw ConfigError("horizons must be a list");
      c.horizons.clear();
      for (const auto& e : v) c.horizons.push_back(integral<Index>(e, "horizons"));
    } else if (key == "batch") {
      c.batch = integral<Index>(v, key);
    } else if (key == "seed") {
      c.seed = integral<std::uint64_t>(v, key);
    } else if (key == "workers") {
      c.workers = integral<int>(v, key);
    } else if (key == "repeats") {
      c.repeats = integral<int>(v, key);
    } else if (key == "feas_tol") {
      c.solver.feas_tol = v.get<double>();
    } else if (key == "gap_tol") {
      c.solver.gap_tol = v.get<double>();
    } else if (key == "max_iterations") {
      c.solver.max_iterations = integral<int>(v, key);
    } else if (key == "boundary_points") {
      c.boundary_points = integral<int>(v, key);
    } else if (key == "grid_points") {
      c.grid_points = integral<int>(v, key);
    } else if (key == "grid_half_width") {
      c.grid_half_width = v.get<double>();
    } else if (key == "hausdorff_threshold") {
      c.hausdorff_threshold = v.get<double>();
    } else if (key == "validation_samples") {
      c.validation_samples = integral<Index>(v, key);
    } else if (key == "out_dir") {
      c.out_dir = v.get<std::string>();
    } else {
      throw ConfigError("unknown configuration key '" + key + "'");
    }
  }
}

void check(const ExperimentConfig& c) {
  if (c.epsilons.empty()) throw ConfigError("the epsilon grid is empty");
  if (c.horizons.empty()) throw ConfigError("the T grid is empty");
  for (const double e : c.epsilons) {
    if (!(e >= 0.0)) throw ConfigError("epsilons must be nonnegative");
  }
  for (const Index T : c.horizons) {
    if (T < 1) throw ConfigError("horizons must be positive");
  }
  if (c.batch < 1) throw ConfigError("batch must be positive");
  if (c.workers < 1) throw ConfigError("workers must be positive");
  if (c.repeats < 1) throw ConfigError("repeats must be positive");
  if (c.boundary_points < 3) throw ConfigError("boundary_points must be at least 3");
  if (c.grid_points < 2) throw ConfigError("grid_points must be at least 2");
  if (!(c.grid_half_width > 0.0)) throw ConfigError("grid_half_width must be positive");
  if (!(c.solver.feas_tol > 0.0) || !(c.solver.gap_tol > 0.0) || c.solver.max_iterations < 1) {
    throw ConfigError("solver tolerances must be positive");
  }
  if (c.validation_samples < 0) throw ConfigError("validation_samples must be nonnegative");
  if (c.system == "custom" && (c.A.size() == 0 || c.B.size() == 0)) {
    throw ConfigError("system=custom needs A and B");
  }
  c.preset();  // rejects unknown names and bad shapes
}

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double single_epsilon(const ExperimentConfig& c) {
  if (c.epsilons.size() != 1) throw ConfigError(c.command + " takes exactly one epsilon");
  return c.epsilons[0];
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size() / 2;
  return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

/// Raised when a solve needed for an output value fails; exit code 3.
OverapproxResult solve_overapprox(const ConsistencySets& cs, const ExperimentConfig& c) {
  OverapproxSettings settings;
  settings.solver = c.solver;
  OverapproxResult r = compute_overapprox(cs, settings);
  if (!r.solved()) throw NumericalFailure("over-approximation failed: " + r.message);
  return r;
}

std::vector<std::string> point_row(Index T, const std::string& set, int k, const Eigen::Vector2d& v) {
  return {std::to_string(T), set, std::to_string(k), format_number(v.x()), format_number(v.y())};
}

}  // namespace

Preset make_preset(const std::string& name) {
  Preset p;
  p.name = name;
  if (name == "example1" || name == "scalar") {
    p.system.A = Matrix::Constant(1, 1, 0.5);
    p.system.B = Matrix::Constant(1, 1, 0.5);
    p.x0 = Vector::Ones(1);
    p.inputs.prefix = (Matrix(1, 3) << 1.0, -1.0, 0.0).finished();
    p.inputs.kind = name == "example1" ? InputKind::ExplicitSequence : InputKind::Uniform;
    p.inputs.lower = -2.0;
    p.inputs.upper = 2.0;
    p.noise = name == "example1" ? DisturbanceKind::Zero : DisturbanceKind::UniformInterval;
    return p;
  }
  if (name == "thirdorder") {
    p.system.A.resize(3, 3);
    p.system.B.resize(3, 2);
    p.system.A << 0.1274, 0.1431, 0.1974, 0.3619, 0.6292, 0.4153, 0.6972, 0.1574, 0.4111;
    p.system.B << 0.6901, 0.9047, 0.4809, 0.6030, 0.8913, 0.1478;
    p.x0 = Vector::Zero(3);
    p.inputs.kind = InputKind::StandardNormal;
    p.noise = DisturbanceKind::UniformBall;
    return p;
  }
  throw ConfigError("unknown system '" + name + "' (example1, scalar, thirdorder, custom)");
}

DataSet generate(const Preset& preset, double eps, Index T, std::uint64_t seed) {
  Rng rng(seed);
  InputModel inputs = preset.inputs;
  DisturbanceModel noise;
  noise.kind = preset.noise;
  noise.epsilon = eps;
  if (preset.name == "example1" || preset.name == "scalar") {
    // The scripted samples are noise free.
    noise.prefix = Matrix::Zero(1, 3);
    if (inputs.kind == InputKind::ExplicitSequence) {
      if (T > 3) throw ConfigError("example1 has at most 3 samples");
      inputs.prefix = inputs.prefix.leftCols(T).eval();
    }
  }
  return simulate(preset.system, preset.x0, inputs, noise, T, rng).data;
}

Preset ExperimentConfig::preset() const {
  if (system != "custom") return make_preset(system);
  Preset p;
  p.name = "custom";
  p.system.A = A;
  p.system.B = B;
  try {
    p.system.validate();
  } catch (const Error& e) {
    throw ConfigError(std::string("custom system: ") + e.what());
  }
  p.x0 = Vector::Zero(A.rows());
  p.inputs.kind = InputKind::StandardNormal;
  p.noise = A.rows() == 1 ? DisturbanceKind::UniformInterval : DisturbanceKind::UniformBall;
  return p;
}

json ExperimentConfig::to_json() const {
  json j;
  j["schema"] = kSchemaVersion;
  j["command"] = command;
  j["system"] = system;
  if (system == "custom") {
    j["A"] = matrix_to_json(A);
    j["B"] = matrix_to_json(B);
  }
  j["epsilons"] = epsilons;
  j["horizons"] = horizons;
  j["batch"] = batch;
  j["seed"] = seed;
  j["repeats"] = repeats;
  j["feas_tol"] = solver.feas_tol;
  j["gap_tol"] = solver.gap_tol;
  j["max_iterations"] = solver.max_iterations;
  j["barrier_growth"] = solver.barrier_growth;
  j["boundary_points"] = boundary_points;
  j["grid_points"] = grid_points;
  j["grid_half_width"] = grid_half_width;
  j["hausdorff_threshold"] = hausdorff_threshold;
  j["validation_samples"] = validation_samples;
  return j;
}

std::uint64_t ExperimentConfig::hash() const { return fnv1a(to_json().dump()); }

ExperimentConfig default_config(const std::string& command) {
  ExperimentConfig c;
  c.command = command;
  const std::vector<Index> hundreds = arithmetic(100, 100, 1000);
  if (command == "example1") {
    c.system = "example1";
    c.epsilons = {1.0};
    c.horizons = {1, 2, 3};
  } else if (command == "ellipse-sweep") {
    c.system = "scalar";
    c.epsilons = {1.0};
    c.horizons = {3, 250, 500, 750, 1000};
  } else if (command == "size-ratio") {
    c.epsilons = {0.1};
    c.horizons = hundreds;
  } else if (command == "timing") {
    c.epsilons = {0.1};
    c.horizons = hundreds;
  } else if (command == "heatmap") {
    for (int k = 1; k <= 20; ++k) c.epsilons.push_back(0.05 * k);
    c.horizons = hundreds;
    c.batch = 100;
  } else if (command == "design") {
    c.epsilons = {0.1};
    c.horizons = {400};
  } else if (command == "overapprox") {
    c.epsilons = {0.1};
    c.horizons = {100};
  } else {
    throw ConfigError("unknown command '" + command + "'");
  }
  return c;
}

ExperimentConfig parse_config(const std::string& command, const std::string& text) {
  ExperimentConfig c = default_config(command);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos) {
    json j;
    if (text[first] == '{') {
      try {
        j = json::parse(text);
      } catch (const json::exception& e) {
        throw ConfigError(std::string("configuration JSON: ") + e.what());
      }
    } else {
      j = key_values_to_json(text);
    }
    try {
      apply_fields(c, j);
    } catch (const json::exception& e) {
      throw ConfigError(std::string("configuration value: ") + e.what());
    }
  }
  check(c);
  return c;
}

std::uint64_t cell_seed(std::uint64_t master, std::uint64_t eps_index, std::uint64_t t_index,
                        std::uint64_t batch_index) {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ eps_index);
  h = splitmix64(h ^ t_index);
  return splitmix64(h ^ batch_index);
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void parallel_for(Index count, int workers, const std::function<void(Index)>& body) {
  const int threads = int(std::max<Index>(1, std::min<Index>(workers, count)));
  if (threads <= 1) {
    for (Index i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<Index> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(std::size_t(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (Index i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (v == 0.0) v = 0.0;  // no "-0"
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string CsvTable::render(const ExperimentConfig& config) const {
  std::ostringstream os;
  char hash[17];
  std::snprintf(hash, sizeof(hash), "%016" PRIx64, config.hash());
  os << "# ddstab schema=" << kSchemaVersion << " table=" << name << " command=" << config.command
     << " config_hash=" << hash << " seed=" << config.seed << " feas_tol=" << format_number(config.solver.feas_tol)
     << " gap_tol=" << format_number(config.solver.gap_tol) << " max_iterations=" << config.solver.max_iterations
     << " synthesis_delta=1e-6*max(1,|X1|_2) overapprox_delta=1e-8*max(1,trace(A_I)/T)\n";
  os << "# config=" << config.to_json().dump() << "\n";
  for (std::size_t k = 0; k < columns.size(); ++k) os << columns[k] << (k + 1 < columns.size() ? "," : "\n");
  for (const auto& row : rows) {
    for (std::size_t k = 0; k < row.size(); ++k) os << row[k] << (k + 1 < row.size() ? "," : "\n");
  }
  for (const auto& line : trailer) os << "# " << line << "\n";
  return os.str();
}

double hausdorff(const std::vector<Eigen::Vector2d>& a, const std::vector<Eigen::Vector2d>& b) {
  if (a.empty() || b.empty()) return std::numeric_limits<double>::infinity();
  const auto directed = [](const std::vector<Eigen::Vector2d>& from, const std::vector<Eigen::Vector2d>& to) {
    double worst = 0.0;
    for (const auto& p : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& q : to) best = std::min(best, (p - q).squaredNorm());
      worst = std::max(worst, best);
    }
    return std::sqrt(worst);
  };
  return std::max(directed(a, b), directed(b, a));
}

std::vector<CsvTable> cmd_example1(const ExperimentConfig& config) {
  CsvTable coef{"example1_coefficients", {"T", "c0", "cA", "cB", "cAA", "cBB", "cAB"}, {}, {}};
  CsvTable bound{"example1_boundaries", {"T", "piece", "vertex", "a", "b"}, {}, {}};
  coef.trailer.push_back("slack polynomial in shifted coordinates a - 1/2, b - 1/2");
  for (const Index T : config.horizons) {
    if (T < 1 || T > 3) throw ConfigError("example1 horizons must lie in {1, 2, 3}");
    const ConsistencySets cs(example1_dataset(int(T)));
    const auto& q = cs.aggregate();
    const auto c = scalar_coefficients(q.A, q.B, q.C, 0.5, 0.5);
    coef.rows.push_back({std::to_string(T), format_number(c.c0), format_number(c.cA), format_number(c.cB),
                         format_number(c.cAA), format_number(c.cBB), format_number(c.cAB)});
    if (cs.is_bounded()) {
      const auto pts = ellipse_boundary(quadratic_to_center(cs.energy_set()), config.boundary_points);
      for (int k = 0; k < int(pts.size()); ++k) {
        bound.rows.push_back({std::to_string(T), "0", std::to_string(k), format_number(pts[std::size_t(k)].x()),
                              format_number(pts[std::size_t(k)].y())});
      }
    } else {
      // The strip |a + b - 1| <= 1: edges a + b = 0 and a + b = 2.
      for (int piece = 0; piece < 2; ++piece) {
        for (int k = 0; k < config.boundary_points; ++k) {
          const double a = -1.5 + 4.0 * double(k) / double(config.boundary_points - 1);
          const double b = 2.0 * piece - a;
          bound.rows.push_back({std::to_string(T), std::to_string(piece), std::to_string(k), format_number(a),
                                format_number(b)});
        }
      }
    }
  }
  return {coef, bound};
}

std::vector<CsvTable> cmd_ellipse_sweep(const ExperimentConfig& config) {
  const Preset preset = config.preset();
  if (preset.system.n() != 1 || preset.system.m() != 1) throw ConfigError("ellipse-sweep needs a scalar system");
  const double eps = single_epsilon(config);
  const Index max_T = *std::max_element(config.horizons.begin(), config.horizons.end());
  const DataSet full = generate(preset, eps, max_T, cell_seed(config.seed, 0, 0, 0));

  const std::size_t count = config.horizons.size();
  std::vector<std::vector<Eigen::Vector2d>> c_bound(count), i_bound(count);
  std::vector<std::vector<GridPoint>> grids(count);
  std::vector<double> size_c(count), size_i(count);
  const double a0 = preset.system.A(0, 0), b0 = preset.system.B(0, 0), w = config.grid_half_width;
  parallel_for(Index(count), config.workers, [&](Index k) {
    const ConsistencySets cs(full.prefix(config.horizons[std::size_t(k)]));
    if (!cs.is_bounded()) throw InfeasibleContainment("the energy set is unbounded at this T");
    const OverapproxResult r = solve_overapprox(cs, config);
    c_bound[std::size_t(k)] = ellipse_boundary(quadratic_to_center(cs.energy_set()), config.boundary_points);
    i_bound[std::size_t(k)] = overapprox_boundary(r, config.boundary_points);
    grids[std::size_t(k)] = membership_grid_I(cs, a0 - w, a0 + w, b0 - w, b0 + w, config.grid_points, config.grid_points);
    size_c[std::size_t(k)] = size(cs.energy_set());
    size_i[std::size_t(k)] = r.size;
  });

  CsvTable bound{"ellipse_sweep_boundaries", {"T", "set", "vertex", "a", "b"}, {}, {}};
  CsvTable grid{"ellipse_sweep_grid", {"T", "a", "b", "member_I"}, {}, {}};
  CsvTable summary{"ellipse_sweep_summary", {"T", "size_C", "size_Ibar", "ratio", "hausdorff_C_previous", "C_stable"}, {}, {}};
  for (std::size_t k = 0; k < count; ++k) {
    const Index T = config.horizons[k];
    for (int v = 0; v < int(c_bound[k].size()); ++v) bound.rows.push_back(point_row(T, "C", v, c_bound[k][std::size_t(v)]));
    for (int v = 0; v < int(i_bound[k].size()); ++v) bound.rows.push_back(point_row(T, "Ibar", v, i_bound[k][std::size_t(v)]));
    for (const auto& g : grids[k]) {
      grid.rows.push_back({std::to_string(T), format_number(g.a), format_number(g.b), g.member ? "1" : "0"});
    }
    const double h = k == 0 ? std::numeric_limits<double>::quiet_NaN() : hausdorff(c_bound[k - 1], c_bound[k]);
    summary.rows.push_back({std::to_string(T), format_number(size_c[k]), format_number(size_i[k]),
                            format_number(size_c[k] / size_i[k]), format_number(h),
                            k == 0 ? "nan" : (h <= config.hausdorff_threshold ? "1" : "0")});
  }
  return {bound, grid, summary};
}

std::vector<CsvTable> cmd_size_ratio(const ExperimentConfig& config) {
  const Preset preset = config.preset();
  const double eps = single_epsilon(config);
  const Index max_T = *std::max_element(config.horizons.begin(), config.horizons.end());
  const DataSet full = generate(preset, eps, max_T, cell_seed(config.seed, 0, 0, 0));
  const std::size_t count = config.horizons.size();
  std::vector<double> size_c(count), size_i(count);
  parallel_for(Index(count), config.workers, [&](Index k) {
    const ConsistencySets cs(full.prefix(config.horizons[std::size_t(k)]));
    if (!cs.is_bounded()) throw InfeasibleContainment("the energy set is unbounded at this T");
    const OverapproxResult r = solve_overapprox(cs, config);
    size_c[std::size_t(k)] = std::exp(log_size(cs.energy_set()));
    size_i[std::size_t(k)] = r.size;
  });
  CsvTable table{"size_ratio", {"T", "size_C", "size_Ibar", "ratio"}, {}, {}};
  for (std::size_t k = 0; k < count; ++k) {
    table.rows.push_back({std::to_string(config.horizons[k]), format_number(size_c[k]), format_number(size_i[k]),
                          format_number(size_c[k] / size_i[k])});
  }
  return {table};
}

std::vector<CsvTable> cmd_timing(const ExperimentConfig& config) {
  const Preset preset = config.preset();
  const double eps = single_epsilon(config);
  SynthesisSettings settings;
  settings.solver = config.solver;
  CsvTable table{"timing", {"T", "median_seconds_energy", "median_seconds_instantaneous", "repeats"}, {}, {}};
  std::vector<std::string> statuses;
  for (std::size_t k = 0; k < config.horizons.size(); ++k) {
    const Index T = config.horizons[k];
    const DataSet data = generate(preset, eps, T, cell_seed(config.seed, 0, k, 0));
    std::vector<double> energy, inst;
    std::string status;
    // One untimed solve per approach first, so allocation and cache effects
    // of the first run do not enter the median.
    for (const Approach a : {Approach::Energy, Approach::Instantaneous}) {
      status += std::string(status.empty() ? "" : "/") + sdp::to_string(design(data, a, settings).status);
    }
    for (int r = 0; r < config.repeats; ++r) {
      for (const Approach a : {Approach::Energy, Approach::Instantaneous}) {
        const auto start = std::chrono::steady_clock::now();
        const SynthesisResult res = design(data, a, settings);
        const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        (a == Approach::Energy ? energy : inst).push_back(sec);
        if (res.status != sdp::SolveStatus::Solved && r == 0) status += " (repeat " + std::string(sdp::to_string(res.status)) + ")";
      }
    }
    statuses.push_back("T=" + std::to_string(T) + " energy/instantaneous=" + status);
    table.rows.push_back({std::to_string(T), format_number(median(energy)), format_number(median(inst)),
                          std::to_string(config.repeats)});
  }
  table.trailer = statuses;
  return {table};
}

std::vector<CsvTable> cmd_feas_heatmap(const ExperimentConfig& config) {
  const Preset preset = config.preset();
  SynthesisSettings settings;
  settings.solver = config.solver;
  const Index ne = Index(config.epsilons.size()), nt = Index(config.horizons.size()), nb = config.batch;
  // Per task: 1 bit per approach for "solved", and a numerical-failure count.
  std::vector<std::array<sdp::SolveStatus, 2>> status(std::size_t(ne * nt * nb));
  parallel_for(ne * nt * nb, config.workers, [&](Index task) {
    const Index e = task / (nt * nb), t = (task / nb) % nt, b = task % nb;
    const DataSet data = generate(preset, config.epsilons[std::size_t(e)], config.horizons[std::size_t(t)],
                                  cell_seed(config.seed, std::uint64_t(e), std::uint64_t(t), std::uint64_t(b)));
    status[std::size_t(task)][0] = design(data, Approach::Energy, settings).status;
    status[std::size_t(task)][1] = design(data, Approach::Instantaneous, settings).status;
  });

  CsvTable table{"heatmap", {"epsilon", "T", "approach", "ratio"}, {}, {}};
  Index failures = 0;
  for (Index e = 0; e < ne; ++e) {
    for (Index t = 0; t < nt; ++t) {
      for (int a = 0; a < 2; ++a) {
        Index solved = 0;
        for (Index b = 0; b < nb; ++b) {
          const sdp::SolveStatus s = status[std::size_t((e * nt + t) * nb + b)][std::size_t(a)];
          solved += s == sdp::SolveStatus::Solved;
          failures += s == sdp::SolveStatus::NumericalFailure;
        }
        table.rows.push_back({format_number(config.epsilons[std::size_t(e)]), std::to_string(config.horizons[std::size_t(t)]),
                              a == 0 ? "energy" : "instantaneous", format_number(double(solved) / double(nb))});
      }
    }
  }
  table.trailer.push_back("batch=" + std::to_string(nb) + " numerical_failures=" + std::to_string(failures) +
                          " (counted as not feasible)");
  return {table};
}

json dataset_to_json(const DataSet& data) {
  data.validate();
  return {{"n", data.n()},
          {"m", data.m()},
          {"T", data.T()},
          {"epsilon", data.epsilon},
          {"X0", matrix_to_json(data.X0)},
          {"X1", matrix_to_json(data.X1)},
          {"U0", matrix_to_json(data.U0)}};
}

DataSet dataset_from_json(const json& j) {
  DataSet d;
  try {
    d.X0 = matrix_from_json(j.at("X0"), "X0");
    d.X1 = matrix_from_json(j.at("X1"), "X1");
    d.U0 = matrix_from_json(j.at("U0"), "U0");
    d.epsilon = j.at("epsilon").get<double>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("dataset JSON: ") + e.what());
  }
  d.validate();
  return d;
}

}  // namespace ddstab::experiments
