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
#ifndef DDSTAB_EXPERIMENTS_HPP
#define DDSTAB_EXPERIMENTS_HPP

#include <cstdint>
#include <functional>
#include <json.hpp>
#include <string>
#include <vector>

#include "ddstab/common.hpp"
#include "ddstab/data_gen.hpp"
#include "ddstab/sdp.hpp"

namespace ddstab::experiments {

inline constexpr int kSchemaVersion = 1;

/// Bad or missing configuration; the CLI maps it to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A system plus the signal models used to excite it.
struct Preset {
  std::string name;
  LtiSystem system;
  Vector x0;
  InputModel inputs;
  DisturbanceKind noise = DisturbanceKind::UniformBall;
};

/// "example1" and "scalar" (A* = B* = 1/2, x0 = 1, the three scripted samples
/// then uniform inputs in [-2, 2] and interval noise) or "thirdorder" (the
/// 3-state, 2-input system, x0 = 0, Gaussian inputs and ball noise).
Preset make_preset(const std::string& name);

/// Record of length T for noise bound eps.
DataSet generate(const Preset& preset, double eps, Index T, std::uint64_t seed);

/// Fully resolved settings of one command.
struct ExperimentConfig {
  std::string command;
  std::string system = "thirdorder";
  /// Custom system (system = "custom"); rows separated by ';'.
  Matrix A;
  Matrix B;
  std::vector<double> epsilons;
  std::vector<Index> horizons;
  Index batch = 20;
  std::uint64_t seed = 1;
  int workers = 1;
  int repeats = 3;
  sdp::SolverSettings solver;
  int boundary_points = 200;
  int grid_points = 101;
  double grid_half_width = 1.0;
  double hausdorff_threshold = 0.05;
  Index validation_samples = 10000;
  std::string out_dir = ".";

  Preset preset() const;
  nlohmann::json to_json() const;
  /// FNV-1a of the canonical JSON form (out_dir and workers excluded, as
  /// they do not change results).
  std::uint64_t hash() const;
};

/// Parses `text` (a JSON object, or key=value lines with '#' comments) on top
/// of the defaults of `command`. Lists are comma separated in key=value form.
ExperimentConfig parse_config(const std::string& command, const std::string& text);
ExperimentConfig default_config(const std::string& command);

/// splitmix64 chain over (master, eps index, T index, batch index).
std::uint64_t cell_seed(std::uint64_t master, std::uint64_t eps_index, std::uint64_t t_index,
                        std::uint64_t batch_index);
std::uint64_t fnv1a(const std::string& bytes);

/// Runs body(i) for i in [0, count) on up to `workers` threads. Exceptions are
/// rethrown on the caller after all threads stop.
void parallel_for(Index count, int workers, const std::function<void(Index)>& body);

/// A CSV file: '#' metadata line, column header, rows.
struct CsvTable {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> trailer;  // extra '#' lines after the rows

  std::string render(const ExperimentConfig& config) const;
};

std::string format_number(double v);

/// Symmetric Hausdorff distance between two point clouds.
double hausdorff(const std::vector<Eigen::Vector2d>& a, const std::vector<Eigen::Vector2d>& b);

/// Coefficients of the three aggregate slack polynomials around (1/2, 1/2) and
/// their boundaries (the T = 1 set is a strip, given by its two edges).
std::vector<CsvTable> cmd_example1(const ExperimentConfig& config);
/// Scalar study along nested prefixes: C and Ibar boundaries, I grid, summary.
std::vector<CsvTable> cmd_ellipse_sweep(const ExperimentConfig& config);
/// T, size_C, size_Ibar, ratio along nested prefixes of one record.
std::vector<CsvTable> cmd_size_ratio(const ExperimentConfig& config);
/// T, median_seconds_energy, median_seconds_instantaneous, repeats.
/// Runs sequentially whatever the worker count, so timings do not interfere.
std::vector<CsvTable> cmd_timing(const ExperimentConfig& config);
/// epsilon, T, approach, ratio of feasible designs in the batch.
std::vector<CsvTable> cmd_feas_heatmap(const ExperimentConfig& config);

/// JSON form of a data set and its inverse.
nlohmann::json dataset_to_json(const DataSet& data);
DataSet dataset_from_json(const nlohmann::json& j);

}  // namespace ddstab::experiments

#endif  // DDSTAB_EXPERIMENTS_HPP
