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
// ddstab-cli: data-generation sweeps, single designs and over-approximations.
// Exit codes: 0 success, 2 configuration error, 3 solver failure.
#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ddstab/consistency.hpp"
#include "ddstab/experiments.hpp"
#include "ddstab/overapprox.hpp"
#include "ddstab/synthesis.hpp"

namespace fs = std::filesystem;
using namespace ddstab;
using namespace ddstab::experiments;

namespace {

constexpr int kConfigExit = 2;
constexpr int kSolverExit = 3;

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<int> workers;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig resolve(const std::string& command, const Common& common) {
  ExperimentConfig c = parse_config(command, common.config_path.empty() ? "" : read_file(common.config_path));
  if (common.seed) c.seed = *common.seed;
  if (common.out_dir) c.out_dir = *common.out_dir;
  if (common.workers) {
    if (*common.workers < 1) throw ConfigError("--workers must be positive");
    c.workers = *common.workers;
  }
  return c;
}

void write_tables(const std::vector<CsvTable>& tables, const ExperimentConfig& c) {
  fs::create_directories(c.out_dir);
  for (const auto& t : tables) {
    const fs::path path = fs::path(c.out_dir) / (t.name + ".csv");
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << t.render(c);
    std::cout << path.string() << "\n";
  }
}

void save_data(const DataSet& data, const std::string& path) {
  if (path.empty()) return;
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  if (fs::path(path).extension() == ".json") {
    out << dataset_to_json(data).dump(2) << "\n";
  } else {
    out << to_csv(data);
  }
}

DataSet load_or_generate(const std::string& data_path, const ExperimentConfig& c) {
  if (data_path.empty()) {
    return generate(c.preset(), c.epsilons.front(), c.horizons.front(), cell_seed(c.seed, 0, 0, 0));
  }
  const std::string text = read_file(data_path);
  try {
    if (fs::path(data_path).extension() == ".json") return dataset_from_json(nlohmann::json::parse(text));
    return dataset_from_csv(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("data file: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("data file: ") + e.what());
  }
}

void emit(const nlohmann::json& j, const ExperimentConfig& c, const std::string& name) {
  const std::string text = j.dump(2);
  std::cout << text << "\n";
  if (c.out_dir != ".") {
    fs::create_directories(c.out_dir);
    std::ofstream(fs::path(c.out_dir) / (name + ".json")) << text << "\n";
  }
}

ISampling sampling_from(const std::string& s) {
  if (s == "rejection") return ISampling::Rejection;
  if (s == "hit-and-run") return ISampling::HitAndRun;
  throw ConfigError("unknown sampling '" + s + "'");
}

int run_design(const ExperimentConfig& c, const std::string& data_path, const std::string& save_path,
               const std::string& approach, Index validate, const std::string& sampling) {
  const DataSet data = load_or_generate(data_path, c);
  save_data(data, save_path);
  SynthesisSettings settings;
  settings.solver = c.solver;
  const SynthesisResult r = design(data, approach_from_string(approach), settings);
  nlohmann::json out = {{"schema", kSchemaVersion}, {"config", c.to_json()}, {"design", to_json(r)}};
  if (r.solved() && validate > 0) {
    const ConsistencySets cs(data);
    Rng rng(cell_seed(c.seed, 1, 0, 0));
    ValidationOptions options;
    options.samples = validate;
    options.sampling = sampling_from(sampling);
    out["validation"] = to_json(validate_gain(r.K, cs, rng, options));
  }
  emit(out, c, "design");
  return r.status == sdp::SolveStatus::NumericalFailure ? kSolverExit : 0;
}

int run_overapprox(const ExperimentConfig& c, const std::string& data_path, const std::string& save_path,
                   Index containment, const std::string& sampling) {
  const DataSet data = load_or_generate(data_path, c);
  save_data(data, save_path);
  const ConsistencySets cs(data);
  OverapproxSettings settings;
  settings.solver = c.solver;
  OverapproxResult r;
  try {
    r = compute_overapprox(cs, settings);
  } catch (const InfeasibleContainment& e) {
    std::cerr << "overapprox: " << e.what() << "\n";
    return kSolverExit;
  }
  nlohmann::json out = {{"schema", kSchemaVersion}, {"config", c.to_json()}, {"overapprox", to_json(r)}};
  if (r.solved()) {
    out["size_ratio"] = size_ratio(cs, r);
    if (containment > 0) {
      Rng rng(cell_seed(c.seed, 2, 0, 0));
      ContainmentOptions options;
      options.sampling = sampling_from(sampling);
      const ContainmentReport rep = containment_check(r, cs, containment, rng, options);
      out["containment"] = {{"candidates", rep.candidates},
                            {"in_I", rep.in_I},
                            {"violations", rep.violations},
                            {"min_slack", rep.min_slack}};
    }
  }
  emit(out, c, "overapprox");
  return r.solved() ? 0 : kSolverExit;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Data-driven stabilization: sweeps, designs and over-approximations"};
  app.require_subcommand(1);
  Common common;
  std::string data_path, save_path, approach = "energy", sampling = "rejection";
  Index validate = 0, containment = 0;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "JSON or key=value configuration file");
    sub->add_option("--seed", common.seed, "master seed");
    sub->add_option("--out-dir", common.out_dir, "output directory");
    sub->add_option("--workers", common.workers, "worker threads");
  };
  std::vector<CLI::App*> sweeps;
  for (const char* name : {"example1", "ellipse-sweep", "size-ratio", "timing", "heatmap"}) {
    sweeps.push_back(app.add_subcommand(name, std::string("write the ") + name + " tables"));
    add_common(sweeps.back());
  }
  CLI::App* design_cmd = app.add_subcommand("design", "synthesize a gain for one data set");
  add_common(design_cmd);
  design_cmd->add_option("--data", data_path, "data set (.csv or .json); generated from the config if absent");
  design_cmd->add_option("--save-data", save_path, "write the record used (.csv or .json)");
  design_cmd->add_option("--approach", approach, "energy or instantaneous")
      ->check(CLI::IsMember({"energy", "instantaneous"}));
  design_cmd->add_option("--validate", validate, "sample count for spectral-radius validation");
  design_cmd->add_option("--sampling", sampling, "rejection or hit-and-run for I samples")
      ->check(CLI::IsMember({"rejection", "hit-and-run"}));
  CLI::App* over_cmd = app.add_subcommand("overapprox", "ellipsoidal over-approximation of I");
  add_common(over_cmd);
  over_cmd->add_option("--data", data_path, "data set (.csv or .json); generated from the config if absent");
  over_cmd->add_option("--save-data", save_path, "write the record used (.csv or .json)");
  over_cmd->add_option("--containment", containment, "candidate count for the containment check");
  over_cmd->add_option("--sampling", sampling, "rejection or hit-and-run for I samples")
      ->check(CLI::IsMember({"rejection", "hit-and-run"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigExit;
  }

  try {
    CLI::App* chosen = app.get_subcommands().front();
    const std::string command = chosen->get_name();
    const ExperimentConfig c = resolve(command, common);
    if (command == "design") return run_design(c, data_path, save_path, approach, validate, sampling);
    if (command == "overapprox") return run_overapprox(c, data_path, save_path, containment, sampling);
    if (command == "example1") write_tables(cmd_example1(c), c);
    if (command == "ellipse-sweep") write_tables(cmd_ellipse_sweep(c), c);
    if (command == "size-ratio") write_tables(cmd_size_ratio(c), c);
    if (command == "timing") write_tables(cmd_timing(c), c);
    if (command == "heatmap") write_tables(cmd_feas_heatmap(c), c);
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kConfigExit;
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kSolverExit;
  }
}
