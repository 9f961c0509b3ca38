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
#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ddstab/experiments.hpp"

using namespace ddstab;
using namespace ddstab::experiments;

namespace {

// Data rows of a rendered table, split on commas.
std::vector<std::vector<std::string>> data_rows(const std::string& csv) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream is(csv);
  std::string line;
  bool header = true;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

ExperimentConfig small_scalar(const std::string& command) {
  return parse_config(command, "system = scalar\nepsilons = 1\nhorizons = 40, 80\nbatch = 2\n");
}

}  // namespace

TEST_CASE("key=value and JSON configurations resolve to the same settings") {
  const ExperimentConfig kv = parse_config("heatmap",
                                           "# small grid\n"
                                           "epsilons = 0.1, 0.2   # two columns\n"
                                           "horizons = 100,200\n"
                                           "batch = 5\nseed = 7\nfeas_tol = 1e-9\n");
  const ExperimentConfig js = parse_config(
      "heatmap", R"({"epsilons": [0.1, 0.2], "horizons": [100, 200], "batch": 5, "seed": 7, "feas_tol": 1e-9})");
  CHECK(kv.epsilons == std::vector<double>{0.1, 0.2});
  CHECK(kv.horizons == std::vector<Index>{100, 200});
  CHECK(kv.batch == 5);
  CHECK(kv.seed == 7);
  CHECK(kv.solver.feas_tol == 1e-9);
  CHECK(kv.hash() == js.hash());
  CHECK(kv.to_json() == js.to_json());
}

TEST_CASE("command defaults") {
  const ExperimentConfig heat = default_config("heatmap");
  CHECK(heat.epsilons.size() == 20);
  CHECK(heat.epsilons.front() == doctest::Approx(0.05));
  CHECK(heat.epsilons.back() == doctest::Approx(1.0));
  CHECK(heat.horizons.size() == 10);
  CHECK(heat.batch == 100);
  CHECK(default_config("ellipse-sweep").system == "scalar");
  CHECK(default_config("timing").repeats == 3);
  CHECK(default_config("example1").horizons == std::vector<Index>{1, 2, 3});
  CHECK_THROWS_AS(default_config("plot"), ConfigError);
}

TEST_CASE("invalid configurations raise ConfigError") {
  CHECK_THROWS_AS(parse_config("heatmap", "horizons =\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("heatmap", R"({"epsilons": []})"), ConfigError);
  CHECK_THROWS_AS(parse_config("heatmap", "epsilons = -1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("heatmap", "horizons = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("heatmap", "colour = red\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("heatmap", "batch = two\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("heatmap", "batch = 2.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("heatmap", "no equals sign\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("heatmap", "{not json"), ConfigError);
  CHECK_THROWS_AS(parse_config("heatmap", "system = pendulum\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("heatmap", "system = custom\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("heatmap", "system = custom\nA = 1,2;3\nB = 1;1\n"), ConfigError);
  CHECK_THROWS_AS(cmd_size_ratio(parse_config("size-ratio", "epsilons = 0.1, 0.2\n")), ConfigError);
  CHECK_THROWS_AS(cmd_example1(parse_config("example1", "horizons = 4\n")), ConfigError);
}

TEST_CASE("custom systems parse from row strings and nested arrays") {
  const ExperimentConfig a = parse_config("size-ratio", "system = custom\nA = 0.5, 0.1; 0, 0.3\nB = 1; 0.5\n");
  const ExperimentConfig b =
      parse_config("size-ratio", R"({"system": "custom", "A": [[0.5, 0.1], [0, 0.3]], "B": [[1], [0.5]]})");
  CHECK(a.A.isApprox(b.A));
  CHECK(a.B.isApprox(b.B));
  CHECK(a.hash() == b.hash());
  const Preset p = a.preset();
  CHECK(p.system.n() == 2);
  CHECK(p.system.m() == 1);
}

TEST_CASE("the config hash tracks results, not scheduling") {
  ExperimentConfig c = default_config("heatmap");
  const auto h = c.hash();
  c.workers = 8;
  c.out_dir = "/elsewhere";
  CHECK(c.hash() == h);
  c.seed = 2;
  CHECK(c.hash() != h);
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("cell seeds are deterministic and distinct") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t e = 0; e < 4; ++e) {
    for (std::uint64_t t = 0; t < 4; ++t) {
      for (std::uint64_t b = 0; b < 8; ++b) {
        CHECK(cell_seed(1, e, t, b) == cell_seed(1, e, t, b));
        seen.insert(cell_seed(1, e, t, b));
      }
    }
  }
  CHECK(seen.size() == 128);
  CHECK(cell_seed(1, 0, 0, 0) != cell_seed(2, 0, 0, 0));
}

TEST_CASE("parallel_for visits every index once and rethrows") {
  std::vector<int> hits(1000, 0);
  parallel_for(1000, 7, [&](Index i) { hits[std::size_t(i)] += 1; });
  CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  std::atomic<int> count{0};
  CHECK_THROWS_AS(parallel_for(100, 4,
                               [&](Index i) {
                                 ++count;
                                 if (i == 13) throw NumericalFailure("boom");
                               }),
                  NumericalFailure);
  parallel_for(0, 4, [&](Index) { FAIL("no work expected"); });
}

TEST_CASE("generate is reproducible and example1 matches the scripted record") {
  const Preset p = make_preset("thirdorder");
  const DataSet a = generate(p, 0.1, 50, 99);
  const DataSet b = generate(p, 0.1, 50, 99);
  CHECK(a.X1 == b.X1);
  CHECK(a.U0 == b.U0);
  CHECK(generate(p, 0.1, 50, 100).X1 != a.X1);
  for (int T = 1; T <= 3; ++T) {
    const DataSet e = generate(make_preset("example1"), 1.0, T, 5);
    const DataSet ref = example1_dataset(T);
    CHECK(e.X0 == ref.X0);
    CHECK(e.X1 == ref.X1);
    CHECK(e.U0 == ref.U0);
  }
  // The scalar study starts with the same three samples.
  const DataSet s = generate(make_preset("scalar"), 1.0, 10, 5);
  CHECK(s.prefix(3).X1 == example1_dataset(3).X1);
}

TEST_CASE("example1 tables carry the closed-form coefficients") {
  const auto tables = cmd_example1(default_config("example1"));
  REQUIRE(tables.size() == 2);
  const auto rows = data_rows(tables[0].render(default_config("example1")));
  REQUIRE(rows.size() == 3);
  // T, c0, cA, cB, cAA, cBB, cAB
  const std::vector<std::vector<double>> expected = {
      {1, 1, 0, 0, -1, -1, -2}, {2, 2, 0, 0, -2, -2, 0}, {3, 3, 0, 0, -2, -2, 0}};
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t k = 0; k < 7; ++k) CHECK(std::stod(rows[r][k]) == doctest::Approx(expected[r][k]).epsilon(1e-12));
  }
  // T = 1 boundary: two strip edges a + b = 0 and a + b = 2.
  for (const auto& row : data_rows(tables[1].render(default_config("example1")))) {
    if (row[0] != "1") continue;
    CHECK(std::stod(row[3]) + std::stod(row[4]) == doctest::Approx(row[1] == "0" ? 0.0 : 2.0));
  }
}

TEST_CASE("size-ratio output is reproducible and its ratio column is size_C / size_Ibar") {
  ExperimentConfig c = small_scalar("size-ratio");
  const std::string first = cmd_size_ratio(c)[0].render(c);
  c.workers = 2;
  const std::string second = cmd_size_ratio(c)[0].render(c);
  CHECK(first == second);
  CHECK(first.rfind("# ddstab schema=1 table=size_ratio command=size-ratio config_hash=", 0) == 0);
  const auto rows = data_rows(first);
  REQUIRE(rows.size() == 2);
  for (const auto& row : rows) {
    const double ratio = std::stod(row[1]) / std::stod(row[2]);
    CHECK(std::stod(row[3]) == doctest::Approx(ratio).epsilon(1e-12));
    CHECK(std::stod(row[3]) > 1.0);
  }
}

TEST_CASE("heatmap rows cover every cell and approach") {
  ExperimentConfig c = small_scalar("heatmap");
  const auto table = cmd_feas_heatmap(c)[0];
  REQUIRE(table.rows.size() == 4);
  CHECK(table.rows[0][2] == "energy");
  CHECK(table.rows[1][2] == "instantaneous");
  for (const auto& row : table.rows) {
    const double r = std::stod(row[3]);
    CHECK(r >= 0.0);
    CHECK(r <= 1.0);
  }
  c.workers = 3;
  CHECK(cmd_feas_heatmap(c)[0].render(c) == table.render(small_scalar("heatmap")));
}

TEST_CASE("ellipse sweep summary tracks the C boundary") {
  ExperimentConfig c = parse_config("ellipse-sweep", "horizons = 3, 60, 120\ngrid_points = 11\nboundary_points = 60\n");
  const auto tables = cmd_ellipse_sweep(c);
  REQUIRE(tables.size() == 3);
  CHECK(tables[1].rows.size() == 3 * 11 * 11);
  const auto& summary = tables[2].rows;
  REQUIRE(summary.size() == 3);
  CHECK(summary[0][4] == "nan");
  CHECK(std::stod(summary[0][3]) == doctest::Approx(1.5).epsilon(1e-5));
  CHECK(std::stod(summary[2][4]) >= 0.0);
}

TEST_CASE("hausdorff distance and number formatting") {
  const std::vector<Eigen::Vector2d> a = {{0, 0}, {1, 0}};
  const std::vector<Eigen::Vector2d> b = {{0, 0}, {1, 0}, {1, 2}};
  CHECK(hausdorff(a, b) == doctest::Approx(2.0));
  CHECK(hausdorff(a, a) == 0.0);
  CHECK(format_number(-0.0) == "0");
  CHECK(format_number(0.1) == "0.1");
  CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("dataset JSON round trip") {
  const DataSet d = generate(make_preset("thirdorder"), 0.1, 20, 3);
  const DataSet back = dataset_from_json(nlohmann::json::parse(dataset_to_json(d).dump()));
  CHECK(back.X0 == d.X0);
  CHECK(back.X1 == d.X1);
  CHECK(back.U0 == d.U0);
  CHECK(back.epsilon == d.epsilon);
  CHECK_THROWS_AS(dataset_from_json(nlohmann::json::parse(R"({"X0": [[1]]})")), ConfigError);
}
