/* Copyright 2026 The Sparsegen Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
// Drives the installed binary end to end: output formats, exit codes, and
// the synth/train/eval file round trip.

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sparsegen/io.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
};

RunResult run_cli(const std::string& args) {
  const std::string command = std::string(CLI_PATH) + " " + args +
                              " 2>/dev/null";
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult result;
  char buffer[4096];
  while (std::size_t n = std::fread(buffer, 1, sizeof(buffer), pipe)) {
    result.out.append(buffer, n);
  }
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("map: JSON output matches the frozen mapping points") {
  auto result = run_cli("map --fn sparsemax --z 0,1");
  REQUIRE(result.exit_code == 0);
  auto j = nlohmann::json::parse(result.out);
  CHECK(j["p"] == nlohmann::json::array({0.0, 1.0}));
  CHECK(j["support"] == nlohmann::json::array({1}));

  result = run_cli("map --fn sparsemax --z 100,101");
  j = nlohmann::json::parse(result.out);
  CHECK(j["p"] == nlohmann::json::array({0.0, 1.0}));

  result = run_cli("map --fn sparsegen-lin --lambda 0.5 --z 1,1.25");
  REQUIRE(result.exit_code == 0);
  j = nlohmann::json::parse(result.out);
  CHECK(j["p"][0].get<double>() == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(j["p"][1].get<double>() == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(j["support"].size() == 2);

  result = run_cli("map --fn sparsegen --transform exp --lambda 0.5 --z 1,2");
  REQUIRE(result.exit_code == 0);
}

TEST_CASE("exit codes: 2 for usage errors, 3 for domain errors") {
  CHECK(run_cli("map --fn sum-normalization --z 2,-1").exit_code == 3);
  CHECK(run_cli("map --fn sparsegen --transform log --z 1,-3").exit_code ==
        3);
  CHECK(run_cli("map --fn bogus --z 1,2").exit_code == 2);
  CHECK(run_cli("map --fn sparsemax --z not,numbers").exit_code == 2);
  CHECK(run_cli("map --fn sparsemax").exit_code == 2);  // missing --z
  CHECK(run_cli("map --fn sparsegen-lin --lambda 1.5 --z 1,2").exit_code ==
        2);
  CHECK(run_cli("map --fn sparsemax --lambda 0.5 --z 1,2").exit_code ==
        2);  // parameter not accepted by this mapping
  CHECK(run_cli("bench --sizes 10 --reps 0").exit_code == 2);
  CHECK(run_cli("gradcheck --fn hardmax --trials 10").exit_code == 2);
  CHECK(run_cli("frobnicate").exit_code == 2);
}

TEST_CASE("grid: row count, frozen cells, and domain-error cells") {
  const fs::path dir = fresh_dir("sg_cli_grid");
  const std::string out = (dir / "grid.csv").string();

  auto result = run_cli(
      "grid --fn sparsemax --xmin 1.5 --xmax 2.5 --ymin 0.5 --ymax 1.5 "
      "--resolution 2 --out " + out);
  REQUIRE(result.exit_code == 0);
  auto lines = read_lines(out);
  REQUIRE(lines.size() == 5);  // resolution^2 + header
  CHECK(lines[0] == "z1,z2,p1,sparse");
  CHECK(lines[1] == "1.5,0.5,1,1");

  result = run_cli(
      "grid --fn softmax --xmin -2 --xmax 2 --ymin -2 --ymax 2 "
      "--resolution 4 --out " + out);
  REQUIRE(result.exit_code == 0);
  lines = read_lines(out);
  REQUIRE(lines.size() == 17);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    CHECK(lines[i].back() == '0');  // softmax has full support everywhere
  }

  result = run_cli(
      "grid --fn sum-normalization --xmin -1 --xmax 1 --ymin -1 --ymax 1 "
      "--resolution 3 --out " + out);
  REQUIRE(result.exit_code == 0);
  lines = read_lines(out);
  REQUIRE(lines.size() == 10);
  bool has_empty = false, has_value = false;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].substr(lines[i].size() - 2) == ",,") has_empty = true;
    if (lines[i].back() != ',') has_value = true;
  }
  CHECK(has_empty);  // negative-orthant cells are undefined
  CHECK(has_value);

  CHECK(run_cli("grid --fn sparsemax --resolution 1 --out " + out)
            .exit_code == 2);
  CHECK(run_cli("grid --fn sparsemax --xmin 2 --xmax -2 --out " + out)
            .exit_code == 2);
}

TEST_CASE("synth is deterministic and train/eval round-trip the files") {
  const fs::path a = fresh_dir("sg_cli_ds_a");
  const fs::path b = fresh_dir("sg_cli_ds_b");
  const std::string synth_flags =
      "synth --mu 2 --instances 200 --doc-length 150 --seed 42 --out ";
  REQUIRE(run_cli(synth_flags + a.string()).exit_code == 0);
  REQUIRE(run_cli(synth_flags + b.string()).exit_code == 0);
  for (const char* name : {"train.jsonl", "val.jsonl", "test.jsonl",
                           "manifest.json"}) {
    CHECK(slurp(a / name) == slurp(b / name));
  }
  CHECK(sparsegen::read_manifest((a / "manifest.json").string()).seed == 42);

  const std::string model = (a / "model.json").string();
  auto result = run_cli("train --loss sparsemax-hinge --epochs 10 --data " +
                        a.string() + " --out " + model);
  REQUIRE(result.exit_code == 0);
  CHECK(result.out.find("best epoch") != std::string::npos);

  const auto [loaded, config] = sparsegen::read_model_json(model);
  CHECK(config.loss.kind == sparsegen::LossKind::sparsemax_hinge);
  CHECK(loaded.W.rows() == 10);
  CHECK(loaded.W.cols() == 10);
  CHECK(loaded.W.allFinite());

  result = run_cli("eval --model " + model + " --data " + a.string() +
                   " --split test");
  REQUIRE(result.exit_code == 0);
  std::istringstream lines(result.out);
  std::string header, row;
  std::getline(lines, header);
  std::getline(lines, row);
  CHECK(header == sparsegen::kReportHeader);
  CHECK(row.rfind("eval,sparsemax-hinge,0,", 0) == 0);
  std::istringstream fields(row.substr(row.find("0,") + 2));
  double f1 = -1;
  fields >> f1;
  CHECK(f1 >= 0.0);
  CHECK(f1 <= 1.0);

  CHECK(run_cli("eval --model " + model + " --data " + a.string() +
                " --split bogus").exit_code == 2);
  CHECK(run_cli("train --loss sparsemax-hinge --data /nonexistent --out " +
                model).exit_code == 2);
}

TEST_CASE("experiment writes the report contract") {
  const fs::path dir = fresh_dir("sg_cli_exp");
  const std::string out = (dir / "report.csv").string();
  auto result = run_cli(
      "experiment --setting mean-labels --sweep 2 "
      "--arms sparsemax-hinge,sparsehg-hinge --instances 200 "
      "--doc-length 150 --epochs 6 --seed 3 --out " + out);
  REQUIRE(result.exit_code == 0);
  const auto lines = read_lines(out);
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == sparsegen::kReportHeader);
  CHECK(lines[1].rfind("mean-labels,sparsemax-hinge,2,", 0) == 0);
  CHECK(lines[2].rfind("mean-labels,sparsehg-hinge,2,", 0) == 0);
}

TEST_CASE("bench and gradcheck succeed at small sizes") {
  auto result = run_cli("bench --sizes 10,500 --reps 3");
  REQUIRE(result.exit_code == 0);
  CHECK(result.out.rfind("K,sort_ms,pivot_ms,ratio\n", 0) == 0);

  result = run_cli("gradcheck --fn sparsemax --trials 50 --seed 1");
  REQUIRE(result.exit_code == 0);
  CHECK(result.out.find("PASS") != std::string::npos);

  result = run_cli("gradcheck --fn sparsehourglass --q 1 --trials 50");
  REQUIRE(result.exit_code == 0);
  CHECK(result.out.find("PASS") != std::string::npos);
}
