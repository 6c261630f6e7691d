// Copyright 2026 The gwa Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// End-to-end tests of the gwa binary: every emitted JSON document must
// validate against its schema under schemas/, outputs must replay
// byte-identically for a fixed seed, and exit codes must follow the contract.

#include <catch2/catch_amalgamated.hpp>

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string out;
};

CliResult run_cli(const std::string& args) {
  const std::string command = std::string(GWA_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CliResult result;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) result.out.append(buf, n);
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

json load_schema(const std::string& name) {
  const fs::path path = fs::path(GWA_SCHEMA_DIR) / name;
  std::ifstream in(path);
  REQUIRE(in.good());
  return json::parse(in);
}

bool type_matches(const json& value, const std::string& type) {
  if (type == "object") return value.is_object();
  if (type == "array") return value.is_array();
  if (type == "string") return value.is_string();
  if (type == "boolean") return value.is_boolean();
  if (type == "null") return value.is_null();
  if (type == "integer") return value.is_number_integer() || value.is_number_unsigned();
  if (type == "number") return value.is_number();
  return false;
}

// Checks the subset of JSON Schema the shipped schemas use: type (single or
// union), enum, minimum, required, properties, items.
bool validate(const json& schema, const json& value, std::string& err,
              const std::string& where = "$") {
  if (schema.contains("type")) {
    const json& type = schema["type"];
    bool ok = false;
    if (type.is_string()) {
      ok = type_matches(value, type.get<std::string>());
    } else {
      for (const auto& t : type) ok = ok || type_matches(value, t.get<std::string>());
    }
    if (!ok) {
      err = where + ": type mismatch";
      return false;
    }
    if (value.is_null()) return true;  // nothing left to check for nulls
  }
  if (schema.contains("enum")) {
    bool ok = false;
    for (const auto& allowed : schema["enum"]) ok = ok || allowed == value;
    if (!ok) {
      err = where + ": not in enum";
      return false;
    }
  }
  if (schema.contains("minimum") && value.is_number()) {
    if (value.get<double>() < schema["minimum"].get<double>()) {
      err = where + ": below minimum";
      return false;
    }
  }
  if (schema.contains("required") && value.is_object()) {
    for (const auto& key : schema["required"]) {
      if (!value.contains(key.get<std::string>())) {
        err = where + ": missing required key " + key.get<std::string>();
        return false;
      }
    }
  }
  if (schema.contains("properties") && value.is_object()) {
    for (const auto& [key, sub] : schema["properties"].items()) {
      if (value.contains(key) && !validate(sub, value[key], err, where + "." + key)) return false;
    }
  }
  if (schema.contains("items") && value.is_array()) {
    int i = 0;
    for (const auto& element : value) {
      if (!validate(schema["items"], element, err, where + "[" + std::to_string(i++) + "]")) {
        return false;
      }
    }
  }
  return true;
}

void check_against_schema(const std::string& schema_name, const json& doc) {
  std::string err;
  const bool ok = validate(load_schema(schema_name), doc, err);
  INFO(err);
  REQUIRE(ok);
}

fs::path temp_file(const std::string& name) {
  return fs::temp_directory_path() / ("gwa_test_" + name);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("mask subcommand emits a valid, deterministic document") {
  const std::string args = "mask --seed 0 --units-h 7 --units-w 7 --ratio 0.75 --unit-span 8";
  const CliResult first = run_cli(args);
  REQUIRE(first.exit_code == 0);
  const json doc = json::parse(first.out);
  check_against_schema("mask.schema.json", doc);
  CHECK(doc["hidden_units"] == 36);
  CHECK(doc["visible_units"] == 13);
  CHECK(doc["visible"].size() == 49);
  CHECK(doc["tokens"]["visible_tokens"] == 13 * 64);

  const CliResult second = run_cli(args);
  CHECK(second.out == first.out);  // byte-identical replay
}

TEST_CASE("mask subcommand renders an ascii preview") {
  const CliResult result = run_cli("mask --seed 3 --units-h 4 --units-w 6 --ratio 0.5 --format ascii");
  REQUIRE(result.exit_code == 0);
  int grid_lines = 0;
  std::istringstream stream(result.out);
  for (std::string line; std::getline(stream, line);) {
    if (!line.empty() && line.find_first_not_of(".#") == std::string::npos) ++grid_lines;
  }
  CHECK(grid_lines == 4);
}

TEST_CASE("windows subcommand reports per-window counts") {
  const CliResult result =
      run_cli("windows --tokens-h 56 --tokens-w 56 --window 7 --ratio 0 --seed 0");
  REQUIRE(result.exit_code == 0);
  const json doc = json::parse(result.out);
  check_against_schema("windows.schema.json", doc);
  CHECK(doc["num_windows"] == 64);
  CHECK(doc["total_visible"] == 56 * 56);
  for (const auto& c : doc["counts"]) CHECK(c == 49);
}

TEST_CASE("windows subcommand handles shifted tilings") {
  const CliResult result =
      run_cli("windows --tokens-h 8 --tokens-w 8 --window 4 --shift 2,2 --ratio 0 --seed 0");
  REQUIRE(result.exit_code == 0);
  const json doc = json::parse(result.out);
  check_against_schema("windows.schema.json", doc);
  CHECK(doc["num_windows"] == 9);
  CHECK(doc["counts"] == json({4, 8, 4, 8, 16, 8, 4, 8, 4}));
}

TEST_CASE("group subcommand partitions explicit sizes at a fixed capacity") {
  const CliResult result = run_cli("group --sizes 7,3,5,6,3 --channels 8 --gs 12");
  REQUIRE(result.exit_code == 0);
  const json doc = json::parse(result.out);
  check_against_schema("group.schema.json", doc);
  CHECK(doc["plan"]["num_groups"] == 2);
  CHECK(doc["plan"]["groups"] == json({{0, 2}, {1, 3, 4}}));
  CHECK(doc["plan"]["padding"] == json({0, 0}));
  CHECK(doc["report"].is_null());
}

TEST_CASE("group subcommand sweeps and writes the CSV dump") {
  const fs::path csv = temp_file("group_sweep.csv");
  const CliResult result =
      run_cli("group --sizes 7,3,5,6,3 --channels 8 --csv " + csv.string());
  REQUIRE(result.exit_code == 0);
  const json doc = json::parse(result.out);
  check_against_schema("group.schema.json", doc);
  CHECK(doc["report"]["candidates"].size() == 24 - 7 + 1);

  const std::string content = slurp(csv);
  CHECK(content.rfind("g_s,n_g,flops\n", 0) == 0);
  fs::remove(csv);
}

TEST_CASE("group subcommand derives sizes from mask and geometry flags") {
  const CliResult result = run_cli(
      "group --tokens-h 28 --tokens-w 28 --window 7 --unit-span 4 --ratio 0.75 --seed 0 "
      "--channels 256");
  REQUIRE(result.exit_code == 0);
  const json doc = json::parse(result.out);
  check_against_schema("group.schema.json", doc);
  CHECK(doc["config"]["sizes_given"] == false);
  CHECK(doc["plan"]["group_size"] == 52);
  CHECK(doc["plan"]["cost_flops"] == 60063744);
}

TEST_CASE("verify subcommand passes on default stages") {
  const CliResult result = run_cli("verify --stage 3 --ratio 0.75 --seed 0");
  REQUIRE(result.exit_code == 0);
  const json doc = json::parse(result.out);
  check_against_schema("verify.schema.json", doc);
  CHECK(doc["pass"] == true);
  CHECK(doc["max_rel_error"].get<double>() <= 1e-9);
}

TEST_CASE("verify subcommand handles shifted windows") {
  const CliResult result = run_cli("verify --stage 4 --ratio 0.5 --seed 7 --shift 3,3 --channels 64");
  REQUIRE(result.exit_code == 0);
  const json doc = json::parse(result.out);
  CHECK(doc["pass"] == true);
}

TEST_CASE("simulate subcommand flags the single-window stage and writes CSV") {
  const fs::path csv = temp_file("sim_stage4.csv");
  const std::string args = "simulate --stage 4 --ratio 0.75 --trials 5 --seed 1 --out " + csv.string();
  const CliResult result = run_cli(args);
  REQUIRE(result.exit_code == 0);
  const json doc = json::parse(result.out);
  check_against_schema("simulate.schema.json", doc);
  REQUIRE(doc["stages"].size() == 1);
  CHECK(doc["stages"][0]["single_window"] == true);
  CHECK(doc["stages"][0]["note"].get<std::string>().find("grouping unnecessary") != std::string::npos);

  const std::string content = slurp(csv);
  CHECK(content.rfind("g_s,mean_flops,std_flops,trials_valid\n", 0) == 0);

  const CliResult again = run_cli(args);
  CHECK(again.out == result.out);
  CHECK(slurp(csv) == content);  // CSV is deterministic too
  fs::remove(csv);
}

TEST_CASE("version and machine-readable help are available") {
  const CliResult version = run_cli("--version");
  REQUIRE(version.exit_code == 0);
  CHECK(version.out.find("0.1.0") != std::string::npos);

  const CliResult help = run_cli("--help-json");
  REQUIRE(help.exit_code == 0);
  const json doc = json::parse(help.out);
  CHECK(doc["subcommands"].size() == 5);
}

TEST_CASE("invalid flag values exit nonzero with a diagnostic") {
  CHECK(run_cli("mask --ratio 1.5").exit_code == 2);
  CHECK(run_cli("mask --no-such-flag").exit_code != 0);
  CHECK(run_cli("group --sizes 7,3 --gs 5").exit_code == 2);  // capacity below max
  CHECK(run_cli("group --sizes 7,3 --gs 8 --csv /tmp/x.csv").exit_code == 2);  // no sweep to dump
  CHECK(run_cli("windows --tokens-h 55 --tokens-w 56 --window 7").exit_code == 2);
}
