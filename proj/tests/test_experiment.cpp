// Copyright 2026 The nisqrc authors
//
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

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "nisqrc/experiment.hpp"

using namespace nisqrc;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "nisqrc_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Small (1+1) reservoir so command-level tests stay fast.
ExperimentConfig tiny_config() {
  return parse_config_string(R"({
    "ansatz": {"memory_qubits": 1, "readout_qubits": 1, "tau": 1.0, "seed": 3,
                "hyper": {"j_max": 1.0, "eta_x": 1.0, "eps_x_rms": 1.0,
                           "eta_z": 0.5, "eps_z_rms": 0.5}},
    "task": {"train_messages": 6, "train_length": 24,
              "test_messages": 2, "test_length": 24},
    "expansion": {"k_max": 20},
    "seed": 11
  })");
}

}  // namespace

TEST_SUITE_BEGIN("experiment");

TEST_CASE("washout policy") {
  ExperimentConfig c = parse_config_string("{}");
  CHECK(washout_steps(c, 3.2, true) == 40);
  CHECK(washout_steps(c, 0.05, true) == 10);   // floor
  CHECK(washout_steps(c, 1e9, true) == 400);   // cap
  CHECK(washout_steps(c, std::numeric_limits<double>::infinity(), true) == 400);
  CHECK(washout_steps(c, 3.2, false) == 50);   // no-reset default
  c.washout = 7;
  CHECK(washout_steps(c, 3.2, true) == 7);
}

TEST_CASE("spectrum command: sweeps, shapes, determinism") {
  CommandContext ctx;
  ctx.config = tiny_config();
  ctx.config.sweep.tau = {0.2, 0.45, 1.0, 2.2, 5.0, 0.1, 0.3, 0.7, 1.5, 3.0};
  auto dir = fresh_dir("spectrum");
  ctx.out_dir = dir.string();
  cmd_spectrum(ctx);

  const std::string csv = slurp(dir / "nm_sweep.csv");
  CHECK(csv.substr(0, 38) == "axis,value,n_m,abs_lambda2,degenerate\n");
  int lines = 0;
  for (char ch : csv) lines += ch == '\n';
  CHECK(lines == 11);  // header + 10 sweep rows

  auto rows = run_spectrum_sweep(ctx.config);
  REQUIRE(rows.size() == 10);
  for (const auto& row : rows) {
    CHECK(row.memory_time > 0.0);
    CHECK(std::abs(row.eigenvalues(0) - Complex(1, 0)) < 1e-9);
  }

  // Byte-identical re-run, also with more threads.
  auto dir2 = fresh_dir("spectrum2");
  ctx.out_dir = dir2.string();
  ctx.threads = 2;
  cmd_spectrum(ctx);
  CHECK(slurp(dir2 / "nm_sweep.csv") == csv);
  CHECK(slurp(dir2 / "spectrum.json") == slurp(dir / "spectrum.json"));
}

TEST_CASE("single-point spectrum has the unit eigenvalue") {
  CommandContext ctx;
  ctx.config = tiny_config();
  auto rows = run_spectrum_sweep(ctx.config);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].axis == "base");
  CHECK(std::abs(rows[0].eigenvalues(0) - Complex(1, 0)) < 1e-9);
}

TEST_CASE("kernels command in both reset modes") {
  CommandContext ctx;
  ctx.config = tiny_config();
  ctx.config.kernel_n_max = 6;
  auto dir = fresh_dir("kernels");
  ctx.out_dir = dir.string();
  cmd_kernels(ctx);
  const std::string csv = slurp(dir / "kernels.csv");
  CHECK(csv.substr(0, 26) == "feature,order,n1,n2,value\n");
  CHECK(csv.find("\n0,1,0,,") != std::string::npos);
  CHECK(csv.find("\n1,2,0,6,") != std::string::npos);

  // No-reset: every tabulated kernel is below 1e-10.
  ctx.config.reset = false;
  auto dir2 = fresh_dir("kernels_no_reset");
  ctx.out_dir = dir2.string();
  cmd_kernels(ctx);
  std::ifstream in(dir2 / "kernels.csv");
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    const auto comma = line.find_last_of(',');
    const double value = std::stod(line.substr(comma + 1));
    const bool zeroth = line.find(",0,,,") != std::string::npos;
    if (!zeroth) CHECK(std::abs(value) < 1e-10);
  }
}

TEST_CASE("ce command emits ordered deterministic results") {
  CommandContext ctx;
  ctx.config = tiny_config();
  ctx.config.sweep.shots = {0, 200};
  auto dir = fresh_dir("ce");
  ctx.out_dir = dir.string();
  cmd_ce(ctx);

  const std::string csv = slurp(dir / "results.csv");
  CHECK(csv.substr(0, 44) == "variant,shots,test_length,seed,split,error\n");
  CHECK(csv.find("rounding,") != std::string::npos);
  CHECK(csv.find("direct_inverse,") != std::string::npos);
  CHECK(csv.find("logistic_u,") != std::string::npos);
  CHECK(csv.find("connected,inf,") != std::string::npos);
  CHECK(csv.find("connected,200,") != std::string::npos);

  std::ifstream model_in(dir / "model.json");
  ReadoutModel model = read_model_json(model_in);
  CHECK(model.weights.rows() == 4);
  CHECK(model.weights.cols() == 3);  // K = 2 features + bias
  CHECK(model.u_scale > 0.0);

  // Re-run (with threads) is byte-identical.
  auto dir2 = fresh_dir("ce2");
  ctx.out_dir = dir2.string();
  ctx.threads = 2;
  cmd_ce(ctx);
  CHECK(slurp(dir2 / "results.csv") == csv);
  CHECK(slurp(dir2 / "model.json") == slurp(dir / "model.json"));
}

TEST_CASE("error rates carried by the rows are sane") {
  ExperimentConfig config = tiny_config();
  CEOutcome outcome = run_ce_experiment(config);
  for (const auto& row : outcome.rows) {
    CHECK(row.error >= 0.0);
    CHECK(row.error <= 1.0);
  }
  // Noiseless-ish direct inverse at SNR 20 beats rounding on the test split.
  double rounding = -1, inverse = -1;
  for (const auto& row : outcome.rows) {
    if (row.split != "test") continue;
    if (row.variant == "rounding") rounding = row.error;
    if (row.variant == "direct_inverse") inverse = row.error;
  }
  REQUIRE(rounding >= 0);
  REQUIRE(inverse >= 0);
  CHECK(inverse < rounding);
}

TEST_CASE("jacobian command and threshold robustness output") {
  CommandContext ctx;
  ctx.config = tiny_config();
  ctx.config.jacobian.max_lag = 6;
  auto dir = fresh_dir("jacobian");
  ctx.out_dir = dir.string();
  cmd_jacobian(ctx);
  const std::string json = slurp(dir / "rank_report.json");
  CHECK(json.find("\"rank\": 1") != std::string::npos);
  CHECK(json.find("rank_threshold_div_sqrt10") != std::string::npos);
  CHECK(slurp(dir / "singular_values.csv").substr(0, 12) == "index,value\n");
}

TEST_SUITE_END();
