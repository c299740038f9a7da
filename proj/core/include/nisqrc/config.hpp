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

#ifndef NISQRC_CONFIG_HPP
#define NISQRC_CONFIG_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "nisqrc/encoding.hpp"

// Experiment configuration: a JSON file with a strict schema (unknown keys
// are rejected).  Every run is a pure function of (config, master seed).
// The full schema with defaults is documented in the README.

namespace nisqrc {

struct ExperimentConfig {
  enum class AnsatzKind { hamiltonian, circuit };

  // ansatz
  AnsatzKind kind = AnsatzKind::hamiltonian;
  int mem_qubits = 2;
  int readout_qubits = 4;
  double tau = 1.0;
  std::string connectivity = "full";  // full | chain | split | explicit
  std::vector<std::pair<int, int>> explicit_edges;
  std::uint64_t ansatz_seed = 1;
  HamiltonianHyper hyper;
  CircuitHyper circuit_hyper;

  // dissipation ("inf" in JSON -> infinity here)
  double t1 = std::numeric_limits<double>::infinity();
  double t_phi = std::numeric_limits<double>::infinity();
  std::vector<double> t1_list;     // per-qubit override
  std::vector<double> t_phi_list;

  bool reset = true;
  double idle_delay = 0.0;
  int quantize_u = 0;   // 0 = off, else grid points
  int washout = -1;     // -1 = auto (10 ceil(n_M); 50 for no-reset)

  struct Task {
    double snr_db = 20.0;
    int train_messages = 100;
    int train_length = 100;
    int test_messages = 8;
    int test_length = 100;
    double l2 = 1e-6;
    double tol = 1e-8;
  } task;

  long long shots = 0;  // 0 = infinite ("inf" sentinel in JSON)

  struct Expansion {
    int k_max = 8;
    double tolerance = 1e-9;
  } expansion;

  int kernel_n_max = -1;  // -1 = auto: ceil(5 n_M) capped at 64

  struct Jacobian {
    double eps = 1e-3;
    double sv_threshold = 1e-6;
    int max_lag = -1;
  } jacobian;

  struct Sweep {
    std::vector<double> tau;
    std::vector<double> t1;
    std::vector<long long> shots;      // 0 = infinite
    std::vector<int> test_length;
    std::vector<std::string> variants;  // connected | split | no_reset
  } sweep;

  std::uint64_t master_seed = 1;

  int qubits() const { return mem_qubits + readout_qubits; }
};

ExperimentConfig parse_config_string(const std::string& json_text);
ExperimentConfig parse_config_file(const std::string& path);

// Per-qubit dissipation for this config; overrides replace the scalar T1.
DissipationSpec make_dissipation(const ExperimentConfig& config,
                                 double t1_override = -1.0);

// The configured channel family.  `variant` may override connectivity
// ("connected"/"split"); tau/T1 overrides serve sweep points (negative =
// use the config value).
std::unique_ptr<ChannelFamily> make_family(const ExperimentConfig& config,
                                           const std::string& variant = "",
                                           double tau_override = -1.0,
                                           double t1_override = -1.0);

std::vector<std::pair<int, int>> resolve_edges(const ExperimentConfig& config,
                                               const std::string& variant = "");

}  // namespace nisqrc

#endif  // NISQRC_CONFIG_HPP
