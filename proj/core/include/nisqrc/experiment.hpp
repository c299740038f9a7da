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

#ifndef NISQRC_EXPERIMENT_HPP
#define NISQRC_EXPERIMENT_HPP

#include <string>
#include <vector>

#include "nisqrc/config.hpp"
#include "nisqrc/readout.hpp"
#include "nisqrc/reservoir.hpp"
#include "nisqrc/volterra.hpp"

// Orchestration of the CLI commands.  Every command is a pure function of
// (config, master seed): re-runs produce byte-identical outputs, and sweep
// points may run concurrently without changing any emitted value.

namespace nisqrc {

struct CommandContext {
  ExperimentConfig config;
  std::string out_dir;
  int threads = 1;
};

// spectrum.json + nm_sweep.csv: eigenvalue clouds and n_M along the
// configured tau / T1 sweep axes.
void cmd_spectrum(const CommandContext& ctx);

// kernels.csv: h_0, h_1(n1), h_2(n1, n2) per measured feature.
void cmd_kernels(const CommandContext& ctx);

// results.csv + model.json: trained readout and train/test error for the
// reservoir and the three baselines at every sweep point.
void cmd_ce(const CommandContext& ctx);

// rank_report.json + singular_values.csv.
void cmd_jacobian(const CommandContext& ctx);

// ---------------------------------------------------------------------------
// Reusable pieces (also exercised directly by the test suites).

// Washout steps for this variant: the configured value, or 10 ceil(n_M)
// (50 for the no-reset variant, whose memory map has no small spectral gap
// to read a timescale from).
int washout_steps(const ExperimentConfig& config, double memory_time, bool reset);

struct CERow {
  std::string variant;
  long long shots = 0;  // 0 = infinite
  int test_length = 0;
  std::uint64_t seed = 0;
  std::string split;  // train | test
  double error = 0.0;
};

struct CEOutcome {
  std::vector<CERow> rows;
  ReadoutModel model;  // first reservoir point's trained readout
};

CEOutcome run_ce_experiment(const ExperimentConfig& config, int threads = 1);

void write_ce_csv(std::ostream& os, const std::vector<CERow>& rows);

struct SpectrumRow {
  std::string axis;  // "tau" | "t1" | "base"
  double value = 0.0;
  double memory_time = 0.0;
  double abs_lambda2 = 0.0;
  bool degenerate = false;
  CVec eigenvalues;
};

std::vector<SpectrumRow> run_spectrum_sweep(const ExperimentConfig& config,
                                            int threads = 1);

}  // namespace nisqrc

#endif  // NISQRC_EXPERIMENT_HPP
