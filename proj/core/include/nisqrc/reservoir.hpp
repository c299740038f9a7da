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

#ifndef NISQRC_RESERVOIR_HPP
#define NISQRC_RESERVOIR_HPP

#include <cstdint>
#include <optional>
#include <tuple>
#include <ostream>
#include <vector>

#include "nisqrc/encoding.hpp"
#include "nisqrc/linalg.hpp"

// The measured-and-reset reservoir pipeline: effective density-matrix
// recursion, expected features, the no-reset variant, finite-shot sampling,
// and the probability <-> moment transform.

namespace nisqrc {

struct FeatureSeries {
  int length = 0;        // N
  int num_features = 0;  // K = 2^R
  RMat probabilities;    // N x K, rows are distributions
  RMat samples;          // N x K empirical frequencies; empty if not sampled
  long long shots = 0;   // S; 0 means expected features only

  bool has_samples() const { return samples.size() != 0; }
};

// Single-step memory map C(u): rho^M -> Tr_R( U(u) (rho^M (x) |0><0|^R) ).
// From a dense full-space superoperator (small systems) ...
CMat memory_step_map(const CMat& channel_superop, int mem_qubits, int readout_qubits);
// ... or column-by-column through the channel action (any size).
CMat memory_step_matrix(const ChannelFamily& family, double u, int mem_qubits,
                        int readout_qubits);

struct RunOptions {
  bool validate = true;          // density-matrix checks on every state
  double herm_tol = 1e-8;        // abort thresholds (looser than the
  double trace_tol = 1e-8;       // construction tolerances; accumulated
  double psd_tol = 1e-8;         // roundoff over long runs is expected)
};

// Expected features of the measure-reset pipeline.  rho_m0 empty selects
// the ground state.  Inputs must lie in [-1, 1].  `memory_states`, when
// given, receives the post-reset memory state after every step.
FeatureSeries run_expected_features(const ChannelFamily& family, int mem_qubits,
                                    int readout_qubits, const RVec& inputs,
                                    const CMat& rho_m0 = {},
                                    const RunOptions& opts = {},
                                    std::vector<CMat>* memory_states = nullptr);

// The no-reset variant: the measurement-decoherence mask replaces the reset
// between steps.  rho0 is a full-system state (ground if empty);
// `full_states` receives the pre-measurement state of every step.
FeatureSeries run_no_reset_features(const ChannelFamily& family, int mem_qubits,
                                    int readout_qubits, const RVec& inputs,
                                    const CMat& rho0 = {},
                                    const RunOptions& opts = {},
                                    std::vector<CMat>* full_states = nullptr);

// Pre-tabulated channel grid: `points` Chebyshev-spaced u values on [-1, 1]
// with nearest lookup.  Trades ~1e-6 feature error for a large speedup when
// the same family is applied at many input values.
class QuantizedPipeline {
 public:
  QuantizedPipeline(const ChannelFamily& family, int mem_qubits,
                    int readout_qubits, int points = 257);

  FeatureSeries run(const RVec& inputs, const CMat& rho_m0 = {},
                    const RunOptions& opts = {},
                    std::vector<CMat>* memory_states = nullptr) const;

  int nearest_index(double u) const;
  std::tuple<int, int, double> bracket(double u) const;
  int points() const { return static_cast<int>(grid_.size()); }

 private:
  int mem_qubits_, readout_qubits_;
  std::vector<double> grid_;
  std::vector<CMat> step_;      // 4^M-side memory maps per grid point
  std::vector<CMat> feature_;   // K x 4^M: x = Re(feature * vec(rho^M))
};

// Empirical frequencies of S i.i.d. categorical draws per time step
// (sequential conditional binomials; marginally identical to S independent
// shots).  Throws on rows that are not valid distributions.
FeatureSeries sample_features(const FeatureSeries& expected, long long shots,
                              std::uint64_t seed);

// Walsh-Hadamard matrix H[a,b] = (-1)^popcount(a & b), K x K.
RMat walsh_hadamard_matrix(int num_features);

// Probability -> moment representation (rows transformed by H) and back.
FeatureSeries probability_to_moment(const FeatureSeries& probs);
FeatureSeries moment_to_probability(const FeatureSeries& moments);

// CSV serialization: columns n, j, x, xbar, shots.
void write_feature_csv(std::ostream& os, const FeatureSeries& series);

}  // namespace nisqrc

#endif  // NISQRC_RESERVOIR_HPP
