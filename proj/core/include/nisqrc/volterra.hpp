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

#ifndef NISQRC_VOLTERRA_HPP
#define NISQRC_VOLTERRA_HPP

#include <cstdint>
#include <vector>

#include "nisqrc/encoding.hpp"
#include "nisqrc/linalg.hpp"

// Volterra analysis of the measured reservoir: input-power expansion of the
// step channel, spectral analysis of the null-input memory map, kernel
// tables to second order, internal features, cross-step memory modes, and
// the Jacobian rank of the readout features.

namespace nisqrc {

// Monomial expansion U(u) = sum_k u^k R_k of the step channel, fitted at
// Chebyshev nodes on [-1, 1].
//
// The full-space coefficients are stored through their action on embedded
// memory states, e_k = R_k o embed (4^L x 4^M matrices): that restriction is
// the only way R_k ever enters the pipeline, and the unrestricted 4^L-side
// matrices get large (268 MB each at L = 6).  `r_k` holds the unrestricted
// coefficients when build_full is requested (small systems, cross-checks).
struct UExpansion {
  int mem_qubits = 0;
  int readout_qubits = 0;
  int k_max = 0;
  std::vector<CMat> p_k;  // memory-space coefficients, 4^M-side
  std::vector<CMat> e_k;  // embedded-input output coefficients, 4^L x 4^M
  std::vector<CMat> r_k;  // optional full superoperators, 4^L-side
  double residual = 0.0;  // max relative reconstruction error, held-out nodes

  int qubits() const { return mem_qubits + readout_qubits; }
};

struct UExpansionOptions {
  int k_max = 8;
  double tolerance = 1e-9;  // residual above this is an error ...
  bool throw_on_residual = true;  // ... unless reporting-only is requested
  bool build_full = false;
};

UExpansion extract_u_expansion(const ChannelFamily& family, int mem_qubits,
                               int readout_qubits,
                               const UExpansionOptions& opts = {});

struct SpectralData {
  int mem_qubits = 0;
  CVec eigenvalues;                 // descending |lambda|, lambda_1 = 1
  std::vector<CMat> eigenmatrices;  // [0] = rho_FP (unit trace); others unit
                                    // Frobenius norm, largest entry made
                                    // real-positive
  CMat fixed_point;
  double memory_time = 0.0;  // n_M = -1 / ln|lambda_2|
  int d_eff = 0;             // ceil(n_M); diagnostic only
  bool degenerate_periphery = false;
  double eigenbasis_condition = 0.0;
  double max_residual = 0.0;
};

// Spectral problem of the null-input memory map P_0.  Throws if P_0 is not
// trace preserving or lambda_1 deviates from 1 beyond 1e-9.  A second
// eigenvalue on the unit circle flags a degenerate periphery (memory_time
// reported as infinity, kernel computation refused).
SpectralData spectral_analysis(const CMat& p0);

struct VolterraKernels {
  int n_max = 0;
  int num_features = 0;
  RVec h0;               // K
  RMat h1;               // K x (n_max + 1), n1 = 0..n_max
  std::vector<RMat> h2;  // per feature, (n_max+1)^2, filled for n1 <= n2
};

// Kernel tables from the four-branch formulas (P_0 powers applied by
// repeated multiplication).  `povm` is the measurement, e.g. povm_operators.
VolterraKernels volterra_kernels(const UExpansion& uexp, const SpectralData& spec,
                                 const std::vector<CMat>& povm, int n_max);

// Kernels of the no-reset construction (decoherence mask instead of reset
// between steps).  The carrier space is the full system, so everything is
// evaluated action-wise; the fixed point is found by power iteration.
VolterraKernels no_reset_kernels(const ChannelFamily& family, int mem_qubits,
                                 int readout_qubits, int n_max, int k_max = 8);

struct InternalFeatureSet {
  int k_max = 0;
  // c[k](alpha, alpha') expands P_k rho_alpha' in the eigenbasis of P_0;
  // index 0 is the fixed point, so c[k](0, .) vanishes for k >= 1.
  std::vector<CMat> c;
  RVec u_grid;
  CMat features;  // F_alpha(u), (4^M) x grid; row 0 identically zero
  CMat nu;        // K x 4^M measurement coefficients
  double eigenbasis_condition = 0.0;
};

InternalFeatureSet internal_features(const UExpansion& uexp,
                                     const SpectralData& spec,
                                     const RVec& u_grid,
                                     const std::vector<CMat>& povm);

// Response of feature j to a single input u placed p >= 1 steps in the past,
// reconstructed from the spectral representation:
//   sum_alpha nu_alpha^(j) lambda_alpha^(p-1) F_alpha(u).
RVec reconstruct_single_step_response(const InternalFeatureSet& internal,
                                      const SpectralData& spec, int p,
                                      int grid_index);

// Cross-step memory-mode coefficients for P past steps: the chain products
// c^(k_1)_{a1 a2} ... c^(k_P)_{aP, 1}.
struct CrossStepModes {
  int steps = 0;    // P
  int k_max = 0;
  int dim = 0;      // 4^M
  std::vector<Complex> values;  // alphas-major, then ks; see at()

  // alphas, ks are 0-based (alpha 0 = fixed point, k entry 0 = order 1).
  Complex at(const std::vector<int>& alphas, const std::vector<int>& ks) const;
};

CrossStepModes single_step_memory_decomposition(const InternalFeatureSet& internal,
                                                int steps);

struct JacobianOptions {
  double eps = 1e-3;           // central-difference step on u
  double sv_threshold = 1e-6;  // relative to the largest singular value
  int max_lag = -1;            // rows p = 0..max_lag; -1 picks max(3 n_M, 2K)
  int washout = -1;            // -1 picks 10 ceil(n_M) clamped to [20, 400]
  std::uint64_t seed = 77;     // base input sequence draw
};

struct JacobianReport {
  int rank = 0;
  RVec singular_values;
  double eps = 0.0;
  double sv_threshold = 0.0;
  int lags = 0;
};

// Numerical rank of the feature Jacobian d x_j(n) / d u_{n-p} (moment
// representation, constant feature removed) at a generic seeded base input.
JacobianReport jacobian_rank(const ChannelFamily& family, int mem_qubits,
                             int readout_qubits, const JacobianOptions& opts = {});

}  // namespace nisqrc

#endif  // NISQRC_VOLTERRA_HPP
