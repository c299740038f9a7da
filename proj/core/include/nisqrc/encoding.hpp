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

#ifndef NISQRC_ENCODING_HPP
#define NISQRC_ENCODING_HPP

#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "nisqrc/linalg.hpp"

// Input-parameterized channels: the Ising Hamiltonian/Lindblad ansatz, the
// Trotterized circuit ansatz, the measure-reset channel, the no-reset
// measurement-decoherence superoperator, and the computational-basis POVM.

namespace nisqrc {

// Per-qubit decoherence rates.  Empty vectors mean "none".
struct DissipationSpec {
  RVec damping_rates;    // gamma_i = 1/T1_i
  RVec dephasing_rates;  // pure dephasing gamma_phi_i = 1/T_phi_i

  bool lossless() const {
    return (damping_rates.size() == 0 || damping_rates.isZero(0.0)) &&
           (dephasing_rates.size() == 0 || dephasing_rates.isZero(0.0));
  }
  static DissipationSpec none() { return {}; }
  static DissipationSpec uniform_t1(int qubits, double t1);

  // Throws on negative rates or size mismatch with `qubits`.
  void check(int qubits) const;
};

struct HamiltonianHyper {
  double j_max = 1.0;
  double eta_x = 2.0;
  double eps_x_rms = 2.0;
  double eta_z = 0.5;
  double eps_z_rms = 0.5;
};

// Ising encoding H(u) = H0 + u*H1 with
//   H0 = sum_<i,i'> J_{ii'} sz_i sz_i' + sum_i eta^x_i sx_i,
//   H1 = sum_i eta^z_i sz_i.
// Parameters are drawn once from `seed` and then fixed for all inputs.
struct HamiltonianAnsatz {
  int mem_qubits = 1;
  int readout_qubits = 1;
  double tau = 1.0;
  std::vector<std::pair<int, int>> edges;
  HamiltonianHyper hyper;
  std::uint64_t seed = 0;

  // Drawn values: couplings[e] ~ Unif[0, j_max] per edge;
  // field_x[i] = eta_x + N(0, eps_x_rms^2); drive_z[i] = eta_z + N(0, eps_z_rms^2).
  RVec couplings;
  RVec field_x;
  RVec drive_z;

  int qubits() const { return mem_qubits + readout_qubits; }
};

HamiltonianAnsatz draw_hamiltonian_ansatz(int mem_qubits, int readout_qubits,
                                          double tau,
                                          std::vector<std::pair<int, int>> edges,
                                          const HamiltonianHyper& hyper,
                                          std::uint64_t seed);

// (H0, H1); both Hermitian, H1 diagonal.  Throws on invalid edge indices.
std::pair<CMat, CMat> build_ising_hamiltonians(const HamiltonianAnsatz& ansatz);

// Dense superoperator of
//   L(u) rho = -i[H0 + u H1, rho] + sum_i gamma_i D[sm_i] rho
//              + sum_i gphi_i D[sz_i] rho.
CMat build_liouvillian(const CMat& h0, const CMat& h1, double u,
                       const DissipationSpec& diss);

// exp(tau * L(u)) as a dense superoperator.  Intended for small systems;
// use HamiltonianFamily::apply for the large ones.
CMat hamiltonian_channel(const CMat& h0, const CMat& h1, double u,
                         const DissipationSpec& diss, double tau);

// L(u) applied to an arbitrary matrix (the dissipators are applied through
// their index structure, not as superoperator GEMMs).
CMat apply_liouvillian(const CMat& h, const DissipationSpec& diss, const CMat& x);

// exp(t * D) for the pure-dissipation generator: per-qubit amplitude damping
// with p = 1 - exp(-gamma_i t) composed with dephasing of the off-diagonal
// blocks.  Exact (the two single-qubit generators commute).
CMat apply_pure_dissipation(const CMat& x, const DissipationSpec& diss, double t);

// Trotterized circuit encoding
//   U(u) = ( W(J) Rz(theta^z + theta^I u) Rx(theta^x) )^{n_T},
// with W(J) = prod_<i,i'> exp(-i (J tau / n_T) sz_i sz_i') over chain
// neighbours.  Angles are drawn from [a, a + delta] with
// a = (tau/n_T) theta_min, delta = (tau/n_T) delta_theta.
struct CircuitHyper {
  double theta_x_min = 1.0, theta_z_min = 0.5, theta_i_min = 0.1;
  double delta_theta_x = 1.0, delta_theta_z = 0.5, delta_theta_i = 0.1;
  double coupling = 1.0;  // J
  int trotter_steps = 3;  // n_T
};

struct CircuitAnsatz {
  int mem_qubits = 1;
  int readout_qubits = 1;
  double tau = 1.0;
  CircuitHyper hyper;
  std::vector<int> chain;                  // qubit index per chain position
  std::vector<std::pair<int, int>> edges;  // coupled chain neighbours
  std::uint64_t seed = 0;

  RVec theta_x, theta_z, theta_i;  // drawn per qubit

  int qubits() const { return mem_qubits + readout_qubits; }
};

// Default chain alternates readout and memory qubits (r0 m0 r1 m1 ...), the
// layout used on linear-connectivity devices.
std::vector<int> alternating_chain(int mem_qubits, int readout_qubits);

CircuitAnsatz draw_circuit_ansatz(int mem_qubits, int readout_qubits, double tau,
                                  const CircuitHyper& hyper,
                                  std::vector<int> chain, std::uint64_t seed);

// The encoding unitary for one step; unitary within 1e-11 by construction.
CMat build_circuit_unitary(const CircuitAnsatz& ansatz, double u);

// Unitary conjugation superoperator, composed with per-qubit amplitude
// damping (probability 1 - exp(-tau/T1)) and optional dephasing applied
// after the unitary block when `diss` is non-trivial.
CMat circuit_channel(const CircuitAnsatz& ansatz, double u,
                     const DissipationSpec& diss = {});

// rho -> Tr_R(rho) (x) |0><0|^R as a dense superoperator (trace preserving,
// idempotent).  Kraus form: K_j = I^M (x) |b_0><b_j|.
CMat measure_reset_channel(int mem_qubits, int readout_qubits);

// Measurement-induced decoherence without reset: zeroes every element whose
// row/column readout bitstrings differ.  Unital, diagonal as a superoperator.
CMat no_reset_measurement_superop(int mem_qubits, int readout_qubits);

// The same map applied directly to a matrix.
CMat apply_measurement_mask(const CMat& rho, int mem_qubits, int readout_qubits);

// Computational-basis POVM: M_j = I^M (x) |b_j><b_j|, j = 0..2^R-1.
std::vector<CMat> povm_operators(int mem_qubits, int readout_qubits);

// x_j = Tr(M_j rho) for all j at once (reads the diagonal).
RVec povm_probabilities(const CMat& rho_full, int mem_qubits, int readout_qubits);

// ---------------------------------------------------------------------------
// Channel families: u -> CPTP map, evaluated as an action on matrices.

class ChannelFamily {
 public:
  virtual ~ChannelFamily() = default;

  virtual int qubits() const = 0;

  // Per-u preparation shared by batched applications.
  class Prepared {
   public:
    virtual ~Prepared() = default;
    virtual CMat apply(const CMat& x) const = 0;
  };
  virtual std::unique_ptr<Prepared> prepare(double u) const = 0;

  CMat apply(double u, const CMat& x) const { return prepare(u)->apply(x); }

  // Dense superoperator via application to all basis matrices.  O(4^L)
  // channel applications; fine for small systems and tests.
  CMat superoperator(double u) const;
};

// Continuous Lindblad evolution for duration tau.  Lossless inputs take the
// exact unitary-conjugation path (Hermitian eigendecomposition); dissipative
// inputs use a scaled Taylor action of the Liouvillian with tolerance ~1e-13.
class HamiltonianFamily : public ChannelFamily {
 public:
  HamiltonianFamily(HamiltonianAnsatz ansatz, DissipationSpec diss,
                    double idle_delay = 0.0);

  int qubits() const override { return ansatz_.qubits(); }
  const HamiltonianAnsatz& ansatz() const { return ansatz_; }
  const DissipationSpec& dissipation() const { return diss_; }

  std::unique_ptr<Prepared> prepare(double u) const override;

 private:
  HamiltonianAnsatz ansatz_;
  DissipationSpec diss_;
  double idle_delay_;
  CMat h0_, h1_;
  double h0_norm_, h1_norm_;  // spectral norms, for the Taylor scaling
};

// One Trotterized circuit step, with optional per-step losses.
class CircuitFamily : public ChannelFamily {
 public:
  CircuitFamily(CircuitAnsatz ansatz, DissipationSpec diss = {},
                double idle_delay = 0.0);

  int qubits() const override { return ansatz_.qubits(); }
  const CircuitAnsatz& ansatz() const { return ansatz_; }
  const DissipationSpec& dissipation() const { return diss_; }

  std::unique_ptr<Prepared> prepare(double u) const override;

 private:
  CircuitAnsatz ansatz_;
  DissipationSpec diss_;
  double idle_delay_;
};

// Connectivity helpers.
std::vector<std::pair<int, int>> all_to_all_edges(int qubits);
std::vector<std::pair<int, int>> chain_edges(const std::vector<int>& chain);
// Two disconnected all-to-all blocks, each with half the memory and half the
// readout qubits (M and R must be even).
std::vector<std::pair<int, int>> split_edges(int mem_qubits, int readout_qubits);

}  // namespace nisqrc

#endif  // NISQRC_ENCODING_HPP
