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

#ifndef NISQRC_LINALG_HPP
#define NISQRC_LINALG_HPP

#include <Eigen/Dense>
#include <complex>
#include <vector>

// Dense complex linear-algebra substrate shared by the whole library.
//
// Conventions (fixed globally, asserted by tests):
//  * Tensor order: qubit 0 is the most significant factor; for a split
//    (M memory + R readout) system the memory qubits are qubits 0..M-1,
//    so a full basis index decomposes as  i = m * 2^R + r.
//  * Vectorization is column-stacking: vec(rho)[j*d + i] = rho(i, j),
//    hence vec(A rho B) = (B^T (x) A) vec(rho).  Superoperators are
//    4^q-side matrices acting on such vectors.

namespace nisqrc {

using Complex = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

// Single-qubit constants.
CMat pauli_x();
CMat pauli_y();
CMat pauli_z();
CMat sigma_minus();  // |0><1|

// Kronecker product with a's indices most significant.
CMat tensor_product(const CMat& a, const CMat& b);

// Column-stacking vectorization and its inverse.  devectorize throws if the
// length is not a perfect square.
CVec vectorize(const CMat& rho);
CMat devectorize(const CVec& v);

// Superoperator of rho -> A rho B^dagger, i.e. conj(B) (x) A.
CMat sandwich_superop(const CMat& a, const CMat& b);

// Trace over the R least-significant (readout) qubits of a 2^(M+R)-side
// matrix, returning the 2^M-side memory block.
CMat partial_trace_readout(const CMat& rho, int mem_qubits, int readout_qubits);

// rho^M (x) |0><0|^(x)R.
CMat embed_with_readout_ground(const CMat& rho_m, int readout_qubits);

// The same two maps as superoperator-level matrices acting on vectorized
// states: 4^M x 4^L and 4^L x 4^M respectively (L = M + R).
CMat vec_partial_trace_map(int mem_qubits, int readout_qubits);
CMat vec_embed_ground_map(int mem_qubits, int readout_qubits);

// Embed a single-qubit operator at tensor position `qubit` of `total` qubits.
CMat embed_one_qubit(const CMat& op, int qubit, int total);

// exp(A) by scaling-and-squaring with Pade approximants.  Throws on
// non-finite input.
CMat matrix_exponential(const CMat& a);

struct EigResult {
  CVec values;       // sorted by descending |lambda|; ties by Re, then Im
  CMat vectors;      // columns, same order
  double max_residual = 0.0;  // max_i ||A v_i - lambda_i v_i|| / ||A||_F
};

// General (non-Hermitian) eigendecomposition.  Throws if the QR iteration
// fails to converge; a large residual signals a defective matrix.
EigResult general_eig(const CMat& a);

struct DensityDiagnostics {
  double hermiticity_defect = 0.0;  // ||rho - rho^dagger||_F
  double trace_defect = 0.0;        // |Tr(rho) - 1|
  double min_eigenvalue = 0.0;

  bool ok(double herm_tol = 1e-10, double trace_tol = 1e-10,
          double psd_tol = 1e-9) const {
    return hermiticity_defect < herm_tol && trace_defect < trace_tol &&
           min_eigenvalue >= -psd_tol;
  }
};

DensityDiagnostics validate_density_matrix(const CMat& rho);

// True if `superop` preserves the trace of every input within `tol`
// (checked exactly through the trace functional, not by sampling).
bool is_trace_preserving(const CMat& superop, double tol = 1e-9);

inline int dim_for_qubits(int qubits) { return 1 << qubits; }

// Throws unless `m` is square with side 2^qubits.
void require_qubit_dim(const CMat& m, int qubits, const char* what);

}  // namespace nisqrc

#endif  // NISQRC_LINALG_HPP
