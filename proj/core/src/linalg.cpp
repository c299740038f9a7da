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

#include "nisqrc/linalg.hpp"

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace nisqrc {

CMat pauli_x() {
  CMat m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

CMat pauli_y() {
  CMat m(2, 2);
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return m;
}

CMat pauli_z() {
  CMat m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

CMat sigma_minus() {
  CMat m = CMat::Zero(2, 2);
  m(0, 1) = 1;
  return m;
}

CMat tensor_product(const CMat& a, const CMat& b) {
  return Eigen::kroneckerProduct(a, b).eval();
}

CVec vectorize(const CMat& rho) {
  // Eigen stores column-major, so this is exactly column stacking.
  return Eigen::Map<const CVec>(rho.data(), rho.size());
}

CMat devectorize(const CVec& v) {
  const auto n = v.size();
  const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(double(n))));
  if (d * d != n)
    throw std::invalid_argument("devectorize: length " + std::to_string(n) +
                                " is not a perfect square");
  return Eigen::Map<const CMat>(v.data(), d, d);
}

CMat sandwich_superop(const CMat& a, const CMat& b) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows())
    throw std::invalid_argument("sandwich_superop: operands must be square and equal-sized");
  return tensor_product(b.conjugate(), a);
}

CMat partial_trace_readout(const CMat& rho, int mem_qubits, int readout_qubits) {
  const int dm = dim_for_qubits(mem_qubits);
  const int dr = dim_for_qubits(readout_qubits);
  if (rho.rows() != rho.cols() || rho.rows() != Eigen::Index(dm) * dr)
    throw std::invalid_argument("partial_trace_readout: matrix side does not match (M,R)");
  CMat out = CMat::Zero(dm, dm);
  for (int m = 0; m < dm; ++m)
    for (int mp = 0; mp < dm; ++mp) {
      Complex s = 0;
      for (int r = 0; r < dr; ++r) s += rho(m * dr + r, mp * dr + r);
      out(m, mp) = s;
    }
  return out;
}

CMat embed_with_readout_ground(const CMat& rho_m, int readout_qubits) {
  const int dm = static_cast<int>(rho_m.rows());
  const int dr = dim_for_qubits(readout_qubits);
  CMat out = CMat::Zero(Eigen::Index(dm) * dr, Eigen::Index(dm) * dr);
  for (int m = 0; m < dm; ++m)
    for (int mp = 0; mp < dm; ++mp) out(m * dr, mp * dr) = rho_m(m, mp);
  return out;
}

CMat vec_partial_trace_map(int mem_qubits, int readout_qubits) {
  const int dm = dim_for_qubits(mem_qubits);
  const int dr = dim_for_qubits(readout_qubits);
  const int dl = dm * dr;
  CMat map = CMat::Zero(Eigen::Index(dm) * dm, Eigen::Index(dl) * dl);
  for (int m = 0; m < dm; ++m)
    for (int mp = 0; mp < dm; ++mp)
      for (int r = 0; r < dr; ++r)
        map(Eigen::Index(mp) * dm + m,
            Eigen::Index(mp * dr + r) * dl + (m * dr + r)) = 1;
  return map;
}

CMat vec_embed_ground_map(int mem_qubits, int readout_qubits) {
  const int dm = dim_for_qubits(mem_qubits);
  const int dr = dim_for_qubits(readout_qubits);
  const int dl = dm * dr;
  CMat map = CMat::Zero(Eigen::Index(dl) * dl, Eigen::Index(dm) * dm);
  for (int m = 0; m < dm; ++m)
    for (int mp = 0; mp < dm; ++mp)
      map(Eigen::Index(mp * dr) * dl + m * dr, Eigen::Index(mp) * dm + m) = 1;
  return map;
}

CMat embed_one_qubit(const CMat& op, int qubit, int total) {
  if (qubit < 0 || qubit >= total)
    throw std::invalid_argument("embed_one_qubit: qubit index out of range");
  const int left = dim_for_qubits(qubit);
  const int right = dim_for_qubits(total - qubit - 1);
  CMat m = tensor_product(CMat::Identity(left, left), op);
  return tensor_product(m, CMat::Identity(right, right));
}

CMat matrix_exponential(const CMat& a) {
  if (a.rows() != a.cols())
    throw std::invalid_argument("matrix_exponential: matrix must be square");
  if (!a.allFinite())
    throw std::invalid_argument("matrix_exponential: non-finite entries");
  return a.exp();
}

EigResult general_eig(const CMat& a) {
  if (a.rows() != a.cols())
    throw std::invalid_argument("general_eig: matrix must be square");
  Eigen::ComplexEigenSolver<CMat> solver(a, /*computeEigenvectors=*/true);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("general_eig: eigendecomposition did not converge");

  const Eigen::Index n = a.rows();
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  const CVec& vals = solver.eigenvalues();
  // Descending |lambda|; near-ties broken by descending real then imaginary
  // part so the output is deterministic.
  std::sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
    const double ai = std::abs(vals(i)), aj = std::abs(vals(j));
    if (std::abs(ai - aj) > 1e-12) return ai > aj;
    if (std::abs(vals(i).real() - vals(j).real()) > 1e-12)
      return vals(i).real() > vals(j).real();
    return vals(i).imag() > vals(j).imag();
  });

  EigResult res;
  res.values.resize(n);
  res.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    res.values(k) = vals(order[k]);
    res.vectors.col(k) = solver.eigenvectors().col(order[k]);
  }
  const double scale = a.norm();
  if (scale > 0) {
    double worst = 0;
    for (Eigen::Index k = 0; k < n; ++k) {
      const double r =
          (a * res.vectors.col(k) - res.values(k) * res.vectors.col(k)).norm();
      worst = std::max(worst, r / scale);
    }
    res.max_residual = worst;
  }
  return res;
}

DensityDiagnostics validate_density_matrix(const CMat& rho) {
  if (rho.rows() != rho.cols())
    throw std::invalid_argument("validate_density_matrix: matrix must be square");
  DensityDiagnostics d;
  d.hermiticity_defect = (rho - rho.adjoint()).norm();
  d.trace_defect = std::abs(rho.trace() - Complex(1, 0));
  CMat herm = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<CMat> es(herm, Eigen::EigenvaluesOnly);
  d.min_eigenvalue = es.eigenvalues().minCoeff();
  return d;
}

bool is_trace_preserving(const CMat& superop, double tol) {
  const auto n = superop.rows();
  const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(double(n))));
  if (d * d != n || superop.cols() != n)
    throw std::invalid_argument("is_trace_preserving: not a square superoperator");
  // t^T S = t^T with t = vec(I) is equivalent to trace preservation.
  CVec t = vectorize(CMat::Identity(d, d));
  return (superop.transpose() * t - t).lpNorm<Eigen::Infinity>() < tol;
}

void require_qubit_dim(const CMat& m, int qubits, const char* what) {
  const int d = dim_for_qubits(qubits);
  if (m.rows() != d || m.cols() != d)
    throw std::invalid_argument(std::string(what) + ": expected a " +
                                std::to_string(d) + "x" + std::to_string(d) +
                                " matrix");
}

}  // namespace nisqrc
