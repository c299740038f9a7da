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

#include "nisqrc/encoding.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "nisqrc/rng.hpp"

namespace nisqrc {

namespace {

constexpr Complex kImag(0.0, 1.0);

int qubit_shift(int qubit, int total) { return total - 1 - qubit; }

double rate_at(const RVec& rates, int i) {
  return rates.size() == 0 ? 0.0 : rates(i);
}

}  // namespace

DissipationSpec DissipationSpec::uniform_t1(int qubits, double t1) {
  if (t1 <= 0) throw std::invalid_argument("uniform_t1: T1 must be positive");
  DissipationSpec d;
  d.damping_rates = std::isinf(t1) ? RVec::Zero(qubits).eval()
                                   : RVec::Constant(qubits, 1.0 / t1).eval();
  return d;
}

void DissipationSpec::check(int qubits) const {
  for (const RVec* r : {&damping_rates, &dephasing_rates}) {
    if (r->size() != 0 && r->size() != qubits)
      throw std::invalid_argument("DissipationSpec: rate vector size mismatch");
    if (r->size() != 0 && r->minCoeff() < 0)
      throw std::invalid_argument("DissipationSpec: negative rate");
  }
}

HamiltonianAnsatz draw_hamiltonian_ansatz(int mem_qubits, int readout_qubits,
                                          double tau,
                                          std::vector<std::pair<int, int>> edges,
                                          const HamiltonianHyper& hyper,
                                          std::uint64_t seed) {
  HamiltonianAnsatz a;
  a.mem_qubits = mem_qubits;
  a.readout_qubits = readout_qubits;
  a.tau = tau;
  a.edges = std::move(edges);
  a.hyper = hyper;
  a.seed = seed;

  const int L = a.qubits();
  for (auto [i, j] : a.edges)
    if (i < 0 || j < 0 || i >= L || j >= L || i == j)
      throw std::invalid_argument("draw_hamiltonian_ansatz: invalid edge (" +
                                  std::to_string(i) + "," + std::to_string(j) + ")");

  // Draw order is part of the reproducibility contract: couplings over the
  // edge list, then x-fields, then z-drives, qubit by qubit.
  auto rng = make_engine(derive_seed(seed, {0x616e7361747aULL}));
  std::uniform_real_distribution<double> unif(0.0, hyper.j_max);
  std::normal_distribution<double> gauss(0.0, 1.0);

  a.couplings.resize(static_cast<Eigen::Index>(a.edges.size()));
  for (Eigen::Index e = 0; e < a.couplings.size(); ++e) a.couplings(e) = unif(rng);
  a.field_x.resize(L);
  for (int i = 0; i < L; ++i) a.field_x(i) = hyper.eta_x + hyper.eps_x_rms * gauss(rng);
  a.drive_z.resize(L);
  for (int i = 0; i < L; ++i) a.drive_z(i) = hyper.eta_z + hyper.eps_z_rms * gauss(rng);
  return a;
}

std::pair<CMat, CMat> build_ising_hamiltonians(const HamiltonianAnsatz& a) {
  const int L = a.qubits();
  const int d = dim_for_qubits(L);
  if (a.couplings.size() != Eigen::Index(a.edges.size()))
    throw std::invalid_argument("build_ising_hamiltonians: couplings not drawn");

  // The zz and z terms are diagonal; accumulate them as vectors.
  RVec diag0 = RVec::Zero(d), diag1 = RVec::Zero(d);
  for (int n = 0; n < d; ++n) {
    for (size_t e = 0; e < a.edges.size(); ++e) {
      const auto [i, j] = a.edges[e];
      const double zi = ((n >> qubit_shift(i, L)) & 1) ? -1.0 : 1.0;
      const double zj = ((n >> qubit_shift(j, L)) & 1) ? -1.0 : 1.0;
      diag0(n) += a.couplings(e) * zi * zj;
    }
    for (int i = 0; i < L; ++i) {
      const double zi = ((n >> qubit_shift(i, L)) & 1) ? -1.0 : 1.0;
      diag1(n) += a.drive_z(i) * zi;
    }
  }
  CMat h0 = diag0.cast<Complex>().asDiagonal();
  for (int i = 0; i < L; ++i)
    if (a.field_x(i) != 0.0) h0 += a.field_x(i) * embed_one_qubit(pauli_x(), i, L);
  CMat h1 = diag1.cast<Complex>().asDiagonal();
  return {h0, h1};
}

CMat build_liouvillian(const CMat& h0, const CMat& h1, double u,
                       const DissipationSpec& diss) {
  const auto d = h0.rows();
  const int L = static_cast<int>(std::llround(std::log2(double(d))));
  diss.check(L);
  CMat h = h0 + u * h1;
  CMat id = CMat::Identity(d, d);
  CMat sup = -kImag * (sandwich_superop(h, id) - sandwich_superop(id, h));
  auto add_dissipator = [&](const CMat& jump, double rate) {
    if (rate == 0.0) return;
    CMat n = jump.adjoint() * jump;
    sup += rate * (sandwich_superop(jump, jump) -
                   0.5 * (sandwich_superop(n, id) + sandwich_superop(id, n)));
  };
  for (int i = 0; i < L; ++i) {
    add_dissipator(embed_one_qubit(sigma_minus(), i, L), rate_at(diss.damping_rates, i));
    add_dissipator(embed_one_qubit(pauli_z(), i, L), rate_at(diss.dephasing_rates, i));
  }
  return sup;
}

CMat hamiltonian_channel(const CMat& h0, const CMat& h1, double u,
                         const DissipationSpec& diss, double tau) {
  if (tau < 0) throw std::invalid_argument("hamiltonian_channel: tau must be >= 0");
  return matrix_exponential(tau * build_liouvillian(h0, h1, u, diss));
}

CMat apply_liouvillian(const CMat& h, const DissipationSpec& diss, const CMat& x) {
  const auto d = h.rows();
  const int L = static_cast<int>(std::llround(std::log2(double(d))));
  CMat out = -kImag * (h * x - x * h);
  for (int i = 0; i < L; ++i) {
    const int mask = 1 << qubit_shift(i, L);
    const double g = rate_at(diss.damping_rates, i);
    if (g != 0.0) {
      for (Eigen::Index a = 0; a < d; ++a) {
        const int ba = (int(a) & mask) ? 1 : 0;
        for (Eigen::Index b = 0; b < d; ++b) {
          const int bb = (int(b) & mask) ? 1 : 0;
          Complex v = -0.5 * g * double(ba + bb) * x(a, b);
          if (!ba && !bb) v += g * x(a | mask, b | mask);
          out(a, b) += v;
        }
      }
    }
    const double gp = rate_at(diss.dephasing_rates, i);
    if (gp != 0.0) {
      for (Eigen::Index a = 0; a < d; ++a) {
        const int ba = (int(a) & mask) ? 1 : 0;
        for (Eigen::Index b = 0; b < d; ++b)
          if (ba != ((int(b) & mask) ? 1 : 0)) out(a, b) -= 2.0 * gp * x(a, b);
      }
    }
  }
  return out;
}

CMat apply_pure_dissipation(const CMat& x, const DissipationSpec& diss, double t) {
  const auto d = x.rows();
  const int L = static_cast<int>(std::llround(std::log2(double(d))));
  diss.check(L);
  CMat y = x;
  for (int i = 0; i < L; ++i) {
    const int mask = 1 << qubit_shift(i, L);
    const double g = rate_at(diss.damping_rates, i);
    if (g != 0.0) {
      const double p = 1.0 - std::exp(-g * t);
      const double s = std::sqrt(1.0 - p);
      // Populations feed before the excited blocks are scaled.
      for (Eigen::Index a = 0; a < d; ++a) {
        if (int(a) & mask) continue;
        for (Eigen::Index b = 0; b < d; ++b) {
          if (int(b) & mask) continue;
          y(a, b) += p * y(a | mask, b | mask);
        }
      }
      for (Eigen::Index a = 0; a < d; ++a) {
        const bool ea = int(a) & mask;
        for (Eigen::Index b = 0; b < d; ++b) {
          const bool eb = int(b) & mask;
          if (ea && eb) y(a, b) *= 1.0 - p;
          else if (ea != eb) y(a, b) *= s;
        }
      }
    }
    const double gp = rate_at(diss.dephasing_rates, i);
    if (gp != 0.0) {
      const double f = std::exp(-2.0 * gp * t);
      for (Eigen::Index a = 0; a < d; ++a) {
        const bool ea = int(a) & mask;
        for (Eigen::Index b = 0; b < d; ++b)
          if (ea != bool(int(b) & mask)) y(a, b) *= f;
      }
    }
  }
  return y;
}

std::vector<int> alternating_chain(int mem_qubits, int readout_qubits) {
  std::vector<int> chain;
  int m = 0, r = 0;
  const int L = mem_qubits + readout_qubits;
  for (int pos = 0; pos < L; ++pos) {
    // readout first: r0 m0 r1 m1 ... ; leftovers appended in order
    if (pos % 2 == 0 ? r < readout_qubits : m < mem_qubits) {
      if (pos % 2 == 0) chain.push_back(mem_qubits + r++);
      else chain.push_back(m++);
    } else if (r < readout_qubits) {
      chain.push_back(mem_qubits + r++);
    } else {
      chain.push_back(m++);
    }
  }
  return chain;
}

CircuitAnsatz draw_circuit_ansatz(int mem_qubits, int readout_qubits, double tau,
                                  const CircuitHyper& hyper,
                                  std::vector<int> chain, std::uint64_t seed) {
  CircuitAnsatz a;
  a.mem_qubits = mem_qubits;
  a.readout_qubits = readout_qubits;
  a.tau = tau;
  a.hyper = hyper;
  a.seed = seed;
  a.chain = chain.empty() ? alternating_chain(mem_qubits, readout_qubits)
                          : std::move(chain);
  if (int(a.chain.size()) != a.qubits())
    throw std::invalid_argument("draw_circuit_ansatz: chain must list every qubit");
  if (hyper.trotter_steps < 1)
    throw std::invalid_argument("draw_circuit_ansatz: n_T must be >= 1");
  a.edges = chain_edges(a.chain);

  const double scale = tau / hyper.trotter_steps;
  auto rng = make_engine(derive_seed(seed, {0x63697263756974ULL}));
  auto draw = [&](double lo_min, double delta, RVec& out) {
    std::uniform_real_distribution<double> unif(scale * lo_min,
                                                scale * (lo_min + delta));
    out.resize(a.qubits());
    for (int i = 0; i < a.qubits(); ++i) out(i) = unif(rng);
  };
  draw(hyper.theta_x_min, hyper.delta_theta_x, a.theta_x);
  draw(hyper.theta_z_min, hyper.delta_theta_z, a.theta_z);
  draw(hyper.theta_i_min, hyper.delta_theta_i, a.theta_i);
  return a;
}

CMat build_circuit_unitary(const CircuitAnsatz& a, double u) {
  const int L = a.qubits();
  const int d = dim_for_qubits(L);

  // Qubit-wise Rx layer.
  CMat rx = CMat::Identity(1, 1);
  for (int i = 0; i < L; ++i) {
    const double th = a.theta_x(i);
    CMat r(2, 2);
    r << std::cos(th / 2), -kImag * std::sin(th / 2),
        -kImag * std::sin(th / 2), std::cos(th / 2);
    rx = tensor_product(rx, r);
  }

  // Rz and W layers are diagonal; accumulate their phases per basis state.
  CVec diag(d);
  const double w_angle = a.hyper.coupling * a.tau / a.hyper.trotter_steps;
  for (int n = 0; n < d; ++n) {
    double phase = 0.0;
    for (int i = 0; i < L; ++i) {
      const double z = ((n >> qubit_shift(i, L)) & 1) ? -1.0 : 1.0;
      phase += -0.5 * (a.theta_z(i) + a.theta_i(i) * u) * z;
    }
    for (auto [i, j] : a.edges) {
      const double zi = ((n >> qubit_shift(i, L)) & 1) ? -1.0 : 1.0;
      const double zj = ((n >> qubit_shift(j, L)) & 1) ? -1.0 : 1.0;
      phase += -w_angle * zi * zj;
    }
    diag(n) = std::exp(kImag * phase);
  }

  CMat layer = diag.asDiagonal() * rx;  // W * Rz * Rx (W, Rz both diagonal)
  CMat un = layer;
  for (int t = 1; t < a.hyper.trotter_steps; ++t) un = layer * un;
  return un;
}

CMat circuit_channel(const CircuitAnsatz& a, double u, const DissipationSpec& diss) {
  CMat un = build_circuit_unitary(a, u);
  CMat sup = sandwich_superop(un, un);
  if (diss.lossless()) return sup;
  diss.check(a.qubits());
  // Losses act for the step duration after the unitary block.
  const int d = dim_for_qubits(a.qubits());
  CMat damp = CMat::Zero(d * d, d * d);
  for (Eigen::Index c = 0; c < Eigen::Index(d) * d; ++c) {
    CMat basis = CMat::Zero(d, d);
    basis(c % d, c / d) = 1.0;
    damp.col(c) = vectorize(apply_pure_dissipation(basis, diss, a.tau));
  }
  return damp * sup;
}

CMat measure_reset_channel(int mem_qubits, int readout_qubits) {
  if (mem_qubits < 1 || readout_qubits < 1)
    throw std::invalid_argument("measure_reset_channel: need M, R >= 1");
  return vec_embed_ground_map(mem_qubits, readout_qubits) *
         vec_partial_trace_map(mem_qubits, readout_qubits);
}

CMat no_reset_measurement_superop(int mem_qubits, int readout_qubits) {
  const int dr = dim_for_qubits(readout_qubits);
  const int dl = dim_for_qubits(mem_qubits + readout_qubits);
  CMat sup = CMat::Zero(Eigen::Index(dl) * dl, Eigen::Index(dl) * dl);
  for (Eigen::Index col = 0; col < dl; ++col)
    for (Eigen::Index row = 0; row < dl; ++row)
      if (row % dr == col % dr) {
        const Eigen::Index q = col * dl + row;
        sup(q, q) = 1.0;
      }
  return sup;
}

CMat apply_measurement_mask(const CMat& rho, int mem_qubits, int readout_qubits) {
  const int dr = dim_for_qubits(readout_qubits);
  const int dl = dim_for_qubits(mem_qubits + readout_qubits);
  if (rho.rows() != dl || rho.cols() != dl)
    throw std::invalid_argument("apply_measurement_mask: size mismatch");
  CMat out = rho;
  for (Eigen::Index a = 0; a < dl; ++a)
    for (Eigen::Index b = 0; b < dl; ++b)
      if (a % dr != b % dr) out(a, b) = 0.0;
  return out;
}

std::vector<CMat> povm_operators(int mem_qubits, int readout_qubits) {
  const int dr = dim_for_qubits(readout_qubits);
  const int dm = dim_for_qubits(mem_qubits);
  const int dl = dm * dr;
  std::vector<CMat> ops;
  ops.reserve(dr);
  for (int j = 0; j < dr; ++j) {
    CMat m = CMat::Zero(dl, dl);
    for (int q = 0; q < dm; ++q) m(q * dr + j, q * dr + j) = 1.0;
    ops.push_back(std::move(m));
  }
  return ops;
}

RVec povm_probabilities(const CMat& rho_full, int mem_qubits, int readout_qubits) {
  const int dr = dim_for_qubits(readout_qubits);
  const int dm = dim_for_qubits(mem_qubits);
  if (rho_full.rows() != Eigen::Index(dm) * dr)
    throw std::invalid_argument("povm_probabilities: size mismatch");
  RVec x = RVec::Zero(dr);
  for (int j = 0; j < dr; ++j)
    for (int q = 0; q < dm; ++q) x(j) += rho_full(q * dr + j, q * dr + j).real();
  return x;
}

CMat ChannelFamily::superoperator(double u) const {
  const int d = dim_for_qubits(qubits());
  auto prepared = prepare(u);
  CMat sup(Eigen::Index(d) * d, Eigen::Index(d) * d);
  CMat basis = CMat::Zero(d, d);
  for (Eigen::Index c = 0; c < Eigen::Index(d) * d; ++c) {
    basis(c % d, c / d) = 1.0;
    sup.col(c) = vectorize(prepared->apply(basis));
    basis(c % d, c / d) = 0.0;
  }
  return sup;
}

namespace {

// Lossless step: exact unitary conjugation from the Hermitian
// eigendecomposition of H(u).
class UnitaryPrepared final : public ChannelFamily::Prepared {
 public:
  UnitaryPrepared(CMat un, const DissipationSpec* diss, double idle)
      : un_(std::move(un)), diss_(diss), idle_(idle) {}
  CMat apply(const CMat& x) const override {
    CMat y = un_ * x * un_.adjoint();
    if (idle_ > 0 && diss_ && !diss_->lossless())
      y = apply_pure_dissipation(y, *diss_, idle_);
    return y;
  }

 private:
  CMat un_;
  const DissipationSpec* diss_;
  double idle_;
};

// Dissipative step: scaled Taylor action of exp(tau L(u)).  The substep
// count comes from an upper bound on ||tau L||_2; per-substep series are
// summed to machine precision.
class TaylorPrepared final : public ChannelFamily::Prepared {
 public:
  TaylorPrepared(CMat h, const DissipationSpec* diss, double tau,
                 double norm_bound, double idle)
      : h_(std::move(h)), diss_(diss), tau_(tau), idle_(idle) {
    constexpr double theta = 5.0;
    substeps_ = std::max(1, int(std::ceil(norm_bound / theta)));
  }

  CMat apply(const CMat& x) const override {
    CMat y = x;
    const double h = tau_ / substeps_;
    for (int s = 0; s < substeps_; ++s) {
      CMat acc = y;
      CMat term = y;
      int tiny = 0;
      for (int k = 1; k <= 80; ++k) {
        term = (h / k) * apply_liouvillian(h_, *diss_, term);
        acc += term;
        if (term.norm() <= 1e-16 * acc.norm()) {
          if (++tiny >= 2) break;
        } else {
          tiny = 0;
        }
      }
      y = acc;
    }
    if (idle_ > 0) y = apply_pure_dissipation(y, *diss_, idle_);
    return y;
  }

 private:
  CMat h_;
  const DissipationSpec* diss_;
  double tau_;
  double idle_;
  int substeps_;
};

class CircuitPrepared final : public ChannelFamily::Prepared {
 public:
  CircuitPrepared(CMat un, const DissipationSpec* diss, double duration)
      : un_(std::move(un)), diss_(diss), duration_(duration) {}
  CMat apply(const CMat& x) const override {
    CMat y = un_ * x * un_.adjoint();
    if (diss_ && !diss_->lossless())
      y = apply_pure_dissipation(y, *diss_, duration_);
    return y;
  }

 private:
  CMat un_;
  const DissipationSpec* diss_;
  double duration_;
};

double spectral_norm(const CMat& h) {
  Eigen::SelfAdjointEigenSolver<CMat> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

HamiltonianFamily::HamiltonianFamily(HamiltonianAnsatz ansatz,
                                     DissipationSpec diss, double idle_delay)
    : ansatz_(std::move(ansatz)), diss_(std::move(diss)), idle_delay_(idle_delay) {
  diss_.check(ansatz_.qubits());
  std::tie(h0_, h1_) = build_ising_hamiltonians(ansatz_);
  h0_norm_ = spectral_norm(h0_);
  h1_norm_ = spectral_norm(h1_);
}

std::unique_ptr<ChannelFamily::Prepared> HamiltonianFamily::prepare(double u) const {
  CMat h = h0_ + u * h1_;
  if (diss_.lossless()) {
    Eigen::SelfAdjointEigenSolver<CMat> es(h);
    CVec phases = (-kImag * ansatz_.tau * es.eigenvalues().cast<Complex>()).array().exp();
    CMat un = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
    return std::make_unique<UnitaryPrepared>(std::move(un), &diss_, idle_delay_);
  }
  double rates = 0.0;
  if (diss_.damping_rates.size()) rates += 2.0 * diss_.damping_rates.sum();
  if (diss_.dephasing_rates.size()) rates += 2.0 * diss_.dephasing_rates.sum();
  const double bound =
      ansatz_.tau * (2.0 * (h0_norm_ + std::abs(u) * h1_norm_) + rates);
  return std::make_unique<TaylorPrepared>(std::move(h), &diss_, ansatz_.tau,
                                          bound, idle_delay_);
}

CircuitFamily::CircuitFamily(CircuitAnsatz ansatz, DissipationSpec diss,
                             double idle_delay)
    : ansatz_(std::move(ansatz)), diss_(std::move(diss)), idle_delay_(idle_delay) {
  diss_.check(ansatz_.qubits());
}

std::unique_ptr<ChannelFamily::Prepared> CircuitFamily::prepare(double u) const {
  return std::make_unique<CircuitPrepared>(build_circuit_unitary(ansatz_, u),
                                           &diss_, ansatz_.tau + idle_delay_);
}

std::vector<std::pair<int, int>> all_to_all_edges(int qubits) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < qubits; ++i)
    for (int j = i + 1; j < qubits; ++j) edges.emplace_back(i, j);
  return edges;
}

std::vector<std::pair<int, int>> chain_edges(const std::vector<int>& chain) {
  std::vector<std::pair<int, int>> edges;
  for (size_t p = 0; p + 1 < chain.size(); ++p)
    edges.emplace_back(chain[p], chain[p + 1]);
  return edges;
}

std::vector<std::pair<int, int>> split_edges(int mem_qubits, int readout_qubits) {
  if (mem_qubits % 2 || readout_qubits % 2)
    throw std::invalid_argument("split_edges: M and R must be even");
  std::vector<std::pair<int, int>> edges;
  auto block = [&](std::vector<int> qs) {
    for (size_t i = 0; i < qs.size(); ++i)
      for (size_t j = i + 1; j < qs.size(); ++j) edges.emplace_back(qs[i], qs[j]);
  };
  std::vector<int> first, second;
  for (int m = 0; m < mem_qubits; ++m)
    (m < mem_qubits / 2 ? first : second).push_back(m);
  for (int r = 0; r < readout_qubits; ++r)
    (r < readout_qubits / 2 ? first : second).push_back(mem_qubits + r);
  block(first);
  block(second);
  return edges;
}

}  // namespace nisqrc
