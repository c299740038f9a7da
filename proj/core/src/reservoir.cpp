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

#include "nisqrc/reservoir.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "nisqrc/rng.hpp"

namespace nisqrc {

namespace {

void check_inputs(const RVec& inputs) {
  for (Eigen::Index n = 0; n < inputs.size(); ++n)
    if (!(inputs(n) >= -1.0 && inputs(n) <= 1.0))
      throw std::invalid_argument("input u(" + std::to_string(n + 1) +
                                  ") = " + std::to_string(inputs(n)) +
                                  " outside [-1, 1]");
}

void check_state(const CMat& rho, const RunOptions& opts, int step,
                 const char* label) {
  if (!opts.validate) return;
  // Cheap Cholesky probe first; the full spectrum only on suspicion.
  const double herm = (rho - rho.adjoint()).norm();
  const double trace = std::abs(rho.trace() - Complex(1, 0));
  bool psd_ok = false;
  if (herm < opts.herm_tol && trace < opts.trace_tol) {
    CMat shifted = 0.5 * (rho + rho.adjoint()) +
                   opts.psd_tol * CMat::Identity(rho.rows(), rho.cols());
    psd_ok = Eigen::LLT<CMat>(shifted).info() == Eigen::Success;
  }
  if (!psd_ok) {
    DensityDiagnostics d = validate_density_matrix(rho);
    if (!d.ok(opts.herm_tol, opts.trace_tol, opts.psd_tol))
      throw std::runtime_error(
          std::string(label) + " state invalid at step " + std::to_string(step) +
          ": hermiticity defect " + std::to_string(d.hermiticity_defect) +
          ", trace defect " + std::to_string(d.trace_defect) +
          ", min eigenvalue " + std::to_string(d.min_eigenvalue));
  }
}

CMat ground_state(int qubits) {
  const int d = dim_for_qubits(qubits);
  CMat rho = CMat::Zero(d, d);
  rho(0, 0) = 1.0;
  return rho;
}

}  // namespace

CMat memory_step_map(const CMat& channel_superop, int mem_qubits, int readout_qubits) {
  const int dl = dim_for_qubits(mem_qubits + readout_qubits);
  if (channel_superop.rows() != Eigen::Index(dl) * dl ||
      channel_superop.cols() != Eigen::Index(dl) * dl)
    throw std::invalid_argument("memory_step_map: superoperator side mismatch");
  return vec_partial_trace_map(mem_qubits, readout_qubits) * channel_superop *
         vec_embed_ground_map(mem_qubits, readout_qubits);
}

CMat memory_step_matrix(const ChannelFamily& family, double u, int mem_qubits,
                        int readout_qubits) {
  const int dm = dim_for_qubits(mem_qubits);
  auto prepared = family.prepare(u);
  CMat map(Eigen::Index(dm) * dm, Eigen::Index(dm) * dm);
  CMat basis = CMat::Zero(dm, dm);
  for (Eigen::Index c = 0; c < Eigen::Index(dm) * dm; ++c) {
    basis(c % dm, c / dm) = 1.0;
    CMat out = prepared->apply(embed_with_readout_ground(basis, readout_qubits));
    map.col(c) = vectorize(partial_trace_readout(out, mem_qubits, readout_qubits));
    basis(c % dm, c / dm) = 0.0;
  }
  return map;
}

FeatureSeries run_expected_features(const ChannelFamily& family, int mem_qubits,
                                    int readout_qubits, const RVec& inputs,
                                    const CMat& rho_m0, const RunOptions& opts,
                                    std::vector<CMat>* memory_states) {
  check_inputs(inputs);
  const int K = dim_for_qubits(readout_qubits);
  CMat rho_m = rho_m0.size() ? rho_m0 : ground_state(mem_qubits);
  require_qubit_dim(rho_m, mem_qubits, "run_expected_features: rho_m0");
  check_state(rho_m, opts, 0, "initial memory");

  FeatureSeries series;
  series.length = static_cast<int>(inputs.size());
  series.num_features = K;
  series.probabilities.resize(series.length, K);
  if (memory_states) memory_states->clear();

  for (int n = 0; n < series.length; ++n) {
    CMat full = family.prepare(inputs(n))->apply(
        embed_with_readout_ground(rho_m, readout_qubits));
    check_state(full, opts, n + 1, "pre-measurement");
    series.probabilities.row(n) =
        povm_probabilities(full, mem_qubits, readout_qubits).transpose();
    rho_m = partial_trace_readout(full, mem_qubits, readout_qubits);
    if (memory_states) memory_states->push_back(rho_m);
  }
  return series;
}

FeatureSeries run_no_reset_features(const ChannelFamily& family, int mem_qubits,
                                    int readout_qubits, const RVec& inputs,
                                    const CMat& rho0, const RunOptions& opts,
                                    std::vector<CMat>* full_states) {
  check_inputs(inputs);
  const int L = mem_qubits + readout_qubits;
  const int K = dim_for_qubits(readout_qubits);
  CMat rho = rho0.size() ? rho0 : ground_state(L);
  require_qubit_dim(rho, L, "run_no_reset_features: rho0");
  check_state(rho, opts, 0, "initial");

  FeatureSeries series;
  series.length = static_cast<int>(inputs.size());
  series.num_features = K;
  series.probabilities.resize(series.length, K);
  if (full_states) full_states->clear();

  for (int n = 0; n < series.length; ++n) {
    rho = family.prepare(inputs(n))->apply(rho);
    check_state(rho, opts, n + 1, "pre-measurement");
    series.probabilities.row(n) =
        povm_probabilities(rho, mem_qubits, readout_qubits).transpose();
    if (full_states) full_states->push_back(rho);
    rho = apply_measurement_mask(rho, mem_qubits, readout_qubits);
  }
  return series;
}

QuantizedPipeline::QuantizedPipeline(const ChannelFamily& family, int mem_qubits,
                                     int readout_qubits, int points)
    : mem_qubits_(mem_qubits), readout_qubits_(readout_qubits) {
  if (points < 2) throw std::invalid_argument("QuantizedPipeline: need >= 2 points");
  const int dm = dim_for_qubits(mem_qubits);
  const int dr = dim_for_qubits(readout_qubits);
  grid_.resize(points);
  step_.resize(points);
  feature_.resize(points);
  for (int g = 0; g < points; ++g) {
    // Chebyshev-Lobatto spacing: denser near the interval ends.
    grid_[g] = -std::cos(M_PI * g / (points - 1));
    auto prepared = family.prepare(grid_[g]);
    CMat step(Eigen::Index(dm) * dm, Eigen::Index(dm) * dm);
    CMat feat(dr, Eigen::Index(dm) * dm);
    CMat basis = CMat::Zero(dm, dm);
    for (Eigen::Index c = 0; c < Eigen::Index(dm) * dm; ++c) {
      basis(c % dm, c / dm) = 1.0;
      CMat out = prepared->apply(embed_with_readout_ground(basis, readout_qubits));
      step.col(c) = vectorize(partial_trace_readout(out, mem_qubits, readout_qubits));
      for (int j = 0; j < dr; ++j) {
        Complex s = 0;
        for (int q = 0; q < dm; ++q) s += out(q * dr + j, q * dr + j);
        feat(j, c) = s;
      }
      basis(c % dm, c / dm) = 0.0;
    }
    step_[g] = std::move(step);
    feature_[g] = std::move(feat);
  }
}

int QuantizedPipeline::nearest_index(double u) const {
  const int n = static_cast<int>(grid_.size()) - 1;
  const double clamped = std::min(1.0, std::max(-1.0, u));
  const int g = int(std::lround(std::acos(-clamped) / M_PI * n));
  return std::min(n, std::max(0, g));
}

// Bracketing grid cell and blend weight.  The step and feature maps are
// combined convexly (a convex mix of CPTP maps is CPTP), which turns the
// O(spacing) error of a nearest lookup into O(spacing^2).
std::tuple<int, int, double> QuantizedPipeline::bracket(double u) const {
  const int n = static_cast<int>(grid_.size()) - 1;
  const double clamped = std::min(1.0, std::max(-1.0, u));
  const double pos = std::acos(-clamped) / M_PI * n;
  int g0 = std::min(n - 1, std::max(0, int(std::floor(pos))));
  const double span = grid_[size_t(g0) + 1] - grid_[size_t(g0)];
  double w = span > 0 ? (clamped - grid_[size_t(g0)]) / span : 0.0;
  return {g0, g0 + 1, std::min(1.0, std::max(0.0, w))};
}

FeatureSeries QuantizedPipeline::run(const RVec& inputs, const CMat& rho_m0,
                                     const RunOptions& opts,
                                     std::vector<CMat>* memory_states) const {
  check_inputs(inputs);
  const int K = dim_for_qubits(readout_qubits_);
  CMat rho_m = rho_m0.size() ? rho_m0 : ground_state(mem_qubits_);
  require_qubit_dim(rho_m, mem_qubits_, "QuantizedPipeline::run: rho_m0");

  FeatureSeries series;
  series.length = static_cast<int>(inputs.size());
  series.num_features = K;
  series.probabilities.resize(series.length, K);
  if (memory_states) memory_states->clear();

  CVec v = vectorize(rho_m);
  for (int n = 0; n < series.length; ++n) {
    const auto [g0, g1, w] = bracket(inputs(n));
    series.probabilities.row(n) =
        ((1.0 - w) * (feature_[g0] * v) + w * (feature_[g1] * v)).real().transpose();
    v = (1.0 - w) * (step_[g0] * v) + w * (step_[g1] * v);
    if (opts.validate) check_state(devectorize(v), opts, n + 1, "memory");
    if (memory_states) memory_states->push_back(devectorize(v));
  }
  return series;
}

FeatureSeries sample_features(const FeatureSeries& expected, long long shots,
                              std::uint64_t seed) {
  if (shots < 1) throw std::invalid_argument("sample_features: need S >= 1");
  FeatureSeries out = expected;
  out.shots = shots;
  out.samples.resize(expected.probabilities.rows(), expected.probabilities.cols());

  auto rng = make_engine(derive_seed(seed, {0x73616d706c65ULL}));
  const int K = expected.num_features;
  for (Eigen::Index n = 0; n < expected.probabilities.rows(); ++n) {
    double total = 0.0;
    for (int j = 0; j < K; ++j) {
      const double p = expected.probabilities(n, j);
      if (p < -1e-9 || p > 1.0 + 1e-9)
        throw std::invalid_argument("sample_features: invalid probability at row " +
                                    std::to_string(n));
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-7)
      throw std::invalid_argument("sample_features: row " + std::to_string(n) +
                                  " does not sum to 1");
    long long remaining = shots;
    double rest = total;
    for (int j = 0; j < K; ++j) {
      long long c;
      if (j == K - 1) {
        c = remaining;
      } else {
        const double p = std::max(0.0, expected.probabilities(n, j));
        const double q = rest > 0 ? std::min(1.0, p / rest) : 0.0;
        c = remaining > 0
                ? std::binomial_distribution<long long>(remaining, q)(rng)
                : 0;
        remaining -= c;
        rest -= p;
      }
      out.samples(n, j) = double(c) / double(shots);
    }
  }
  return out;
}

RMat walsh_hadamard_matrix(int num_features) {
  if (num_features < 1 || (num_features & (num_features - 1)) != 0)
    throw std::invalid_argument("walsh_hadamard_matrix: K must be a power of 2");
  RMat h(num_features, num_features);
  for (int a = 0; a < num_features; ++a)
    for (int b = 0; b < num_features; ++b)
      h(a, b) = (std::popcount(unsigned(a & b)) % 2) ? -1.0 : 1.0;
  return h;
}

FeatureSeries probability_to_moment(const FeatureSeries& probs) {
  RMat h = walsh_hadamard_matrix(probs.num_features);
  FeatureSeries out = probs;
  out.probabilities = probs.probabilities * h.transpose();
  if (probs.has_samples()) out.samples = probs.samples * h.transpose();
  return out;
}

FeatureSeries moment_to_probability(const FeatureSeries& moments) {
  RMat h = walsh_hadamard_matrix(moments.num_features);
  FeatureSeries out = moments;
  out.probabilities = moments.probabilities * h.transpose() / moments.num_features;
  if (moments.has_samples())
    out.samples = moments.samples * h.transpose() / moments.num_features;
  return out;
}

void write_feature_csv(std::ostream& os, const FeatureSeries& series) {
  os << "n,j,x,xbar,shots\n";
  char buf[96];
  for (int n = 0; n < series.length; ++n)
    for (int j = 0; j < series.num_features; ++j) {
      std::snprintf(buf, sizeof(buf), "%d,%d,%.17g,", n + 1, j,
                    series.probabilities(n, j));
      os << buf;
      if (series.has_samples()) {
        std::snprintf(buf, sizeof(buf), "%.17g,%lld", series.samples(n, j),
                      series.shots);
        os << buf;
      } else {
        os << ",";
      }
      os << "\n";
    }
}

}  // namespace nisqrc
