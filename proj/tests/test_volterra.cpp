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

#include <functional>

#include "nisqrc/reservoir.hpp"
#include "nisqrc/volterra.hpp"
#include "test_helpers.hpp"

using namespace nisqrc;
using namespace nisqrc::testing;

namespace {

HamiltonianFamily test_family(int m, int r, double tau, std::uint64_t seed,
                              HamiltonianHyper hyper = {1.0, 1.0, 1.0, 0.5, 0.5},
                              DissipationSpec diss = {}) {
  return HamiltonianFamily(
      draw_hamiltonian_ansatz(m, r, tau, all_to_all_edges(m + r), hyper, seed),
      std::move(diss));
}

class FixedUnitaryFamily final : public ChannelFamily {
 public:
  explicit FixedUnitaryFamily(CMat un) : un_(std::move(un)) {}
  int qubits() const override {
    return int(std::llround(std::log2(double(un_.rows()))));
  }
  std::unique_ptr<Prepared> prepare(double) const override {
    struct P final : Prepared {
      CMat un;
      CMat apply(const CMat& x) const override { return un * x * un.adjoint(); }
    };
    auto p = std::make_unique<P>();
    p->un = un_;
    return p;
  }

 private:
  CMat un_;
};

// Feature row after placing a few nonzero inputs on top of the fixed point.
// offsets are lags from the readout step: offset p means input u_{n-p}.
RVec response_row(const ChannelFamily& family, int m, int r, const CMat& fp,
                  const std::vector<std::pair<int, double>>& pulses, int span) {
  RVec inputs = RVec::Zero(span + 1);
  for (auto [offset, value] : pulses) inputs(span - offset) = value;
  RunOptions opts;
  opts.validate = false;
  FeatureSeries fs = run_expected_features(family, m, r, inputs, fp, opts);
  return fs.probabilities.row(span).transpose();
}

// Central difference with one Richardson halving step.
RVec richardson_difference(const std::function<RVec(double)>& f, double eps) {
  RVec coarse = (f(eps) - f(-eps)) / (2 * eps);
  RVec fine = (f(eps / 2) - f(-eps / 2)) / eps;
  return (4.0 * fine - coarse) / 3.0;
}

}  // namespace

TEST_SUITE_BEGIN("volterra");

TEST_CASE("u-expansion of a u-independent channel") {
  auto rng = engine(70);
  FixedUnitaryFamily family(random_unitary(4, rng));
  UExpansionOptions opts;
  opts.k_max = 4;
  opts.build_full = true;
  UExpansion uexp = extract_u_expansion(family, 1, 1, opts);
  CHECK(uexp.residual < 1e-13);
  CHECK((uexp.r_k[0] - family.superoperator(0.0)).norm() < 1e-12);
  for (int k = 1; k <= 4; ++k) CHECK(uexp.r_k[k].norm() < 1e-12);
}

TEST_CASE("P_0 matches the directly built memory step map") {
  auto family = test_family(1, 1, 0.7, 71);
  UExpansionOptions opts;
  opts.k_max = 16;
  UExpansion uexp = extract_u_expansion(family, 1, 1, opts);
  CMat direct = memory_step_matrix(family, 0.0, 1, 1);
  CHECK((uexp.p_k[0] - direct).norm() < 1e-10);
  CHECK(is_trace_preserving(uexp.p_k[0], 1e-10));
}

TEST_CASE("expansion residual reports an underresolved channel") {
  auto family = test_family(1, 1, 1.5, 72, {1.0, 2.0, 1.0, 2.0, 1.0});
  UExpansionOptions opts;
  opts.k_max = 2;  // far too small for this drive strength
  CHECK_THROWS_AS(extract_u_expansion(family, 1, 1, opts), std::runtime_error);
  opts.throw_on_residual = false;
  UExpansion uexp = extract_u_expansion(family, 1, 1, opts);
  CHECK(uexp.residual > 1e-9);
}

TEST_CASE("R_1 and dissipative Q_1 match the regrouped commutator series") {
  // Lossless two-qubit Ising channel.
  auto ansatz = draw_hamiltonian_ansatz(1, 1, 0.5, {{0, 1}},
                                        {1.0, 1.0, 1.0, 0.5, 0.5}, 73);
  auto [h0, h1] = build_ising_hamiltonians(ansatz);
  const double tau = ansatz.tau;

  auto series_r1 = [&](const CMat& a0, const CMat& a1) {
    // sum_q (-i tau)^q / q! sum_j a0^j a1 a0^(q-1-j), truncated at q = 25
    const Eigen::Index d = a0.rows();
    CMat total = CMat::Zero(d, d);
    Complex coeff(1, 0);
    std::vector<CMat> a0_pow{CMat::Identity(d, d)};
    for (int q = 1; q <= 25; ++q) {
      a0_pow.push_back(a0_pow.back() * a0);
      coeff *= Complex(0, -tau) / double(q);
      CMat inner = CMat::Zero(d, d);
      for (int j = 0; j < q; ++j) inner += a0_pow[j] * a1 * a0_pow[q - 1 - j];
      total += coeff * inner;
    }
    return total;
  };

  const CMat id = CMat::Identity(4, 4);
  CMat ad_h0 = sandwich_superop(h0, id) - sandwich_superop(id, h0);
  CMat ad_h1 = sandwich_superop(h1, id) - sandwich_superop(id, h1);

  HamiltonianFamily lossless(ansatz, {});
  UExpansionOptions opts;
  opts.k_max = 20;
  opts.build_full = true;
  UExpansion uexp = extract_u_expansion(lossless, 1, 1, opts);
  CHECK((uexp.r_k[1] - series_r1(ad_h0, ad_h1)).cwiseAbs().maxCoeff() < 1e-8);

  // With damping the H0 adjoint action picks up i * (dissipator superop).
  DissipationSpec diss;
  diss.damping_rates = RVec::Constant(2, 0.2);
  CMat dsup = build_liouvillian(CMat::Zero(4, 4), CMat::Zero(4, 4), 0.0, diss);
  HamiltonianFamily lossy(ansatz, diss);
  UExpansion qexp = extract_u_expansion(lossy, 1, 1, opts);
  CMat a0_lossy = ad_h0 + Complex(0, 1) * dsup;
  CHECK((qexp.r_k[1] - series_r1(a0_lossy, ad_h1)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("tracelessness of P_k and the fixed-point coefficient") {
  auto family = test_family(1, 1, 0.8, 74);
  UExpansionOptions opts;
  opts.k_max = 20;
  UExpansion uexp = extract_u_expansion(family, 1, 1, opts);
  SpectralData spec = spectral_analysis(uexp.p_k[0]);

  auto rng = engine(75);
  CVec trace_vec = vectorize(CMat::Identity(2, 2));
  for (int trial = 0; trial < 20; ++trial) {
    CVec rho = vectorize(random_density(2, rng));
    for (int k = 1; k <= 2; ++k) {
      const Complex trace = (trace_vec.transpose() * (uexp.p_k[k] * rho))(0);
      CHECK(std::abs(trace) < 1e-9);
    }
  }

  InternalFeatureSet internal = internal_features(
      uexp, spec, RVec::LinSpaced(5, -1.0, 1.0), povm_operators(1, 1));
  for (int k = 1; k <= uexp.k_max; ++k) {
    // c^(k)_{1 alpha'} = 0: nothing ever feeds the fixed point.
    CHECK(internal.c[size_t(k)].row(0).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("spectral analysis flags and fixed points") {
  // Measure-reset-only reservoir (U = I): every memory state is fixed.
  FixedUnitaryFamily identity_family(CMat::Identity(4, 4));
  CMat p0 = memory_step_matrix(identity_family, 0.0, 1, 1);
  SpectralData spec = spectral_analysis(p0);
  CHECK(spec.degenerate_periphery);
  CHECK(std::isinf(spec.memory_time));
  for (Eigen::Index a = 0; a < 4; ++a)
    CHECK(std::abs(spec.eigenvalues(a) - Complex(1, 0)) < 1e-12);

  // No-reset full-system map: the fixed point is maximally mixed.
  auto family = test_family(1, 1, 1.0, 76);
  CMat masked = no_reset_measurement_superop(1, 1) * family.superoperator(0.0);
  SpectralData no_reset = spectral_analysis(masked);
  CHECK((no_reset.fixed_point - CMat::Identity(4, 4) / 4.0).norm() < 1e-9);

  // A generic reset reservoir has a unique unit eigenvalue.
  SpectralData generic = spectral_analysis(memory_step_matrix(family, 0.0, 1, 1));
  CHECK_FALSE(generic.degenerate_periphery);
  CHECK(std::abs(generic.eigenvalues(0) - Complex(1, 0)) < 1e-9);
  CHECK(std::abs(generic.eigenvalues(1)) < 1.0);
  CHECK(generic.memory_time ==
        doctest::Approx(-1.0 / std::log(std::abs(generic.eigenvalues(1)))));
  CHECK(generic.d_eff == int(std::ceil(generic.memory_time)));
  CHECK(validate_density_matrix(generic.fixed_point).ok(1e-9, 1e-9, 1e-9));
  CMat p0g = memory_step_matrix(family, 0.0, 1, 1);
  CHECK((devectorize(p0g * vectorize(generic.fixed_point)) - generic.fixed_point)
            .norm() < 1e-9);

  CHECK_THROWS_AS(spectral_analysis(CMat::Identity(4, 4) * 0.5),
                  std::invalid_argument);
}

TEST_CASE("kernel tables: normalization and spectral envelope") {
  auto family = test_family(2, 1, 1.0, 77);
  UExpansionOptions opts;
  opts.k_max = 24;
  UExpansion uexp = extract_u_expansion(family, 2, 1, opts);
  SpectralData spec = spectral_analysis(uexp.p_k[0]);
  const int n_max = 12;
  VolterraKernels ker =
      volterra_kernels(uexp, spec, povm_operators(2, 1), n_max);

  CHECK(ker.h0.sum() == doctest::Approx(1.0).epsilon(1e-9));
  for (int n1 = 0; n1 <= n_max; ++n1)
    CHECK(std::abs(ker.h1.col(n1).sum()) < 1e-9);
  for (int n1 = 0; n1 <= n_max; ++n1)
    for (int n2 = n1; n2 <= n_max; ++n2) {
      double total = 0.0;
      for (int j = 0; j < ker.num_features; ++j) total += ker.h2[size_t(j)](n1, n2);
      CHECK(std::abs(total) < 1e-9);
    }

  // |h_1(n1)| <= C |lambda_2|^(n1-1), C fitted at n1 = 1.
  const double lambda2 = std::abs(spec.eigenvalues(1));
  const double c_fit = ker.h1.col(1).cwiseAbs().maxCoeff();
  for (int n1 = 2; n1 <= n_max; ++n1)
    CHECK(ker.h1.col(n1).cwiseAbs().maxCoeff() <=
          1.05 * c_fit * std::pow(lambda2, n1 - 1) + 1e-12);

  CHECK_THROWS_AS(volterra_kernels(uexp, spec, povm_operators(2, 1), 0),
                  std::invalid_argument);
}

TEST_CASE("kernels match finite differences of the feature pipeline") {
  auto family = test_family(1, 1, 1.0, 78);
  UExpansionOptions opts;
  opts.k_max = 20;
  UExpansion uexp = extract_u_expansion(family, 1, 1, opts);
  SpectralData spec = spectral_analysis(uexp.p_k[0]);
  const int n_max = 6;
  VolterraKernels ker = volterra_kernels(uexp, spec, povm_operators(1, 1), n_max);
  const CMat fp = spec.fixed_point;

  for (int n1 = 0; n1 <= n_max; ++n1) {
    RVec fd = richardson_difference(
        [&](double eps) {
          return response_row(family, 1, 1, fp, {{n1, eps}}, n_max);
        },
        1e-3);
    for (int j = 0; j < ker.num_features; ++j)
      CHECK(std::abs(fd(j) - ker.h1(j, n1)) <=
            1e-6 * std::max(1e-3, std::abs(ker.h1(j, n1))));
  }

  // Mixed partial for 0 < n1 < n2 equals h_2(n1, n2).
  const double eps = 1e-3;
  const int n1 = 1, n2 = 3;
  auto mixed = [&](double ea, double eb) {
    return response_row(family, 1, 1, fp, {{n1, ea}, {n2, eb}}, n_max);
  };
  RVec cross = (mixed(eps, eps) - mixed(eps, -eps) - mixed(-eps, eps) +
                mixed(-eps, -eps)) /
               (4 * eps * eps);
  for (int j = 0; j < ker.num_features; ++j)
    CHECK(std::abs(cross(j) - ker.h2[size_t(j)](n1, n2)) <
          1e-4 * std::max(1.0, std::abs(ker.h2[size_t(j)](n1, n2))));

  // Diagonal: second derivative / 2 equals h_2(n, n).
  RVec base = response_row(family, 1, 1, fp, {}, n_max);
  auto single = [&](double e) {
    return response_row(family, 1, 1, fp, {{2, e}}, n_max);
  };
  RVec diag = (single(eps) - 2 * base + single(-eps)) / (eps * eps) / 2.0;
  for (int j = 0; j < ker.num_features; ++j)
    CHECK(std::abs(diag(j) - ker.h2[size_t(j)](2, 2)) <
          1e-4 * std::max(1.0, std::abs(ker.h2[size_t(j)](2, 2))));
}

TEST_CASE("no-reset construction has vanishing kernels") {
  auto family = test_family(1, 1, 1.0, 79);
  VolterraKernels ker = no_reset_kernels(family, 1, 1, 6, 8);
  CHECK(ker.h1.cwiseAbs().maxCoeff() < 1e-10);
  for (const auto& h2 : ker.h2) CHECK(h2.cwiseAbs().maxCoeff() < 1e-10);
  // h_0 is the uniform readout distribution at the mixed state.
  CHECK((ker.h0 - RVec::Constant(2, 0.5)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("degenerate periphery refuses kernel computation") {
  FixedUnitaryFamily identity_family(CMat::Identity(4, 4));
  UExpansionOptions opts;
  opts.k_max = 2;
  UExpansion uexp = extract_u_expansion(identity_family, 1, 1, opts);
  SpectralData spec = spectral_analysis(uexp.p_k[0]);
  CHECK(spec.degenerate_periphery);
  CHECK_THROWS_AS(volterra_kernels(uexp, spec, povm_operators(1, 1), 4),
                  std::runtime_error);
}

TEST_CASE("internal features and their reconstruction of pipeline responses") {
  auto family = test_family(1, 1, 1.0, 80);
  UExpansionOptions opts;
  opts.k_max = 20;
  UExpansion uexp = extract_u_expansion(family, 1, 1, opts);
  SpectralData spec = spectral_analysis(uexp.p_k[0]);

  RVec grid(2);
  grid << 0.3, -0.3;
  InternalFeatureSet internal =
      internal_features(uexp, spec, grid, povm_operators(1, 1));

  // 4^M - 1 internal features: row 0 is identically zero.
  CHECK(internal.features.rows() == 4);
  CHECK(internal.features.row(0).cwiseAbs().maxCoeff() < 1e-12);

  // F_alpha(0) = 0.
  RVec zero_grid(1);
  zero_grid << 0.0;
  InternalFeatureSet at_zero =
      internal_features(uexp, spec, zero_grid, povm_operators(1, 1));
  CHECK(at_zero.features.cwiseAbs().maxCoeff() < 1e-15);

  // Complex features come in conjugate pairs with conjugate eigenvalues.
  for (Eigen::Index a = 1; a < 4; ++a) {
    if (std::abs(spec.eigenvalues(a).imag()) < 1e-12) continue;
    bool found = false;
    for (Eigen::Index b = 1; b < 4; ++b) {
      if (std::abs(spec.eigenvalues(b) - std::conj(spec.eigenvalues(a))) > 1e-9)
        continue;
      found = true;
      CHECK((internal.features.row(b) - internal.features.row(a).conjugate())
                .cwiseAbs()
                .maxCoeff() < 1e-8);
    }
    CHECK(found);
  }

  // Single-past-step response: sum_alpha nu lambda^(p-1) F_alpha(u).
  const CMat fp = spec.fixed_point;
  RunOptions ro;
  ro.validate = false;
  for (int p : {1, 2, 3}) {
    for (int g = 0; g < 2; ++g) {
      RVec inputs = RVec::Zero(p + 1);
      inputs(0) = grid(g);
      FeatureSeries fs = run_expected_features(family, 1, 1, inputs, fp, ro);
      RVec baseline_inputs = RVec::Zero(p + 1);
      FeatureSeries base =
          run_expected_features(family, 1, 1, baseline_inputs, fp, ro);
      RVec response = (fs.probabilities.row(p) - base.probabilities.row(p)).transpose();
      RVec predicted = reconstruct_single_step_response(internal, spec, p, g);
      CHECK((response - predicted).cwiseAbs().maxCoeff() < 1e-5);
    }
  }
}

TEST_CASE("cross-step memory modes") {
  auto family = test_family(1, 1, 1.0, 81);
  UExpansionOptions opts;
  opts.k_max = 16;
  UExpansion uexp = extract_u_expansion(family, 1, 1, opts);
  SpectralData spec = spectral_analysis(uexp.p_k[0]);
  RVec grid(1);
  grid << 0.3;
  InternalFeatureSet internal =
      internal_features(uexp, spec, grid, povm_operators(1, 1));

  // P = 1 reduces to the internal-feature coefficients.
  CrossStepModes one = single_step_memory_decomposition(internal, 1);
  for (int a = 0; a < 4; ++a)
    for (int k = 0; k < one.k_max; ++k)
      CHECK(one.at({a}, {k}) == internal.c[size_t(k) + 1](a, 0));

  // Modes entering the fixed point anywhere vanish.
  CrossStepModes two = single_step_memory_decomposition(internal, 2);
  for (int a = 0; a < 4; ++a)
    for (int k1 = 0; k1 < 3; ++k1)
      for (int k2 = 0; k2 < 3; ++k2) CHECK(std::abs(two.at({0, a}, {k1, k2})) == 0.0);

  // Two-input cross response reconstructed with lambda-power weights, at two
  // separations.
  const double u_a = 0.3, u_b = 0.3;
  auto cross_response = [&](int n1, int n2) {
    const CMat fp = spec.fixed_point;
    RVec both = response_row(family, 1, 1, fp, {{n1, u_a}, {n2, u_b}}, n2 + 1);
    RVec only_a = response_row(family, 1, 1, fp, {{n1, u_a}}, n2 + 1);
    RVec only_b = response_row(family, 1, 1, fp, {{n2, u_b}}, n2 + 1);
    RVec none = response_row(family, 1, 1, fp, {}, n2 + 1);
    return RVec(both - only_a - only_b + none);
  };
  auto cross_predicted = [&](int n1, int n2) {
    CVec acc = CVec::Zero(internal.nu.rows());
    for (int a1 = 1; a1 < 4; ++a1)
      for (int a2 = 1; a2 < 4; ++a2) {
        Complex f(0, 0);
        double upow_a = 1.0;
        for (int k1 = 1; k1 <= two.k_max; ++k1) {
          upow_a *= u_a;
          double upow_b = 1.0;
          for (int k2 = 1; k2 <= two.k_max; ++k2) {
            upow_b *= u_b;
            f += two.at({a1, a2}, {k1 - 1, k2 - 1}) * upow_a * upow_b;
          }
        }
        acc += internal.nu.col(a1) * std::pow(spec.eigenvalues(a1), n1 - 1) *
               std::pow(spec.eigenvalues(a2), n2 - n1 - 1) * f;
      }
    return RVec(acc.real());
  };
  for (auto [n1, n2] : {std::pair{1, 2}, {1, 3}}) {
    CHECK((cross_response(n1, n2) - cross_predicted(n1, n2)).cwiseAbs().maxCoeff() <
          1e-5);
  }

  CHECK_THROWS_AS(single_step_memory_decomposition(internal, 4),
                  std::invalid_argument);
}

TEST_CASE("fixed-point-preserving encodings are memoryless beyond lag zero") {
  // Input acts only on the memory qubit; a memory-controlled NOT feeds the
  // readout.  The memory map is unital, so P_k rho_FP = 0 for k >= 1.
  CMat cnot = CMat::Zero(4, 4);
  cnot(0, 0) = cnot(1, 1) = cnot(2, 3) = cnot(3, 2) = 1.0;

  class MemoryDriveFamily final : public ChannelFamily {
   public:
    explicit MemoryDriveFamily(CMat cnot) : cnot_(std::move(cnot)) {}
    int qubits() const override { return 2; }
    std::unique_ptr<Prepared> prepare(double u) const override {
      struct P final : Prepared {
        CMat un;
        CMat apply(const CMat& x) const override { return un * x * un.adjoint(); }
      };
      const double theta = 0.9;
      CMat rx(2, 2);
      rx << std::cos(theta / 2), Complex(0, -1) * std::sin(theta / 2),
          Complex(0, -1) * std::sin(theta / 2), std::cos(theta / 2);
      CMat rz = CMat::Zero(2, 2);
      rz(0, 0) = std::exp(Complex(0, -0.8 * u));
      rz(1, 1) = std::exp(Complex(0, 0.8 * u));
      auto p = std::make_unique<P>();
      p->un = cnot_ * tensor_product(rz * rx, CMat::Identity(2, 2));
      return p;
    }

   private:
    CMat cnot_;
  };

  MemoryDriveFamily family(cnot);
  UExpansionOptions opts;
  opts.k_max = 12;
  UExpansion uexp = extract_u_expansion(family, 1, 1, opts);
  SpectralData spec = spectral_analysis(uexp.p_k[0]);
  REQUIRE_FALSE(spec.degenerate_periphery);
  CHECK((spec.fixed_point - CMat::Identity(2, 2) / 2.0).norm() < 1e-9);

  CVec fp = vectorize(spec.fixed_point);
  for (int k = 1; k <= 4; ++k) CHECK((uexp.p_k[size_t(k)] * fp).norm() < 1e-9);

  VolterraKernels ker = volterra_kernels(uexp, spec, povm_operators(1, 1), 6);
  for (int n1 = 1; n1 <= 6; ++n1)
    CHECK(ker.h1.col(n1).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("jacobian rank of a single-readout reservoir is 1") {
  auto family = test_family(1, 1, 1.0, 82);
  JacobianOptions opts;
  opts.max_lag = 6;
  JacobianReport report = jacobian_rank(family, 1, 1, opts);
  CHECK(report.rank == 1);
  CHECK(report.singular_values.size() == 1);

  opts.sv_threshold = 2.0;
  CHECK_THROWS_AS(jacobian_rank(family, 1, 1, opts), std::invalid_argument);
}

TEST_SUITE_END();
