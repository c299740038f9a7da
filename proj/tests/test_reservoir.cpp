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

#include <random>
#include <sstream>

#include "nisqrc/reservoir.hpp"
#include "nisqrc/volterra.hpp"
#include "test_helpers.hpp"

using namespace nisqrc;
using namespace nisqrc::testing;

namespace {

// Fixed-unitary channel family for map-level tests.
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

HamiltonianFamily test_family(int m, int r, double tau, std::uint64_t seed,
                              HamiltonianHyper hyper = {1.0, 1.0, 1.0, 0.5, 0.5},
                              DissipationSpec diss = {}) {
  return HamiltonianFamily(
      draw_hamiltonian_ansatz(m, r, tau, all_to_all_edges(m + r), hyper, seed),
      std::move(diss));
}

RVec random_inputs(int n, std::uint64_t seed) {
  auto rng = engine(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  RVec u(n);
  for (int i = 0; i < n; ++i) u(i) = unif(rng);
  return u;
}

}  // namespace

TEST_SUITE_BEGIN("reservoir");

TEST_CASE("memory step map: identity and swap channels") {
  CMat c_id = memory_step_map(CMat::Identity(16, 16), 1, 1);
  CHECK((c_id - CMat::Identity(4, 4)).norm() < 1e-14);

  // SWAP moves the memory state out; every input lands on |0><0|.
  CMat swap = CMat::Zero(4, 4);
  swap(0, 0) = swap(3, 3) = swap(1, 2) = swap(2, 1) = 1.0;
  CMat c_swap = memory_step_map(sandwich_superop(swap, swap), 1, 1);
  auto rng = engine(50);
  CMat ground = CMat::Zero(2, 2);
  ground(0, 0) = 1.0;
  for (int i = 0; i < 3; ++i) {
    CMat rho = random_density(2, rng);
    CHECK((devectorize(c_swap * vectorize(rho)) - ground).norm() < 1e-13);
  }

  // Random unitary: against the embed -> apply -> trace oracle.
  CMat un = random_unitary(8, rng);
  FixedUnitaryFamily family(un);
  CMat step = memory_step_matrix(family, 0.0, 1, 2);
  CMat dense = memory_step_map(family.superoperator(0.0), 1, 2);
  CHECK((step - dense).norm() < 1e-12);
  CMat rho = random_density(2, rng);
  CMat oracle = partial_trace_readout(
      un * embed_with_readout_ground(rho, 2) * un.adjoint(), 1, 2);
  CHECK((devectorize(step * vectorize(rho)) - oracle).norm() < 1e-12);
  CHECK(is_trace_preserving(step));
}

TEST_CASE("expected features: fixed point, normalization, determinism") {
  auto family = test_family(2, 1, 1.0, 51);

  // Null input converges to a fixed feature vector.
  FeatureSeries fixed = run_expected_features(family, 2, 1, RVec::Zero(220));
  RVec last = fixed.probabilities.row(219).transpose();
  RVec prev = fixed.probabilities.row(218).transpose();
  CHECK((last - prev).lpNorm<Eigen::Infinity>() < 1e-10);

  RVec inputs = random_inputs(60, 52);
  FeatureSeries series = run_expected_features(family, 2, 1, inputs);
  for (int n = 0; n < series.length; ++n) {
    CHECK(series.probabilities.row(n).sum() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(series.probabilities.row(n).minCoeff() > -1e-10);
    CHECK(series.probabilities.row(n).maxCoeff() < 1.0 + 1e-10);
  }

  // Bit-identical re-run.
  FeatureSeries again = run_expected_features(family, 2, 1, inputs);
  CHECK((series.probabilities - again.probabilities).norm() == 0.0);

  RVec bad(2);
  bad << 0.0, 1.5;
  CHECK_THROWS_AS(run_expected_features(family, 2, 1, bad), std::invalid_argument);
}

TEST_CASE("time invariance after washout") {
  auto family = test_family(1, 1, 1.0, 53);
  SpectralData spec = spectral_analysis(memory_step_matrix(family, 0.0, 1, 1));
  const int washout = int(10 * std::ceil(spec.memory_time)) + 10;

  RVec block = random_inputs(50, 54);
  auto run_from = [&](const CMat& rho0) {
    RVec inputs(washout + block.size());
    inputs.head(washout).setZero();
    inputs.tail(block.size()) = block;
    FeatureSeries fs = run_expected_features(family, 1, 1, inputs, rho0);
    return RMat(fs.probabilities.bottomRows(block.size()));
  };

  auto rng = engine(55);
  RMat a = run_from(CMat());  // ground state
  RMat b = run_from(random_density(2, rng));
  CHECK((a - b).lpNorm<Eigen::Infinity>() < 1e-8);
}

TEST_CASE("no-reset runs thermalize and forget the input") {
  auto family = test_family(1, 1, 1.0, 56);

  RVec inputs = random_inputs(60, 57);
  std::vector<CMat> states;
  FeatureSeries series = run_no_reset_features(family, 1, 1, inputs, {}, {}, &states);

  // Frobenius distance to the fully mixed state decays; purity is monotone.
  const CMat mixed = CMat::Identity(4, 4) / 4.0;
  double last_purity = 1.0;
  for (size_t n = 0; n < states.size(); ++n) {
    const double p = (states[n] * states[n]).trace().real();
    CHECK(p <= last_purity + 1e-10);
    last_purity = p;
  }
  CHECK((states.back() - mixed).norm() < 1e-6);

  // Features at the mixed state are uniform.
  CHECK((series.probabilities.row(59).transpose() - RVec::Constant(2, 0.5))
            .lpNorm<Eigen::Infinity>() < 1e-6);

  // Amnesia: the last feature row no longer depends on u_1.
  const double eps = 1e-3;
  RVec up = inputs, dn = inputs;
  up(0) += eps;
  dn(0) -= eps;
  FeatureSeries fp = run_no_reset_features(family, 1, 1, up);
  FeatureSeries fm = run_no_reset_features(family, 1, 1, dn);
  const double diff =
      (fp.probabilities.row(59) - fm.probabilities.row(59)).lpNorm<Eigen::Infinity>() /
      (2 * eps);
  CHECK(diff < 1e-8);
}

TEST_CASE("sampling: exact cases and the binomial error envelope") {
  FeatureSeries expected;
  expected.length = 2;
  expected.num_features = 2;
  expected.probabilities.resize(2, 2);
  expected.probabilities << 0.3, 0.7, 1.0, 0.0;

  FeatureSeries one_shot = sample_features(expected, 1, 99);
  for (int n = 0; n < 2; ++n) {
    CHECK(one_shot.samples.row(n).sum() == doctest::Approx(1.0));
    CHECK(one_shot.samples.row(n).maxCoeff() == doctest::Approx(1.0));
  }
  // Deterministic rows reproduce exactly at any S.
  CHECK(one_shot.samples(1, 0) == 1.0);
  FeatureSeries many = sample_features(expected, 12345, 99);
  CHECK(many.samples(1, 0) == 1.0);
  CHECK(many.samples(1, 1) == 0.0);

  // Seeded sampling is reproducible; different seeds differ.
  FeatureSeries again = sample_features(expected, 12345, 99);
  CHECK((again.samples - many.samples).norm() == 0.0);

  // RMSE against the binomial prediction at S = 1e5, K = 16.
  auto rng = engine(58);
  const int rows = 64, k = 16;
  FeatureSeries wide;
  wide.length = rows;
  wide.num_features = k;
  wide.probabilities.resize(rows, k);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int n = 0; n < rows; ++n) {
    RVec p(k);
    for (int j = 0; j < k; ++j) p(j) = unif(rng);
    wide.probabilities.row(n) = (p / p.sum()).transpose();
  }
  const long long shots = 100000;
  FeatureSeries sampled = sample_features(wide, shots, 4242);
  double mse = 0.0, predicted = 0.0;
  for (int n = 0; n < rows; ++n)
    for (int j = 0; j < k; ++j) {
      const double p = wide.probabilities(n, j);
      mse += std::pow(sampled.samples(n, j) - p, 2);
      predicted += p * (1.0 - p) / double(shots);
    }
  const double ratio = std::sqrt(mse / (rows * k)) / std::sqrt(predicted / (rows * k));
  CHECK(ratio > 0.5);
  CHECK(ratio < 2.0);

  FeatureSeries invalid = expected;
  invalid.probabilities(0, 0) = 0.9;  // row sums to 1.6
  CHECK_THROWS_AS(sample_features(invalid, 10, 1), std::invalid_argument);
}

TEST_CASE("probability <-> moment transform") {
  FeatureSeries probs;
  probs.length = 2;
  probs.num_features = 2;
  probs.probabilities.resize(2, 2);
  probs.probabilities << 1.0, 0.0, 0.5, 0.5;
  FeatureSeries moments = probability_to_moment(probs);
  CHECK(moments.probabilities(0, 0) == doctest::Approx(1.0));
  CHECK(moments.probabilities(0, 1) == doctest::Approx(1.0));
  CHECK(moments.probabilities(1, 0) == doctest::Approx(1.0));
  CHECK(moments.probabilities(1, 1) == doctest::Approx(0.0));

  // Round trip on random simplex rows.
  auto rng = engine(59);
  FeatureSeries wide;
  wide.length = 8;
  wide.num_features = 16;
  wide.probabilities.resize(8, 16);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int n = 0; n < 8; ++n) {
    RVec p(16);
    for (int j = 0; j < 16; ++j) p(j) = unif(rng);
    wide.probabilities.row(n) = (p / p.sum()).transpose();
  }
  FeatureSeries back = moment_to_probability(probability_to_moment(wide));
  CHECK((back.probabilities - wide.probabilities).lpNorm<Eigen::Infinity>() < 1e-12);

  CHECK_THROWS_AS(walsh_hadamard_matrix(12), std::invalid_argument);
}

TEST_CASE("quantized pipeline tracks the direct run") {
  auto family = test_family(1, 1, 1.0, 60);
  QuantizedPipeline grid(family, 1, 1, 257);

  RVec inputs = random_inputs(40, 61);
  FeatureSeries direct = run_expected_features(family, 1, 1, inputs);
  FeatureSeries quant = grid.run(inputs);
  CHECK((direct.probabilities - quant.probabilities).lpNorm<Eigen::Infinity>() <
        5e-5);

  // Grid values are hit exactly.
  RVec on_grid(3);
  on_grid << -1.0, 0.0, 1.0;
  FeatureSeries a = run_expected_features(family, 1, 1, on_grid);
  FeatureSeries b = grid.run(on_grid);
  CHECK((a.probabilities - b.probabilities).lpNorm<Eigen::Infinity>() < 1e-12);

  // Deterministic re-run.
  FeatureSeries c = grid.run(inputs);
  CHECK((quant.probabilities - c.probabilities).norm() == 0.0);
}

TEST_CASE("feature CSV serialization") {
  FeatureSeries fs;
  fs.length = 1;
  fs.num_features = 2;
  fs.probabilities.resize(1, 2);
  fs.probabilities << 0.25, 0.75;
  std::ostringstream out;
  write_feature_csv(out, fs);
  CHECK(out.str() == "n,j,x,xbar,shots\n1,0,0.25,,\n1,1,0.75,,\n");

  FeatureSeries sampled = sample_features(fs, 4, 7);
  std::ostringstream with_samples;
  write_feature_csv(with_samples, sampled);
  CHECK(with_samples.str().find(",4\n") != std::string::npos);
}

TEST_SUITE_END();
