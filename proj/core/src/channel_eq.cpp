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

#include "nisqrc/channel_eq.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>

#include "nisqrc/rng.hpp"

namespace nisqrc {

namespace {

// Real roots of x^3 + a x^2 + b x + c via the companion matrix.
std::vector<double> cubic_real_roots(double a, double b, double c) {
  Eigen::Matrix3d companion = Eigen::Matrix3d::Zero();
  companion(1, 0) = 1.0;
  companion(2, 1) = 1.0;
  companion(0, 2) = -c;
  companion(1, 2) = -b;
  companion(2, 2) = -a;
  Eigen::EigenSolver<Eigen::Matrix3d> es(companion);
  std::vector<double> roots;
  for (int i = 0; i < 3; ++i) {
    const auto z = es.eigenvalues()(i);
    if (std::abs(z.imag()) < 1e-8 * std::max(1.0, std::abs(z.real())))
      roots.push_back(z.real());
  }
  return roots;
}

// f^{-1}(v): real root of f(x) = v nearest the identity branch on [-6, 6].
double invert_nonlinearity(double v, int* fallbacks) {
  // f(x) = v  <=>  x^3 - 6 x^2 - 100 x + 100 v = 0   (divided by -0.01)
  const auto roots = cubic_real_roots(-6.0, -100.0, 100.0 * v);
  double best = 0.0, best_dist = 0.0;
  bool found = false;
  for (double r : roots) {
    if (r < -6.0 || r > 6.0) continue;
    const double dist = std::abs(r - v);
    if (!found || dist < best_dist) {
      best = r;
      best_dist = dist;
      found = true;
    }
  }
  if (found) return best;
  if (fallbacks) ++*fallbacks;
  for (double r : roots) {
    const double dist = std::abs(r - v);
    if (!found || dist < best_dist) {
      best = r;
      best_dist = dist;
      found = true;
    }
  }
  if (!found)  // a real cubic always has a real root; defensive only
    throw std::runtime_error("direct_inverse: no real root");
  return best;
}

}  // namespace

int symbol_class(int symbol) {
  for (int k = 0; k < 4; ++k)
    if (kCESymbols[k] == symbol) return k;
  throw std::invalid_argument("symbol " + std::to_string(symbol) +
                              " is not in {-3,-1,1,3}");
}

RVec distortion_taps() {
  RVec h(8);
  h << 1.0, 0.18, -0.1, 0.091, -0.05, 0.04, 0.03, 0.01;
  return h;
}

double distortion_nonlinearity(double x) {
  return x + 0.06 * x * x - 0.01 * x * x * x;
}

std::vector<int> generate_message(int length, std::uint64_t seed) {
  if (length < 1) throw std::invalid_argument("generate_message: length >= 1");
  auto rng = make_engine(derive_seed(seed, {0x6d657373616765ULL}));
  std::uniform_int_distribution<int> pick(0, 3);
  std::vector<int> m(length);
  for (int n = 0; n < length; ++n) m[n] = kCESymbols[pick(rng)];
  return m;
}

RVec distort(const std::vector<int>& message, double snr_db, std::uint64_t seed) {
  const RVec h = distortion_taps();
  const double sigma = std::pow(10.0, -snr_db / 20.0);  // variance 10^(-SNR/10)
  auto rng = make_engine(derive_seed(seed, {0x64697374ULL}));
  std::normal_distribution<double> noise(0.0, 1.0);
  const int n_total = static_cast<int>(message.size());
  RVec u(n_total);
  for (int n = 0; n < n_total; ++n) {
    double acc = 0.0;
    for (int k = 0; k < h.size() && k <= n; ++k) acc += h(k) * message[n - k];
    u(n) = distortion_nonlinearity(acc) + sigma * noise(rng);
  }
  return u;
}

Normalization normalize_input(const RVec& u, std::optional<double> u_scale) {
  if (!u.allFinite()) throw std::invalid_argument("normalize_input: non-finite u");
  Normalization result;
  result.u_scale = u_scale ? *u_scale : u.cwiseAbs().maxCoeff();
  if (result.u_scale <= 0.0)
    throw std::invalid_argument("normalize_input: zero signal");
  result.normalized.resize(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    double v = u(i) / result.u_scale;
    if (v > 1.0 || v < -1.0) {
      ++result.clipped;
      v = std::clamp(v, -1.0, 1.0);
    }
    result.normalized(i) = v;
  }
  return result;
}

CEDataset make_ce_dataset(int length, double snr_db, std::uint64_t seed,
                          std::optional<double> u_scale) {
  CEDataset data;
  data.message = generate_message(length, seed);
  data.received = distort(data.message, snr_db, derive_seed(seed, {0x6e6f697365ULL}));
  Normalization norm = normalize_input(data.received, u_scale);
  data.normalized = std::move(norm.normalized);
  data.u_scale = norm.u_scale;
  data.clipped = norm.clipped;
  data.snr_db = snr_db;
  data.seed = seed;
  return data;
}

DirectInverseResult direct_inverse_baseline(const RVec& u) {
  const RVec h = distortion_taps();
  if (h(0) == 0.0) throw std::invalid_argument("direct_inverse: h(0) must be nonzero");
  const int n_total = static_cast<int>(u.size());

  DirectInverseResult result;
  RVec deconv(n_total);
  for (int n = 0; n < n_total; ++n)
    deconv(n) = invert_nonlinearity(u(n), &result.root_fallbacks);

  // Causal inverse filter of h, truncated to the signal length.
  RVec g(n_total);
  g(0) = 1.0 / h(0);
  for (int k = 1; k < n_total; ++k) {
    double acc = 0.0;
    for (int j = 1; j < h.size() && j <= k; ++j) acc += h(j) * g(k - j);
    g(k) = -acc / h(0);
  }

  result.symbols.resize(n_total);
  for (int n = 0; n < n_total; ++n) {
    double y = 0.0;
    for (int k = 0; k <= n; ++k) y += g(k) * deconv(n - k);
    result.symbols[n] = round_to_symbol(y);
  }
  return result;
}

int round_to_symbol(double value) {
  int best = kCESymbols[0];
  double best_dist = std::abs(value - best);
  for (int s : kCESymbols) {
    const double dist = std::abs(value - s);
    if (dist < best_dist - 1e-15 ||
        (std::abs(dist - best_dist) <= 1e-15 && std::abs(s) < std::abs(best))) {
      best = s;
      best_dist = dist;
    }
  }
  return best;
}

std::vector<int> rounding_baseline(const RVec& u) {
  std::vector<int> out(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) out[i] = round_to_symbol(u(i));
  return out;
}

double error_rate(const std::vector<int>& predicted, const std::vector<int>& truth) {
  if (predicted.size() != truth.size())
    throw std::invalid_argument("error_rate: length mismatch");
  if (predicted.empty()) throw std::invalid_argument("error_rate: empty input");
  int errors = 0;
  for (size_t i = 0; i < truth.size(); ++i) errors += predicted[i] != truth[i];
  return double(errors) / double(truth.size());
}

void write_dataset_csv(std::ostream& os, const CEDataset& data) {
  os << "n,m,u,utilde\n";
  char buf[96];
  for (size_t n = 0; n < data.message.size(); ++n) {
    std::snprintf(buf, sizeof(buf), "%zu,%d,%.17g,%.17g\n", n + 1,
                  data.message[n], data.received(Eigen::Index(n)),
                  data.normalized(Eigen::Index(n)));
    os << buf;
  }
}

}  // namespace nisqrc
