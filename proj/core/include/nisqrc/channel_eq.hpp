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

#ifndef NISQRC_CHANNEL_EQ_HPP
#define NISQRC_CHANNEL_EQ_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

#include "nisqrc/linalg.hpp"

// Channel equalization: recover a 4-symbol message from its reception
// through a dispersive nonlinear noisy channel.

namespace nisqrc {

inline constexpr std::array<int, 4> kCESymbols = {-3, -1, 1, 3};
int symbol_class(int symbol);  // index into kCESymbols; throws if not one

// The distortion model: u(n) = f( sum_{k=0}^{7} h(k) m(n-k) ) + noise,
// m(n) = 0 for n <= 0, noise ~ N(0, 10^(-SNR/10)).
RVec distortion_taps();                 // h, 8 taps
double distortion_nonlinearity(double x);  // f(x) = x + 0.06 x^2 - 0.01 x^3

std::vector<int> generate_message(int length, std::uint64_t seed);
RVec distort(const std::vector<int>& message, double snr_db, std::uint64_t seed);

struct Normalization {
  RVec normalized;      // u / u_scale, clipped to [-1, 1]
  double u_scale = 0.0;
  int clipped = 0;      // count of clipped samples (test-time diagnostic)
};

// Without a scale: fits u_scale = max|u| (training).  With one: reuses it
// and clips out-of-range values.
Normalization normalize_input(const RVec& u,
                              std::optional<double> u_scale = std::nullopt);

struct CEDataset {
  std::vector<int> message;
  RVec received;
  RVec normalized;
  double snr_db = 0.0;
  double u_scale = 0.0;
  std::uint64_t seed = 0;
  int clipped = 0;
};

CEDataset make_ce_dataset(int length, double snr_db, std::uint64_t seed,
                          std::optional<double> u_scale = std::nullopt);

struct DirectInverseResult {
  std::vector<int> symbols;
  int root_fallbacks = 0;  // samples where no real root lay in [-6, 6]
};

// y(n) = sum_k g(k) f^{-1}(u(n-k)) with g the causal inverse filter of h,
// rounded to the nearest symbol.  f^{-1} picks the real root nearest the
// identity branch on [-6, 6]; failures fall back to the nearest real root.
DirectInverseResult direct_inverse_baseline(const RVec& u);

// Nearest symbol in {-3,-1,1,3}; ties broken toward smaller magnitude.
std::vector<int> rounding_baseline(const RVec& u);
int round_to_symbol(double value);

double error_rate(const std::vector<int>& predicted,
                  const std::vector<int>& truth);

// CSV serialization: columns n, m, u, utilde.
void write_dataset_csv(std::ostream& os, const CEDataset& data);

}  // namespace nisqrc

#endif  // NISQRC_CHANNEL_EQ_HPP
