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

#ifndef NISQRC_RNG_HPP
#define NISQRC_RNG_HPP

#include <cstdint>
#include <initializer_list>
#include <random>

// Seeding policy: every random draw in the library comes from a
// std::mt19937_64 whose 64-bit seed is derived from a master seed and a list
// of stream identifiers through the SplitMix64 finalizer.  The derivation is
// a pure function, so sweep points and parallel tasks get independent,
// reproducible streams regardless of scheduling.

namespace nisqrc {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// derive_seed(master, {a, b, ...}) folds each stream id in turn:
// s <- splitmix64(s ^ splitmix64(id)).
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> stream) {
  std::uint64_t s = splitmix64(master);
  for (std::uint64_t id : stream) s = splitmix64(s ^ splitmix64(id));
  return s;
}

inline std::mt19937_64 make_engine(std::uint64_t seed) {
  return std::mt19937_64(seed);
}

}  // namespace nisqrc

#endif  // NISQRC_RNG_HPP
