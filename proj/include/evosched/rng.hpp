/*
 * Copyright (c) 2026 The evosched Authors. All Rights Reserved
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

/// @file rng.hpp
/// @brief Named random streams derived from one scenario seed.
///
/// Each consumer asks for a stream by purpose and index, e.g.
/// `stream(seed, "trace", end_id)`. Streams are independent of one another,
/// so adding an end or a consumer never perturbs existing streams.

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace evosched {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

/// Seed for the stream named (purpose, indices...) under a root seed.
inline std::uint64_t stream_seed(std::uint64_t root, std::string_view purpose,
                                 std::initializer_list<std::uint64_t> indices = {}) noexcept {
  std::uint64_t h = detail::splitmix64(root ^ detail::fnv1a(purpose));
  for (std::uint64_t i : indices) h = detail::splitmix64(h ^ detail::splitmix64(i + 1));
  return h;
}

inline std::mt19937_64 stream(std::uint64_t root, std::string_view purpose,
                              std::initializer_list<std::uint64_t> indices = {}) {
  return std::mt19937_64(stream_seed(root, purpose, indices));
}

}  // namespace evosched
