// Copyright 2026 The tlqg Authors
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

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

#include <Eigen/Dense>

namespace tlqg {

/// Philox4x32-10 block function (Salmon et al., "Parallel random numbers: as easy as 1, 2, 3").
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kM0 = 0xD2511F53u;
  constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u;
  constexpr std::uint32_t kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kW0;
    key[1] += kW1;
  }
  return ctr;
}

enum class NoiseStream : std::uint32_t { kInit = 1, kProcess = 2, kMeasurement = 3 };

/// Fills `out` with standard normals for (seed, rollout, stream, step). Every draw is a
/// pure function of its key and counter, so rollouts can run in any order or in parallel.
inline void standard_normals(std::uint64_t seed, std::uint64_t rollout, NoiseStream stream,
                             std::uint32_t step, Eigen::Ref<Eigen::VectorXd> out) {
  const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed),
                                            static_cast<std::uint32_t>(seed >> 32)};
  const std::uint32_t tag = (static_cast<std::uint32_t>(stream) << 24) |
                            (static_cast<std::uint32_t>(rollout >> 32) & 0x00FFFFFFu);
  constexpr double kInv53 = 1.0 / 9007199254740992.0;  // 2^-53
  for (Eigen::Index i = 0; i < out.size(); i += 2) {
    const auto block = static_cast<std::uint32_t>(i / 2);
    const auto r = philox4x32({block, step, static_cast<std::uint32_t>(rollout), tag}, key);
    const std::uint64_t a = (static_cast<std::uint64_t>(r[0]) << 32) | r[1];
    const std::uint64_t b = (static_cast<std::uint64_t>(r[2]) << 32) | r[3];
    const double u1 = 1.0 - static_cast<double>(a >> 11) * kInv53;  // (0, 1]
    const double u2 = static_cast<double>(b >> 11) * kInv53;        // [0, 1)
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    out(i) = radius * std::cos(angle);
    if (i + 1 < out.size()) out(i + 1) = radius * std::sin(angle);
  }
}

}  // namespace tlqg
