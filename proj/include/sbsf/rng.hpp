// Copyright 2026 The sbsf Authors
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

namespace sbsf {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr std::uint32_t kM0 = 0xD2511F53u;
  static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kW0 = 0x9E3779B9u;
  static constexpr std::uint32_t kW1 = 0xBB67AE85u;

  static constexpr Counter generate(Counter ctr, Key key) noexcept {
    round(ctr, key);
    for (int r = 1; r < 10; ++r) {
      key[0] += kW0;
      key[1] += kW1;
      round(ctr, key);
    }
    return ctr;
  }

 private:
  static constexpr void round(Counter& ctr, const Key& key) noexcept {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
};

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Hierarchical 64-bit stream identifier. Children are derived by hashing, so
// a key path such as seed -> timestep -> purpose names one independent family
// of streams regardless of the order in which work is scheduled.
class StreamKey {
 public:
  constexpr StreamKey() = default;
  constexpr explicit StreamKey(std::uint64_t value) : value_(splitmix64(value)) {}

  [[nodiscard]] constexpr StreamKey child(std::uint64_t id) const noexcept {
    StreamKey k;
    k.value_ = splitmix64(value_ ^ splitmix64(id + 0x632BE59BD9B4E019ull));
    return k;
  }
  [[nodiscard]] constexpr std::uint64_t value() const noexcept { return value_; }

 private:
  std::uint64_t value_ = 0;
};

// Purpose tags for key derivation.
namespace stream_tag {
inline constexpr std::uint64_t kPrior = 1;
inline constexpr std::uint64_t kGradient = 2;
inline constexpr std::uint64_t kMixtureSample = 3;
inline constexpr std::uint64_t kCem = 4;
inline constexpr std::uint64_t kRateEstimate = 5;
inline constexpr std::uint64_t kNominal = 6;
inline constexpr std::uint64_t kInit = 7;
inline constexpr std::uint64_t kFilter = 8;
inline constexpr std::uint64_t kScenario = 9;
}  // namespace stream_tag

// One stream of uniforms/normals addressed by (key, a, b, c). The low counter
// word walks through blocks; the three ids select the stream.
class RandomStream {
 public:
  RandomStream(StreamKey key, std::uint32_t a = 0, std::uint32_t b = 0, std::uint32_t c = 0) noexcept
      : key_{static_cast<std::uint32_t>(key.value()), static_cast<std::uint32_t>(key.value() >> 32)},
        ctr_{0, a, b, c} {}

  std::uint32_t next_u32() noexcept {
    if (pos_ == 4) {
      block_ = Philox4x32::generate(ctr_, key_);
      ++ctr_[0];
      pos_ = 0;
    }
    return block_[pos_++];
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept {
    const std::uint64_t hi = next_u32();
    const std::uint64_t lo = next_u32();
    return static_cast<double>((hi << 21) ^ (lo >> 11)) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; the paired value is cached.
  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(phi);
    has_spare_ = true;
    return r * std::cos(phi);
  }

 private:
  Philox4x32::Key key_;
  Philox4x32::Counter ctr_;
  Philox4x32::Counter block_{};
  int pos_ = 4;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace sbsf
