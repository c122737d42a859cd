#pragma once

// 16-bit maximal-length LFSR and uniform mappings. One LFSR drives the whole
// engine; consumers receive pre-partitioned blocks so results do not depend
// on execution order (sub-filter k takes words k, K+k, 2K+k, ... of a block
// sequence).

#include <cstdint>
#include <vector>

#include "pfsim/fixed.hpp"

namespace pfsim {

// Fibonacci LFSR, feedback polynomial x^16 + x^15 + x^13 + x^4 + 1
// (taps {16, 15, 13, 4}, maximal length). State must stay nonzero.
class Lfsr16 {
 public:
  explicit Lfsr16(std::uint16_t seed) : state_(seed ? seed : 0xACE1u) {}

  std::uint16_t state() const { return state_; }

  std::uint16_t next() {
    const std::uint16_t w = state_;
    const std::uint16_t bit =
        ((w >> 15) ^ (w >> 14) ^ (w >> 12) ^ (w >> 3)) & 1u;
    state_ = static_cast<std::uint16_t>((w << 1) | bit);
    return state_;
  }

  // Next k successive output words; state advances k steps.
  std::vector<std::uint16_t> next_block(std::size_t k) {
    std::vector<std::uint16_t> words(k);
    for (auto& w : words) w = next();
    return words;
  }

 private:
  std::uint16_t state_;
};

// word / 65536, in [0, 1).
constexpr double uniform01(std::uint16_t word) {
  return static_cast<double>(word) / 65536.0;
}

// Two's-complement word scaled by 2^-15, as a real number in [-1, 1).
constexpr double uniform_signed_real(std::uint16_t word) {
  return static_cast<double>(static_cast<std::int16_t>(word)) / 32768.0;
}

// Same value quantized to Fx16 (nearest-even).
constexpr Fx16 uniform_signed(std::uint16_t word) {
  const auto v = static_cast<std::int32_t>(static_cast<std::int16_t>(word));
  // v / 2^15 in Q9.6 is v / 2^9.
  return Fx16{fx_saturate(round_shift_even(v, 9))};
}

// Stream seeds for the filter and the sensor model are derived from one
// configuration seed; the sensor has a reserved substream so the filter's
// word consumption is unaffected by the sensor model.
inline std::uint16_t derive_stream_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  z ^= z >> 31;
  auto s = static_cast<std::uint16_t>(z & 0xFFFFu);
  return s ? s : 0xACE1u;
}

}  // namespace pfsim
