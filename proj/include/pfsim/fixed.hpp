#pragma once

// 16-bit fixed-point kernel: Q9.6 values, 12-bit angles, CORDIC atan2 and
// shift-based division. All operations are pure and saturating (never wrap).

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace pfsim {

// Q9.6 signed fixed point: 1 sign bit, 9 integer bits, 6 fraction bits.
// Range [-512, 512) with resolution 2^-6.
struct Fx16 {
  std::int16_t raw = 0;

  friend constexpr bool operator==(Fx16 a, Fx16 b) { return a.raw == b.raw; }
  friend constexpr bool operator!=(Fx16 a, Fx16 b) { return a.raw != b.raw; }
};

inline constexpr int kFxFracBits = 6;
inline constexpr std::int32_t kFxRawMax = 32767;
inline constexpr std::int32_t kFxRawMin = -32768;

constexpr std::int16_t fx_saturate(std::int64_t raw) {
  if (raw > kFxRawMax) return static_cast<std::int16_t>(kFxRawMax);
  if (raw < kFxRawMin) return static_cast<std::int16_t>(kFxRawMin);
  return static_cast<std::int16_t>(raw);
}

// Round-half-even of value/2^shift, given in integer arithmetic.
constexpr std::int64_t round_shift_even(std::int64_t value, int shift) {
  if (shift == 0) return value;
  const std::int64_t q = value >> shift;           // floor
  const std::int64_t rem = value - (q << shift);   // in [0, 2^shift)
  const std::int64_t half = std::int64_t{1} << (shift - 1);
  if (rem > half || (rem == half && (q & 1))) return q + 1;
  return q;
}

inline Fx16 fx_from_real(double r) {
  const double scaled = std::ldexp(r, kFxFracBits);
  // Nearest-even rounding without relying on the FP environment.
  double fl = std::floor(scaled);
  double frac = scaled - fl;
  std::int64_t n = static_cast<std::int64_t>(fl);
  if (frac > 0.5 || (frac == 0.5 && (n & 1))) ++n;
  return Fx16{fx_saturate(n)};
}

constexpr double fx_to_real(Fx16 v) {
  return static_cast<double>(v.raw) / (1 << kFxFracBits);
}

constexpr Fx16 fx_add(Fx16 a, Fx16 b) {
  return Fx16{fx_saturate(std::int32_t{a.raw} + b.raw)};
}

constexpr Fx16 fx_sub(Fx16 a, Fx16 b) {
  return Fx16{fx_saturate(std::int32_t{a.raw} - b.raw)};
}

// Full-precision product, right shift by 6 with round-to-nearest-even,
// then saturation.
constexpr Fx16 fx_mul(Fx16 a, Fx16 b) {
  const std::int64_t p = std::int64_t{a.raw} * b.raw;
  return Fx16{fx_saturate(round_shift_even(p, kFxFracBits))};
}

// Division by 2^log2_n as the hardware shifter does it: arithmetic right
// shift, truncation toward negative infinity.
constexpr Fx16 shift_div(std::int64_t sum, int log2_n) {
  return Fx16{fx_saturate(sum >> log2_n)};
}

// 12-bit angle: raw in [0, 4095] encodes raw * 2*pi / 4096. Addition and
// subtraction wrap modulo 4096 (i.e. modulo 2*pi).
struct Angle12 {
  std::uint16_t raw = 0;  // always < 4096

  friend constexpr bool operator==(Angle12 a, Angle12 b) { return a.raw == b.raw; }
  friend constexpr bool operator!=(Angle12 a, Angle12 b) { return a.raw != b.raw; }
};

inline constexpr std::uint32_t kAngleModulus = 4096;

constexpr Angle12 angle_add(Angle12 a, Angle12 b) {
  return Angle12{static_cast<std::uint16_t>((a.raw + b.raw) & (kAngleModulus - 1))};
}

constexpr Angle12 angle_sub(Angle12 a, Angle12 b) {
  return Angle12{static_cast<std::uint16_t>((a.raw - b.raw) & (kAngleModulus - 1))};
}

constexpr double angle_to_radians(Angle12 a) {
  return static_cast<double>(a.raw) * (2.0 * 3.14159265358979323846 / kAngleModulus);
}

inline Angle12 angle_from_radians(double theta) {
  const double two_pi = 2.0 * 3.14159265358979323846;
  double t = std::fmod(theta, two_pi);
  if (t < 0) t += two_pi;
  const auto raw = static_cast<std::uint32_t>(std::llround(t / two_pi * kAngleModulus));
  return Angle12{static_cast<std::uint16_t>(raw & (kAngleModulus - 1))};
}

struct DegenerateBearing : std::domain_error {
  DegenerateBearing() : std::domain_error("atan2 of zero vector") {}
};

namespace detail {

// atan(2^-i) in turns scaled by 2^32, for 16 vectoring iterations.
inline const std::array<std::uint32_t, 16>& cordic_atan_table() {
  static const std::array<std::uint32_t, 16> table = [] {
    std::array<std::uint32_t, 16> t{};
    const double two_pi = 2.0 * 3.14159265358979323846;
    for (int i = 0; i < 16; ++i) {
      t[i] = static_cast<std::uint32_t>(
          std::llround(std::atan(std::ldexp(1.0, -i)) / two_pi * 4294967296.0));
    }
    return t;
  }();
  return table;
}

// CORDIC vectoring gain for 16 iterations, about 1.64676. The reciprocal is
// held in Q1.15 for magnitude compensation.
inline constexpr std::int32_t kCordicInvGainQ15 = 19898;

struct CordicResult {
  Angle12 angle;
  Fx16 magnitude;  // gain-compensated |(x, y)|
};

inline CordicResult cordic_vector(Fx16 y, Fx16 x) {
  if (x.raw == 0 && y.raw == 0) throw DegenerateBearing{};

  // Pre-rotate into the right half plane so vectoring converges.
  std::uint32_t angle_acc = 0;
  std::int64_t xv = x.raw;
  std::int64_t yv = y.raw;
  if (xv < 0) {
    xv = -xv;
    yv = -yv;
    angle_acc = 0x80000000u;  // pi in turns<<32
  }
  // Head-room scaling keeps precision for 1-LSB inputs.
  xv <<= 14;
  yv <<= 14;

  const auto& atan_tab = cordic_atan_table();
  for (int i = 0; i < 16; ++i) {
    const std::int64_t xs = xv >> i;
    const std::int64_t ys = yv >> i;
    if (yv >= 0) {
      xv += ys;
      yv -= xs;
      angle_acc += atan_tab[i];
    } else {
      xv -= ys;
      yv += xs;
      angle_acc -= atan_tab[i];
    }
  }

  // Quantize the accumulated angle (turns<<32) to 12 bits, round to nearest.
  const std::uint32_t raw12 =
      ((angle_acc + (1u << 19)) >> 20) & (kAngleModulus - 1);

  // xv now holds gain * |(x,y)| << 14; undo the gain and the head room.
  const std::int64_t mag = (xv * kCordicInvGainQ15) >> (15 + 14);
  return CordicResult{Angle12{static_cast<std::uint16_t>(raw12)},
                      Fx16{fx_saturate(mag)}};
}

}  // namespace detail

// Four-quadrant arctangent on [0, 2*pi), vectoring-mode CORDIC with 16
// iterations. Throws DegenerateBearing for the zero vector.
inline Angle12 cordic_atan2(Fx16 y, Fx16 x) {
  return detail::cordic_vector(y, x).angle;
}

// Same CORDIC pass, also returning the gain-compensated magnitude. Used for
// the 3D elevation angle, where |(dx, dy)| feeds a second vectoring pass.
inline detail::CordicResult cordic_atan2_mag(Fx16 y, Fx16 x) {
  return detail::cordic_vector(y, x);
}

}  // namespace pfsim
