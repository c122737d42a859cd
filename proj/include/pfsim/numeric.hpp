#pragma once

// Dual-mode arithmetic behind one policy interface. FixedArith is the
// hardware-faithful path (Q9.6 positions, Q0.16 weights, CORDIC bearings);
// RealArith is the double-precision oracle path. Every downstream module is
// templated on one of these.

#include <array>
#include <cmath>
#include <cstdint>

#include "pfsim/fixed.hpp"
#include "pfsim/lfsr.hpp"

namespace pfsim {

struct BearingAngles {
  Angle12 azimuth;
  Angle12 elevation;  // unused in 2D
};

struct FixedArith {
  static constexpr bool is_fixed = true;

  using Pos = Fx16;
  // Q0.32: value = raw / 2^32. A 16-sector likelihood product reaches ~1e-5,
  // so 16 fractional bits would leave only a few LSBs of resolution.
  using Weight = std::uint32_t;
  using WeightSum = std::uint64_t;

  static Pos pos_from_real(double r) { return fx_from_real(r); }
  static double pos_to_real(Pos p) { return fx_to_real(p); }
  static Pos pos_add(Pos a, Pos b) { return fx_add(a, b); }
  static Pos pos_sub(Pos a, Pos b) { return fx_sub(a, b); }
  static bool pos_is_zero(Pos p) { return p.raw == 0; }

  // prn word scaled into [-std, std), quantized at each stage as the
  // hardware datapath would.
  static Pos noise_term(std::uint16_t word, Pos noise_std) {
    return fx_mul(uniform_signed(word), noise_std);
  }

  static Angle12 bearing2d(Pos dy, Pos dx) { return cordic_atan2(dy, dx); }

  static BearingAngles bearing3d(Pos dx, Pos dy, Pos dz) {
    const auto planar = cordic_atan2_mag(dy, dx);
    return BearingAngles{planar.angle, cordic_atan2(dz, planar.magnitude)};
  }

  static Weight quantize_factor(double f) {
    auto raw = static_cast<std::int64_t>(std::llround(f * 4294967296.0));
    if (raw < 0) raw = 0;
    if (raw > 4294967295ll) raw = 4294967295ll;
    return static_cast<Weight>(raw);
  }

  static Weight weight_mul(Weight a, Weight b) {
    return static_cast<Weight>(
        (std::uint64_t{a} * b + 0x80000000u) >> 32);
  }

  // The constant 1/M carried by every previous-step weight cancels in the
  // resampler, so the fixed path stores the bare likelihood to keep the
  // 16-bit weights from underflowing.
  static Weight apply_prev_weight(Weight likelihood, int /*m*/) {
    return likelihood;
  }

  static WeightSum wsum_zero() { return 0; }
  static WeightSum wsum_add(WeightSum s, Weight w) { return s + w; }
  static bool wsum_is_zero(WeightSum s) { return s == 0; }

  // Mean over n = 2^log2_n raw position values, hardware shift-divide.
  static Pos mean(std::int64_t raw_sum, int log2_n) {
    return shift_div(raw_sum, log2_n);
  }
};

struct RealArith {
  static constexpr bool is_fixed = false;

  using Pos = double;
  using Weight = double;
  using WeightSum = double;

  static Pos pos_from_real(double r) { return r; }
  static double pos_to_real(Pos p) { return p; }
  static Pos pos_add(Pos a, Pos b) { return a + b; }
  static Pos pos_sub(Pos a, Pos b) { return a - b; }
  static bool pos_is_zero(Pos p) { return p == 0.0; }

  static Pos noise_term(std::uint16_t word, Pos noise_std) {
    return uniform_signed_real(word) * noise_std;
  }

  static Angle12 bearing2d(Pos dy, Pos dx) {
    if (dx == 0.0 && dy == 0.0) throw DegenerateBearing{};
    return angle_from_radians(std::atan2(dy, dx));
  }

  static BearingAngles bearing3d(Pos dx, Pos dy, Pos dz) {
    if (dx == 0.0 && dy == 0.0 && dz == 0.0) throw DegenerateBearing{};
    const double planar = std::hypot(dx, dy);
    return BearingAngles{bearing2d(dy, dx),
                         angle_from_radians(std::atan2(dz, planar))};
  }

  static Weight quantize_factor(double f) { return f; }
  static Weight weight_mul(Weight a, Weight b) { return a * b; }
  static Weight apply_prev_weight(Weight likelihood, int m) {
    return likelihood / m;
  }

  static WeightSum wsum_zero() { return 0.0; }
  static WeightSum wsum_add(WeightSum s, Weight w) { return s + w; }
  static bool wsum_is_zero(WeightSum s) { return s == 0.0; }

  static Pos mean(double sum, int log2_n) {
    return sum / static_cast<double>(std::int64_t{1} << log2_n);
  }
};

}  // namespace pfsim
