#pragma once

// Systematic resampling on un-normalized weights. Emits replicated and
// discarded index streams exactly as the hardware scan does: M evenly spaced
// thresholds offset by one uniform draw, walked against the running prefix
// sum with a strict '<' comparison.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pfsim/fixed.hpp"
#include "pfsim/numeric.hpp"

namespace pfsim {

struct ResampleOutcome {
  std::vector<std::uint32_t> ind_r;   // m entries, 0-based, non-decreasing
  std::vector<std::uint32_t> ind_d;   // count-0 indices, in discovery order
  std::vector<std::uint32_t> counts;  // replication count per particle
  // Modeled scan cost: weight fetches plus one threshold comparison per
  // emitted index. At most 2M; the trailing index emissions add M more.
  int scan_cycles = 0;
};

inline ResampleOutcome identity_outcome(std::size_t m) {
  ResampleOutcome out;
  out.ind_r.resize(m);
  out.counts.assign(m, 1);
  for (std::size_t i = 0; i < m; ++i) out.ind_r[i] = static_cast<std::uint32_t>(i);
  out.scan_cycles = static_cast<int>(2 * m);
  return out;
}

inline std::vector<std::uint32_t> replication_counts(
    std::span<const std::uint32_t> ind_r, std::size_t m) {
  std::vector<std::uint32_t> counts(m, 0);
  for (auto i : ind_r) ++counts[i];
  return counts;
}

inline bool is_pow2(std::uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

inline int log2_exact(std::uint64_t v) {
  int l = 0;
  while ((std::uint64_t{1} << l) < v) ++l;
  return l;
}

// Returns nullopt on degenerate weights (zero sum; in fixed mode also a step
// size that truncates to zero, which leaves every threshold unreachable).
template <class A>
std::optional<ResampleOutcome> systematic_resample(
    std::span<const typename A::Weight> weights, typename A::WeightSum sum_w,
    std::uint16_t u0_word) {
  const std::size_t m = weights.size();
  ResampleOutcome out;
  out.ind_r.reserve(m);
  out.counts.assign(m, 0);

  if (A::wsum_is_zero(sum_w)) return std::nullopt;

  // Threshold state per mode: fixed works in raw integer weight units with
  // the step size from a truncating shift; real divides exactly.
  std::uint64_t step_fx = 0, u_fx = 0, s_fx = 0;
  double step_re = 0, u_re = 0, s_re = 0;
  if constexpr (A::is_fixed) {
    step_fx = sum_w >> log2_exact(m);
    if (step_fx == 0) return std::nullopt;
    u_fx = (std::uint64_t{u0_word} * step_fx) >> 16;
  } else {
    step_re = sum_w / static_cast<double>(m);
    u_re = uniform01(u0_word) * step_re;
  }

  auto below_threshold = [&](auto s) {
    if constexpr (A::is_fixed) return s < u_fx; else return s < u_re;
  };

  std::size_t p = 0;  // particles fetched so far
  int fetches = 0;
  for (std::size_t i = 0; i < m; ++i) {
    while (p < m) {
      if constexpr (A::is_fixed) {
        if (!below_threshold(s_fx)) break;
        s_fx += weights[p];
      } else {
        if (!below_threshold(s_re)) break;
        s_re += weights[p];
      }
      ++p;
      ++fetches;
    }
    std::uint32_t idx;
    if (p == 0) {
      // u0 == 0 puts the first threshold at exactly zero; the strict
      // comparison then fetches nothing, so the first particle covers it.
      idx = 0;
    } else {
      // Accumulated fixed-point truncation can leave late thresholds above
      // the full prefix sum; residual thresholds fall to the last particle.
      idx = static_cast<std::uint32_t>(p - 1);
    }
    out.ind_r.push_back(idx);
    ++out.counts[idx];
    if constexpr (A::is_fixed) u_fx += step_fx; else u_re += step_re;
  }

  // The scan passes discarded particles in ascending index order, so the
  // discovery order of the count-0 indices is simply ascending.
  for (std::size_t q = 0; q < m; ++q) {
    if (out.counts[q] == 0) out.ind_d.push_back(static_cast<std::uint32_t>(q));
  }

  out.scan_cycles = fetches + static_cast<int>(m);
  return out;
}

}  // namespace pfsim
