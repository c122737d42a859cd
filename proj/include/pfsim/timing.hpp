#pragma once

// Cycle-cost model of the hardware schedule. The pipelined sampling and
// importance units span N/K + tau_s + tau_i cycles; the resampler is
// allotted 3N/K + tau_r (a 2M scan budget plus M index emissions), giving
// T_SIR = (4N/K + tau) * T_clk per step. Routing rides on the sampling step
// and costs nothing.

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "pfsim/resample.hpp"

namespace pfsim {

struct Latency {
  int tau_s = 10;
  int tau_i = 20;
  int tau_r = 20;

  int total() const { return tau_s + tau_i + tau_r; }
};

inline void check_timing_config(std::uint64_t n, std::uint64_t k) {
  if (k == 0 || n % k != 0 || !is_pow2(n / k)) {
    throw std::invalid_argument("K must divide N with N/K a power of 2");
  }
}

inline std::uint64_t sir_cycles(std::uint64_t n, std::uint64_t k, int tau) {
  check_timing_config(n, k);
  return 4 * (n / k) + static_cast<std::uint64_t>(tau);
}

inline double sampling_rate(double f_clk, std::uint64_t n, std::uint64_t k,
                            int tau) {
  return f_clk / static_cast<double>(sir_cycles(n, k, tau));
}

// Cycle record of one instrumented SIR step. The schedule span is fixed by
// the worst case; the per-sub-filter resampler scans record what the scan
// actually consumed (bounded by 2M, worst case exactly 2M).
struct StepCycles {
  int m = 0;
  Latency latency{};
  std::vector<int> resample_scan;  // one entry per sub-filter

  int sampling_span() const { return m + latency.tau_s + latency.tau_i; }
  int resampling_span() const { return 3 * m + latency.tau_r; }
  int span() const { return sampling_span() + resampling_span(); }
};

// Modeled cycles consumed by a trace of steps; each step occupies its full
// schedule span, so this must equal steps * sir_cycles(N, K, tau).
inline std::uint64_t measured_cycles(const std::vector<StepCycles>& trace) {
  std::uint64_t total = 0;
  for (const auto& s : trace) total += static_cast<std::uint64_t>(s.span());
  return total;
}

}  // namespace pfsim
