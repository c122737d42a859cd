#pragma once

// K sub-filters orchestrated bulk-synchronously: ring particle routing,
// global sector check (argmax of particle population) and global mean
// estimation. Aggregation order is fixed (sub-filter 0..K-1) so fixed-mode
// sums are bit-deterministic.

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "pfsim/lfsr.hpp"
#include "pfsim/numeric.hpp"
#include "pfsim/subfilter.hpp"
#include "pfsim/timing.hpp"

namespace pfsim {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Sub-filter k receives sub-filter k-1's block; sub-filter 0 receives
// sub-filter K-1's.
template <class Block>
std::vector<Block> route_ring(std::vector<Block> outgoing) {
  const std::size_t k = outgoing.size();
  std::vector<Block> incoming(k);
  for (std::size_t i = 0; i < k; ++i) {
    incoming[i] = std::move(outgoing[(i + k - 1) % k]);
  }
  return incoming;
}

// Per-sector totals across sub-filters; argmax with ties broken by the
// lowest sector index. counts[k][j] is sub-filter k's population of
// sector j+1.
inline int sector_check(const std::vector<std::array<std::uint32_t, 16>>& counts,
                        int sectors) {
  int best = 1;
  std::uint64_t best_total = 0;
  for (int j = 0; j < sectors; ++j) {
    std::uint64_t total = 0;
    for (const auto& c : counts) total += c[j];
    if (j == 0 || total > best_total) {
      best = j + 1;
      best_total = total;
    }
  }
  return best;
}

template <class A>
struct BankConfig {
  int dims = 2;
  std::size_t n = 256;  // total particles, power of 2
  std::size_t k = 8;    // sub-filter count
  typename A::Pos noise_std{};
  typename A::Pos prior_halfwidth{};
  bool no_routing = false;
  LikelihoodTable<A> table{};
};

template <class A>
struct SirStepOutput {
  std::array<typename A::Pos, 3> estimate{};
  int steering_sector = 1;
  StepCycles cycles;
  bool any_reinitialized = false;
};

template <class A>
class FilterBank {
 public:
  explicit FilterBank(const BankConfig<A>& cfg) : cfg_(cfg) {
    if (cfg.k == 0 || cfg.n % cfg.k != 0) {
      throw ConfigError("subfilter count must divide particle count");
    }
    m_ = cfg.n / cfg.k;
    if (!is_pow2(cfg.n) || !is_pow2(m_)) {
      throw ConfigError("N and N/K must be powers of 2");
    }
    SubFilterConfig<A> sub{cfg.dims, m_, cfg.noise_std, cfg.prior_halfwidth,
                           cfg.no_routing};
    subfilters_.reserve(cfg.k);
    for (std::size_t i = 0; i < cfg.k; ++i) subfilters_.emplace_back(sub);
  }

  std::size_t particles_per_subfilter() const { return m_; }
  const BankConfig<A>& config() const { return cfg_; }
  std::vector<SubFilter<A>>& subfilters() { return subfilters_; }
  const std::vector<SubFilter<A>>& subfilters() const { return subfilters_; }

  // t=0 prior: every sub-filter draws its particles around the vehicle.
  // Word discipline matches the step: blocks of K, sub-filter k taking
  // word k of each block.
  void initialize(const ModePose<A>& vehicle, Lfsr16& rng) {
    const int dims = cfg_.dims;
    std::vector<std::vector<std::uint16_t>> words(
        cfg_.k, std::vector<std::uint16_t>(m_ * dims));
    for (std::size_t i = 0; i < m_ * static_cast<std::size_t>(dims); ++i) {
      for (std::size_t k = 0; k < cfg_.k; ++k) words[k][i] = rng.next();
    }
    for (std::size_t k = 0; k < cfg_.k; ++k) {
      auto& sf = subfilters_[k];
      for (std::size_t i = 0; i < m_; ++i) {
        Particle<A> p;
        for (int a = 0; a < dims; ++a) {
          p.coord[a] = A::pos_add(
              vehicle.pos[a],
              A::noise_term(words[k][i * dims + a], cfg_.prior_halfwidth));
        }
        sf.memory().poke(i, p);
      }
    }
  }

  // One full parallel SIR step against a shared measurement: capture + route
  // barrier, sub-filter phase, then the global aggregations.
  SirStepOutput<A> sir_step(std::uint32_t z, const ModePose<A>& vehicle,
                            Lfsr16& rng, const Latency& latency) {
    const int dims = cfg_.dims;

    // RNG partition for this step: per particle and axis a block of K noise
    // words (sub-filter k takes word k), then one block of K u0 words.
    std::vector<std::vector<std::uint16_t>> noise(
        cfg_.k, std::vector<std::uint16_t>(m_ * dims));
    for (std::size_t i = 0; i < m_ * static_cast<std::size_t>(dims); ++i) {
      for (std::size_t k = 0; k < cfg_.k; ++k) noise[k][i] = rng.next();
    }
    std::vector<std::uint16_t> u0 = rng.next_block(cfg_.k);

    // Routing barrier: outgoing blocks are captured before any sub-filter
    // overwrites its memory.
    std::vector<std::vector<Particle<A>>> outgoing;
    outgoing.reserve(cfg_.k);
    for (const auto& sf : subfilters_) outgoing.push_back(sf.capture_outgoing());
    std::vector<std::vector<Particle<A>>> incoming =
        cfg_.no_routing ? std::move(outgoing) : route_ring(std::move(outgoing));

    SirStepOutput<A> out;
    out.cycles = StepCycles{static_cast<int>(m_), latency};

    std::vector<std::array<std::uint32_t, 16>> counts;
    counts.reserve(cfg_.k);
    for (std::size_t k = 0; k < cfg_.k; ++k) {
      auto& sf = subfilters_[k];
      const auto result =
          sf.step(incoming[k], noise[k], u0[k], z, vehicle, cfg_.table, rng);
      out.any_reinitialized |= result.reinitialized;
      out.cycles.resample_scan.push_back(result.resample_scan_cycles);
      counts.push_back(sf.sector_counts());
    }

    out.steering_sector = sector_check(counts, cfg_.table.sectors);
    out.estimate = mean_estimate();
    return out;
  }

  // Per-axis sum of all N particle coordinates, then shift-divide by
  // log2(N) (exact mean in real mode).
  std::array<typename A::Pos, 3> mean_estimate() const {
    const int log2_n = log2_exact(cfg_.n);
    std::array<typename A::Pos, 3> est{};
    for (int a = 0; a < cfg_.dims; ++a) {
      if constexpr (A::is_fixed) {
        std::int64_t sum = 0;
        for (const auto& sf : subfilters_) {
          for (std::size_t i = 0; i < m_; ++i) sum += sf.memory().peek(i).coord[a].raw;
        }
        est[a] = A::mean(sum, log2_n);
      } else {
        double sum = 0;
        for (const auto& sf : subfilters_) {
          for (std::size_t i = 0; i < m_; ++i) sum += sf.memory().peek(i).coord[a];
        }
        est[a] = A::mean(sum, log2_n);
      }
    }
    return est;
  }

 private:
  BankConfig<A> cfg_;
  std::size_t m_ = 0;
  std::vector<SubFilter<A>> subfilters_;
};

}  // namespace pfsim
