#pragma once

// One sub-filter: dual-port particle memory with a single-register
// replication cache, sampling/propagation, binary-sector importance
// weighting, per-sector particle population and systematic resampling index
// generation.

#include <array>
#include <cassert>
#include <cstdint>
#include <span>
#include <vector>

#include "pfsim/fixed.hpp"
#include "pfsim/lfsr.hpp"
#include "pfsim/numeric.hpp"
#include "pfsim/resample.hpp"

namespace pfsim {

template <class A>
struct Particle {
  std::array<typename A::Pos, 3> coord{};
};

// Single dual-port memory serving both the sampled and re-sampled particle
// sets. A read repeated at the same address is served from the replication
// register, so the original value survives a simultaneous write-back to that
// cell.
template <class A>
class ParticleMemory {
 public:
  explicit ParticleMemory(std::size_t m) : cells_(m) {}

  std::size_t size() const { return cells_.size(); }

  void begin_pass() { last_addr_ = SIZE_MAX; }

  Particle<A> read(std::size_t addr) {
    if (addr == last_addr_) return cache_;
    cache_ = cells_[addr];
    last_addr_ = addr;
    return cache_;
  }

  void write(std::size_t addr, const Particle<A>& value) {
    cells_[addr] = value;
  }

  // Cell access that bypasses the port (initialization, aggregation, and
  // routing capture before any write of the step).
  const Particle<A>& peek(std::size_t addr) const { return cells_[addr]; }
  void poke(std::size_t addr, const Particle<A>& value) { cells_[addr] = value; }

 private:
  std::vector<Particle<A>> cells_;
  std::size_t last_addr_ = SIZE_MAX;
  Particle<A> cache_{};
};

// Per-sector Bernoulli factors of the measurement likelihood, pre-quantized
// for the active arithmetic mode.
template <class A>
struct LikelihoodTable {
  typename A::Weight hit;      // own sector, bit set:    alpha
  typename A::Weight miss;     // own sector, bit clear:  1 - alpha
  typename A::Weight clutter;  // other sector, bit set:  alpha * beta
  typename A::Weight quiet;    // other sector, bit clear: 1 - alpha * beta
  int sectors = 8;
  bool own_sector_only = false;

  static LikelihoodTable make(double alpha, double beta, int sectors,
                              bool own_sector_only) {
    LikelihoodTable t;
    t.hit = A::quantize_factor(alpha);
    t.miss = A::quantize_factor(1.0 - alpha);
    t.clutter = A::quantize_factor(alpha * beta);
    t.quiet = A::quantize_factor(1.0 - alpha * beta);
    t.sectors = sectors;
    t.own_sector_only = own_sector_only;
    return t;
  }
};

// coords' = coords + prn * std per axis, saturating in fixed mode.
template <class A>
Particle<A> sample_propagate(const Particle<A>& prev,
                             std::span<const std::uint16_t> prn_words,
                             typename A::Pos noise_std, int dims) {
  Particle<A> next = prev;
  for (int a = 0; a < dims; ++a) {
    next.coord[a] = A::pos_add(prev.coord[a], A::noise_term(prn_words[a], noise_std));
  }
  return next;
}

// Yields the original time-(t-1) values for every entry of ind_r, even when
// the addresses are concurrently rewritten (replicated reads come from the
// cache register).
template <class A>
std::vector<Particle<A>> read_resampled(ParticleMemory<A>& memory,
                                        std::span<const std::uint32_t> ind_r) {
  memory.begin_pass();
  std::vector<Particle<A>> stream;
  stream.reserve(ind_r.size());
  for (auto addr : ind_r) stream.push_back(memory.read(addr));
  return stream;
}

// Sector index from the bearing relative to the vehicle heading:
// ceil(delta / (pi/4)) with delta wrapped into (0, 2*pi], so delta = 0 maps
// to sector 8.
inline int sector_index(Angle12 theta, Angle12 phi_ugv) {
  std::uint32_t delta = angle_sub(theta, phi_ugv).raw;
  if (delta == 0) delta = kAngleModulus;
  return static_cast<int>((delta + 511) / 512);
}

// 3D: 8 azimuth sectors in each elevation hemisphere; the lower hemisphere
// occupies sectors 9..16.
inline int sector_index3(Angle12 azimuth, Angle12 phi_ugv, Angle12 elevation) {
  const int az = sector_index(azimuth, phi_ugv);
  const bool upper = elevation.raw <= kAngleModulus / 4 ||
                     elevation.raw == 0;  // raw in [0, pi/2]
  return upper ? az : az + 8;
}

// Joint likelihood of the measurement word given the particle's sector:
// the own-sector bit uses the source-present Bernoulli, every other bit the
// clutter Bernoulli. Returns w_prev-scaled weight for the mode.
template <class A>
typename A::Weight importance_weight(std::uint32_t z, int sector,
                                     const LikelihoodTable<A>& table, int m) {
  auto factor = [&](int j) {
    const bool bit = (z >> (j - 1)) & 1u;
    if (j == sector) return bit ? table.hit : table.miss;
    return bit ? table.clutter : table.quiet;
  };

  typename A::Weight likelihood;
  if (table.own_sector_only) {
    likelihood = factor(sector);
  } else {
    likelihood = factor(1);
    for (int j = 2; j <= table.sectors; ++j) {
      likelihood = A::weight_mul(likelihood, factor(j));
    }
  }
  return A::apply_prev_weight(likelihood, m);
}

// Vehicle pose as seen by the filter datapath.
template <class A>
struct ModePose {
  std::array<typename A::Pos, 3> pos{};
  Angle12 heading{};
};

// Particle bearing relative to the vehicle position. Degenerate displacement
// (particle coincides with the vehicle in mode coordinates) yields the
// sector containing the vehicle heading.
template <class A>
int particle_sector(const Particle<A>& p, const ModePose<A>& vehicle, int dims) {
  const auto dx = A::pos_sub(p.coord[0], vehicle.pos[0]);
  const auto dy = A::pos_sub(p.coord[1], vehicle.pos[1]);
  if (dims == 2) {
    if (A::pos_is_zero(dx) && A::pos_is_zero(dy)) {
      return sector_index(vehicle.heading, vehicle.heading);
    }
    return sector_index(A::bearing2d(dy, dx), vehicle.heading);
  }
  const auto dz = A::pos_sub(p.coord[2], vehicle.pos[2]);
  if (A::pos_is_zero(dx) && A::pos_is_zero(dy)) {
    if (A::pos_is_zero(dz)) {
      return sector_index3(vehicle.heading, vehicle.heading, Angle12{0});
    }
    // On the vertical axis the azimuth is undefined; keep the heading sector
    // and classify by the elevation sign alone.
    const Angle12 elev{static_cast<std::uint16_t>(
        A::pos_to_real(dz) > 0 ? kAngleModulus / 4 : 3 * kAngleModulus / 4)};
    return sector_index3(vehicle.heading, vehicle.heading, elev);
  }
  const BearingAngles b = A::bearing3d(dx, dy, dz);
  return sector_index3(b.azimuth, vehicle.heading, b.elevation);
}

template <class A>
struct SubFilterConfig {
  int dims = 2;
  std::size_t m = 32;           // particles per sub-filter, power of 2
  typename A::Pos noise_std{};  // process-noise scale
  typename A::Pos prior_halfwidth{};  // 16 * std
  bool no_routing = false;
};

template <class A>
struct StepResult {
  typename A::WeightSum sum_w;
  bool reinitialized = false;  // degenerate weights hit the recovery path
  int resample_scan_cycles = 0;
};

template <class A>
class SubFilter {
 public:
  explicit SubFilter(const SubFilterConfig<A>& cfg)
      : cfg_(cfg),
        memory_(cfg.m),
        weights_(cfg.m, typename A::Weight{}),
        outcome_(identity_outcome(cfg.m)) {
    sector_counts_.fill(0);
  }

  const SubFilterConfig<A>& config() const { return cfg_; }
  ParticleMemory<A>& memory() { return memory_; }
  const ParticleMemory<A>& memory() const { return memory_; }
  const ResampleOutcome& outcome() const { return outcome_; }
  const std::array<std::uint32_t, 16>& sector_counts() const {
    return sector_counts_;
  }
  typename A::WeightSum sum_w() const { return sum_w_; }

  // Uniform prior in a square (cube) of half-width prior_halfwidth centered
  // on the vehicle; consumes m * dims words.
  void initialize_prior(const ModePose<A>& vehicle, Lfsr16& rng) {
    for (std::size_t i = 0; i < cfg_.m; ++i) {
      Particle<A> p;
      for (int a = 0; a < cfg_.dims; ++a) {
        p.coord[a] = A::pos_add(
            vehicle.pos[a], A::noise_term(rng.next(), cfg_.prior_halfwidth));
      }
      memory_.poke(i, p);
    }
    outcome_ = identity_outcome(cfg_.m);
    sum_w_ = A::wsum_zero();
  }

  // The outgoing ring block: first M/2 entries of this step's resampled read
  // stream, captured before any write of the step touches the memory.
  std::vector<Particle<A>> capture_outgoing() const {
    std::vector<Particle<A>> block;
    block.reserve(cfg_.m / 2);
    for (std::size_t i = 0; i < cfg_.m / 2; ++i) {
      block.push_back(memory_.peek(outcome_.ind_r[i]));
    }
    return block;
  }

  // One SIR pass: read the resampled t-1 particles through the dual port,
  // propagate (routed-in block first, then the local second half), weight
  // against the measurement, then refresh the resampling outcome.
  //
  // noise_words holds m * dims words in particle-major order; rng serves the
  // degenerate-weights recovery path only.
  StepResult<A> step(std::span<const Particle<A>> routed_in,
                     std::span<const std::uint16_t> noise_words,
                     std::uint16_t u0_word, std::uint32_t z,
                     const ModePose<A>& vehicle,
                     const LikelihoodTable<A>& table, Lfsr16& rng) {
    const std::size_t m = cfg_.m;
    const std::size_t q = m / 2;
    assert(routed_in.size() == q);
    assert(noise_words.size() == m * static_cast<std::size_t>(cfg_.dims));

    memory_.begin_pass();
    sector_counts_.fill(0);
    sum_w_ = A::wsum_zero();

    std::size_t discard_ptr = 0;
    for (std::size_t i = 0; i < m; ++i) {
      const std::uint32_t addr = outcome_.ind_r[i];
      const Particle<A> original = memory_.read(addr);
      const Particle<A>& input = (i < q) ? routed_in[i] : original;

      const Particle<A> prop = sample_propagate<A>(
          input, noise_words.subspan(i * cfg_.dims, cfg_.dims),
          cfg_.noise_std, cfg_.dims);

      const int sector = particle_sector(prop, vehicle, cfg_.dims);
      const auto w =
          importance_weight(z, sector, table, static_cast<int>(m));

      // Write-back address: the read address on a first read, otherwise the
      // next discarded slot. Weights land at the particle's slot.
      std::size_t waddr;
      if (i == 0 || addr != outcome_.ind_r[i - 1]) {
        waddr = addr;
      } else {
        waddr = outcome_.ind_d[discard_ptr++];
      }
      memory_.write(waddr, prop);
      weights_[waddr] = w;
      ++sector_counts_[sector - 1];
      sum_w_ = A::wsum_add(sum_w_, w);
    }

    StepResult<A> result{sum_w_, false, 0};
    auto next = systematic_resample<A>(
        std::span<const typename A::Weight>(weights_), sum_w_, u0_word);
    if (!next) {
      // All weights collapsed (possible at alpha/beta extremes): fall back
      // to the t=0 prior around the current vehicle pose.
      initialize_prior(vehicle, rng);
      result.reinitialized = true;
      result.resample_scan_cycles = outcome_.scan_cycles;
      return result;
    }
    outcome_ = std::move(*next);
    result.resample_scan_cycles = outcome_.scan_cycles;
    return result;
  }

 private:
  SubFilterConfig<A> cfg_;
  ParticleMemory<A> memory_;
  std::vector<typename A::Weight> weights_;
  std::array<std::uint32_t, 16> sector_counts_{};
  typename A::WeightSum sum_w_{};
  ResampleOutcome outcome_;
};

}  // namespace pfsim
