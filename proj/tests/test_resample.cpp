#include "pfsim/resample.hpp"

#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "oracles.hpp"
#include "pfsim/numeric.hpp"

namespace pfsim {
namespace {

std::optional<ResampleOutcome> resample_real(const std::vector<double>& w,
                                             std::uint16_t u0_word) {
  const double sum = std::accumulate(w.begin(), w.end(), 0.0);
  return systematic_resample<RealArith>(std::span<const double>(w), sum, u0_word);
}

TEST(Resample, SixParticleWorkedExample) {
  // Particle 2 covers four thresholds, particle 5 covers two (1-based).
  const std::vector<double> w{0, 4, 0, 0, 2, 0};
  const auto out = resample_real(w, 0x8000).value();  // u0 = 0.5
  const std::vector<std::uint32_t> ind_r{1, 1, 1, 1, 4, 4};
  const std::vector<std::uint32_t> ind_d{0, 2, 3, 5};
  EXPECT_EQ(out.ind_r, ind_r);
  EXPECT_EQ(out.ind_d, ind_d);
  EXPECT_EQ(out.counts[1], 4u);
  EXPECT_EQ(out.counts[4], 2u);
}

TEST(Resample, UniformWeightsAreIdentity) {
  for (std::uint16_t u0 : {std::uint16_t{1}, std::uint16_t{0x7ffe},
                           std::uint16_t{0xffff}}) {
    const std::vector<double> w(16, 1.0);
    const auto out = resample_real(w, u0).value();
    for (std::uint32_t i = 0; i < 16; ++i) EXPECT_EQ(out.ind_r[i], i);
    EXPECT_TRUE(out.ind_d.empty());
    // Uniform weights fetch every particle exactly once: scan = 2M.
    EXPECT_EQ(out.scan_cycles, 32);
  }
}

TEST(Resample, ReplicationCounts) {
  const std::vector<std::uint32_t> ind_r{1, 1, 1, 1, 4, 4};
  const auto counts = replication_counts(ind_r, 6);
  EXPECT_EQ(counts, (std::vector<std::uint32_t>{0, 4, 0, 0, 2, 0}));
  EXPECT_EQ(std::accumulate(counts.begin(), counts.end(), 0u), 6u);
}

TEST(Resample, DegenerateWeightsSignalled) {
  const std::vector<double> w(8, 0.0);
  EXPECT_FALSE(resample_real(w, 0x1234).has_value());

  // Fixed mode: a weight sum below M truncates the step size to zero.
  std::vector<FixedArith::Weight> wf(32, 0);
  wf[0] = 7;
  EXPECT_FALSE(systematic_resample<FixedArith>(
                   std::span<const FixedArith::Weight>(wf), 7, 0x1234)
                   .has_value());
}

template <class A>
void check_against_oracle(const std::vector<std::uint64_t>& w_int,
                          std::uint16_t u0_word) {
  const auto expect = oracle::brute_force_resample(w_int, u0_word, A::is_fixed);

  std::optional<ResampleOutcome> got;
  if constexpr (A::is_fixed) {
    std::vector<FixedArith::Weight> w(w_int.begin(), w_int.end());
    const std::uint64_t sum = std::accumulate(w_int.begin(), w_int.end(), 0ull);
    got = systematic_resample<FixedArith>(std::span<const FixedArith::Weight>(w),
                                          sum, u0_word);
  } else {
    std::vector<double> w;
    for (auto v : w_int) w.push_back(static_cast<double>(v) / 65536.0);
    const double sum = std::accumulate(w.begin(), w.end(), 0.0);
    got = systematic_resample<RealArith>(std::span<const double>(w), sum, u0_word);
  }
  ASSERT_TRUE(got.has_value());
  EXPECT_EQ(got->ind_r, expect.ind_r);
  EXPECT_EQ(got->ind_d, expect.ind_d);
  EXPECT_EQ(got->counts, expect.counts);
}

TEST(Resample, MatchesExactOracleOnRandomInstances) {
  std::mt19937 gen(101);
  std::uniform_int_distribution<std::uint32_t> wdist(0, 65535);
  std::uniform_int_distribution<std::uint32_t> u0dist(0, 65535);
  for (std::size_t m : {4u, 8u, 32u}) {
    for (int it = 0; it < 2000; ++it) {
      std::vector<std::uint64_t> w(m);
      std::uint64_t sum = 0;
      for (auto& v : w) {
        v = wdist(gen);
        sum += v;
      }
      if (sum < m) continue;  // degenerate in fixed mode
      const auto u0 = static_cast<std::uint16_t>(u0dist(gen));
      check_against_oracle<RealArith>(w, u0);
      check_against_oracle<FixedArith>(w, u0);
    }
  }
}

TEST(Resample, SparseWeightsAgainstOracle) {
  std::mt19937 gen(103);
  std::uniform_int_distribution<std::uint32_t> wdist(0, 65535);
  std::uniform_int_distribution<std::uint32_t> u0dist(0, 65535);
  std::uniform_int_distribution<int> zero(0, 1);
  for (int it = 0; it < 3000; ++it) {
    std::vector<std::uint64_t> w(8);
    std::uint64_t sum = 0;
    for (auto& v : w) {
      v = zero(gen) ? wdist(gen) : 0;
      sum += v;
    }
    if (sum < 8) continue;
    const auto u0 = static_cast<std::uint16_t>(u0dist(gen));
    check_against_oracle<RealArith>(w, u0);
    check_against_oracle<FixedArith>(w, u0);
  }
}

TEST(Resample, ZeroU0Admitted) {
  const std::vector<double> w{1, 1, 1, 1};
  const auto out = resample_real(w, 0).value();
  EXPECT_EQ(out.ind_r.size(), 4u);
  // Thresholds sit at exact multiples of A_w; the first falls to particle 1.
  EXPECT_EQ(out.ind_r[0], 0u);
  std::uint32_t total = std::accumulate(out.counts.begin(), out.counts.end(), 0u);
  EXPECT_EQ(total, 4u);
}

TEST(Resample, ConservationPartitionAndMonotonicity) {
  std::mt19937 gen(107);
  std::uniform_real_distribution<double> wdist(0.0, 1.0);
  std::uniform_int_distribution<std::uint32_t> u0dist(0, 65535);
  for (int it = 0; it < 2000; ++it) {
    const std::size_t m = 32;
    std::vector<double> w(m);
    for (auto& v : w) v = wdist(gen);
    const auto out = resample_real(w, static_cast<std::uint16_t>(u0dist(gen))).value();

    EXPECT_EQ(out.ind_r.size(), m);  // conservation
    EXPECT_TRUE(std::is_sorted(out.ind_r.begin(), out.ind_r.end()));
    EXPECT_TRUE(std::is_sorted(out.ind_d.begin(), out.ind_d.end()));

    // Partition: every index in exactly one of support / ind_d.
    std::vector<bool> in_d(m, false);
    for (auto d : out.ind_d) in_d[d] = true;
    for (std::size_t i = 0; i < m; ++i) {
      EXPECT_NE(out.counts[i] > 0, in_d[i]);
    }

    // Scan cost: fetches + comparisons bounded by 2M.
    EXPECT_LE(out.scan_cycles, 2 * static_cast<int>(m));
  }
}

TEST(Resample, CountsBracketExpectedValueInRealMode) {
  std::mt19937 gen(109);
  std::uniform_real_distribution<double> wdist(0.0, 1.0);
  std::uniform_int_distribution<std::uint32_t> u0dist(0, 65535);
  for (int it = 0; it < 2000; ++it) {
    const std::size_t m = 16;
    std::vector<double> w(m);
    double sum = 0;
    for (auto& v : w) {
      v = wdist(gen);
      sum += v;
    }
    const auto out = resample_real(w, static_cast<std::uint16_t>(u0dist(gen))).value();
    for (std::size_t i = 0; i < m; ++i) {
      const double expect = m * w[i] / sum;
      EXPECT_GE(out.counts[i], std::floor(expect));
      EXPECT_LE(out.counts[i], std::ceil(expect));
    }
  }
}

TEST(Resample, UnbiasedOverRandomOffsets) {
  // E[count_i] = M w_i / sum within 3 standard errors over many u0 draws.
  const std::vector<double> w{0.1, 0.7, 0.05, 0.15, 0.4, 0.3, 0.2, 0.1};
  const double sum = std::accumulate(w.begin(), w.end(), 0.0);
  const std::size_t m = w.size();
  const int trials = 20000;
  std::mt19937 gen(113);
  std::uniform_int_distribution<std::uint32_t> u0dist(0, 65535);
  std::vector<double> mean(m, 0.0);
  for (int t = 0; t < trials; ++t) {
    const auto out = resample_real(w, static_cast<std::uint16_t>(u0dist(gen))).value();
    for (std::size_t i = 0; i < m; ++i) mean[i] += out.counts[i];
  }
  for (std::size_t i = 0; i < m; ++i) {
    mean[i] /= trials;
    const double expect = m * w[i] / sum;
    // Counts bracket floor/ceil, so the per-trial variance is < 0.25.
    const double se = 0.5 / std::sqrt(static_cast<double>(trials));
    EXPECT_NEAR(mean[i], expect, 3 * se + 0.01);
  }
}

}  // namespace
}  // namespace pfsim
