#include <gtest/gtest.h>

#include <bit>
#include <random>

#include "oracles.hpp"
#include "tadk/error.hpp"
#include "tadk/histogram.hpp"

using namespace tadk::hist;
using tadk::Error;

namespace {

LaneVector random_lanes(std::mt19937_64& rng, std::uint32_t max) {
  LaneVector v;
  for (auto& x : v.lanes) x = static_cast<std::uint32_t>(rng() % (max + 1));
  return v;
}

std::vector<Backend> backends() {
  std::vector<Backend> b{Backend::Emulated, Backend::Auto};
  if (avx512_available()) b.push_back(Backend::Avx512);
  return b;
}

}  // namespace

TEST(Lanes, ConflictMatchesDefinition) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 2000; ++t) {
    const auto v = random_lanes(rng, 5);
    const auto c = lanes::conflict(v);
    for (int i = 0; i < lane_count; ++i) {
      std::uint32_t want = 0;
      for (int j = 0; j < i; ++j) {
        if (v[j] == v[i]) want |= 1u << j;
      }
      ASSERT_EQ(c[i], want);
    }
  }
}

TEST(Lanes, ScatterLastLaneWins) {
  std::vector<std::uint32_t> mem(4, 0);
  LaneVector idx = LaneVector::splat(2);
  LaneVector vals;
  for (int i = 0; i < lane_count; ++i) vals[i] = static_cast<std::uint32_t>(100 + i);
  lanes::scatter(mem, idx, vals);
  EXPECT_EQ(mem[2], 115u);
  lanes::scatter(mem, LaneMask{0x0003}, idx, vals);
  EXPECT_EQ(mem[2], 101u);
}

TEST(Lanes, ElementwiseOps) {
  std::mt19937_64 rng(2);
  const auto a = random_lanes(rng, 100);
  const auto b = random_lanes(rng, 100);
  const auto ge = lanes::cmpge(a, b);
  const auto eq = lanes::cmpeq(a, b);
  const auto mn = lanes::min(a, b);
  const auto sum = lanes::add(a, b);
  for (int i = 0; i < lane_count; ++i) {
    EXPECT_EQ(ge.test(i), a[i] >= b[i]);
    EXPECT_EQ(eq.test(i), a[i] == b[i]);
    EXPECT_EQ(mn[i], std::min(a[i], b[i]));
    EXPECT_EQ(sum[i], a[i] + b[i]);
  }
  LaneVector rot;
  for (int i = 0; i < lane_count; ++i) rot[i] = static_cast<std::uint32_t>(i + 1);
  const auto p = lanes::permute(a, rot);
  for (int i = 0; i < lane_count; ++i) EXPECT_EQ(p[i], a[(i + 1) % lane_count]);
}

TEST(Category, FixedExamples) {
  LaneVector v;
  for (int i = 0; i < lane_count; ++i) v[i] = static_cast<std::uint32_t>(i);
  EXPECT_EQ(classify_category(v), Category::AllDistinctBins);
  EXPECT_EQ(classify_category(LaneVector::splat(3)), Category::AllOneBin);
  EXPECT_EQ(classify_category(LaneVector::splat(15)), Category::AllOverflow);
  EXPECT_EQ(classify_category(LaneVector::splat(400)), Category::AllOverflow);
  v[3] = 0;
  EXPECT_EQ(classify_category(v), Category::Random);
  // Two overflow lanes with different raw values share the last bin.
  for (int i = 0; i < lane_count; ++i) v[i] = static_cast<std::uint32_t>(i);
  v[14] = 20;
  v[15] = 21;
  EXPECT_EQ(classify_category(v), Category::Random);
}

TEST(Category, RandomLanesMatchOracle) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 20000; ++t) {
    const auto v = random_lanes(rng, t % 2 ? 20 : 3);
    ASSERT_EQ(classify_category(v), oracle::category(v));
  }
}

TEST(Histogram, AvcMatchesOracleAllBackends) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 3000; ++t) {
    const std::size_t n = rng() % 100;
    const std::uint32_t max = t % 3 == 0 ? 2000 : 1100;
    std::vector<std::uint32_t> v(n);
    for (auto& x : v) x = static_cast<std::uint32_t>(rng() % max);
    const auto want = oracle::histogram16(v, 64);
    for (auto b : backends()) {
      const auto h = hist_avc(v, 64, b);
      ASSERT_EQ(std::vector<std::uint64_t>(h.bins.begin(), h.bins.end()), want) << backend_name(b);
    }
  }
}

TEST(Histogram, OddBinWidthsFallBackCorrectly) {
  std::mt19937_64 rng(5);
  for (std::uint32_t w : {1u, 3u, 50u, 64u, 100u, 128u}) {
    std::vector<std::uint32_t> v(333);
    for (auto& x : v) x = static_cast<std::uint32_t>(rng() % 3000);
    const auto want = oracle::histogram16(v, w);
    for (auto b : backends()) {
      if (b == Backend::Avx512 && !std::has_single_bit(w)) {
        EXPECT_THROW(hist_avc(v, w, b), Error) << w;  // explicit request, no fallback
        continue;
      }
      const auto h = hist_avc(v, w, b);
      EXPECT_EQ(std::vector<std::uint64_t>(h.bins.begin(), h.bins.end()), want) << w;
      EXPECT_EQ(h.bin_width, w);
    }
    EXPECT_EQ(hist_scalar16(v, w), hist_avc(v, w, Backend::Emulated));
  }
}

TEST(Histogram, ScalarArbitraryBins) {
  const std::vector<std::uint32_t> v{0, 9, 10, 19, 20, 1000};
  EXPECT_EQ(hist_scalar(v, 10, 3), (std::vector<std::uint64_t>{2, 2, 2}));
  EXPECT_EQ(hist_scalar(v, 10, 200), [] {
    std::vector<std::uint64_t> b(200, 0);
    b[0] = 2;
    b[1] = 2;
    b[2] = 1;
    b[100] = 1;
    return b;
  }());
}

TEST(Histogram, AvcGroupReportsCategory) {
  std::array<std::uint32_t, nbins16> counts{};
  LaneVector v;
  for (int i = 0; i < lane_count; ++i) v[i] = static_cast<std::uint32_t>(i * 64 + 5);
  EXPECT_EQ(avc_group(counts, v, 64), Category::AllDistinctBins);
  for (auto c : counts) EXPECT_EQ(c, 1u);
  EXPECT_EQ(avc_group(counts, LaneVector::splat(2000), 64), Category::AllOverflow);
  EXPECT_EQ(counts[15], 17u);
}

TEST(Histogram, WorkloadsHaveTheirCategory) {
  for (auto c : {Category::AllDistinctBins, Category::Random, Category::AllOneBin, Category::AllOverflow}) {
    const auto w = category_workload(c, 200, 7);
    ASSERT_EQ(w.size(), 200u * lane_count);
    for (std::size_t g = 0; g < 200; ++g) {
      LaneVector bins;
      for (int i = 0; i < lane_count; ++i) bins[i] = w[g * lane_count + i] / 64;
      ASSERT_EQ(oracle::category(bins), c) << category_name(c) << " group " << g;
    }
  }
}

TEST(Histogram, BenchRowsAndErrors) {
  const auto rows = bench_hist(Category::Random, 1, 64);
  ASSERT_GE(rows.size(), 2u);
  EXPECT_TRUE(rows[0].scalar);
  EXPECT_DOUBLE_EQ(rows[0].speedup, 1.0);
  for (const auto& r : rows) EXPECT_GT(r.ns_per_lane, 0.0);
  EXPECT_TRUE(format_bench_row(rows[0]).starts_with("cat2,scalar,"));
  EXPECT_THROW(bench_hist(Category::Random, 0), tadk::Error);
}
