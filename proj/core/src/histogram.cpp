#include "tadk/histogram.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <numeric>
#include <random>

#include "tadk/error.hpp"

namespace tadk::hist {
namespace {

// Groups per uint32 accumulation chunk; each group adds at most 16 to a bin.
constexpr std::size_t chunk_values = std::size_t{1} << 28;

bool is_pow2(std::uint32_t v) { return v && (v & (v - 1)) == 0; }

LaneVector bin_indices(const LaneVector& values, std::uint32_t bin_width) {
  if (is_pow2(bin_width)) {
    return lanes::shift_right(values, static_cast<unsigned>(std::countr_zero(bin_width)));
  }
  LaneVector r;
  for (int i = 0; i < lane_count; ++i) r[i] = values[i] / bin_width;
  return r;
}

}  // namespace

std::uint64_t Histogram16::total() const {
  return std::accumulate(bins.begin(), bins.end(), std::uint64_t{0});
}

std::string_view category_name(Category c) noexcept {
  switch (c) {
    case Category::AllDistinctBins: return "cat1";
    case Category::Random: return "cat2";
    case Category::AllOneBin: return "cat3";
    case Category::AllOverflow: return "cat4";
  }
  return "?";
}

std::string_view backend_name(Backend b) noexcept {
  switch (b) {
    case Backend::Emulated: return "emulated";
    case Backend::Avx512: return "avx512";
    case Backend::Auto: return "auto";
  }
  return "?";
}

bool avx512_available() noexcept { return detail::avx512_supported(); }

Category classify_category(const LaneVector& bins) {
  const LaneVector last = LaneVector::splat(overflow_bin);
  if (lanes::cmpge(bins, last).all()) return Category::AllOverflow;
  const LaneVector clamped = lanes::min(bins, last);
  const LaneMask uni = lanes::cmpeq(lanes::conflict(clamped), LaneVector::splat(0));
  if (uni.all()) return Category::AllDistinctBins;
  if ((uni.bits & (uni.bits - 1)) == 0) return Category::AllOneBin;
  return Category::Random;
}

Category avc_group(std::span<std::uint32_t, nbins16> counts, const LaneVector& values,
                   std::uint32_t bin_width) {
  const LaneVector last = LaneVector::splat(overflow_bin);
  LaneVector vec_bin = bin_indices(values, bin_width);

  const LaneMask msk_overflow = lanes::cmpge(vec_bin, last);
  if (msk_overflow.all()) {
    counts[overflow_bin] += lane_count;
    return Category::AllOverflow;
  }
  // Partially overflowing lanes stay in the computation, clamped to bin 15.
  vec_bin = lanes::min(vec_bin, last);
  const LaneVector vec_conflict = lanes::conflict(vec_bin);
  const LaneMask msk_uni = lanes::cmpeq(vec_conflict, LaneVector::splat(0));

  if (msk_uni.all()) {
    const LaneVector vec_cnt = lanes::gather(counts, vec_bin);
    const LaneVector vec_cnt_added = lanes::add(vec_cnt, LaneVector::splat(1));
    lanes::scatter(counts, vec_bin, vec_cnt_added);
    return Category::AllDistinctBins;
  }
  if ((msk_uni.bits & (msk_uni.bits - 1)) == 0) {
    counts[vec_bin[0]] += lane_count;
    return Category::AllOneBin;
  }

  // Lanes that are the last occurrence of their bin: no higher lane lists
  // them in its conflict mask. Each such lane holds (multiplicity - 1) in
  // vec_popcnt, so count + 1 + popcnt is the updated bin value. Masking the
  // scatter to those lanes gives the same result as an unmasked
  // last-lane-wins scatter.
  const LaneMask msk_uni_rev{
      static_cast<std::uint16_t>(~lanes::reduce_or(vec_conflict) & 0xffffu)};
  const LaneVector vec_popcnt = lanes::popcnt(vec_conflict);
  const LaneVector vec_cnt = lanes::gather(counts, vec_bin);
  const LaneVector vec_cnt_tmp = lanes::add(vec_cnt, LaneVector::splat(1));
  const LaneVector vec_cnt_added = lanes::add(vec_cnt_tmp, vec_popcnt);
  lanes::scatter(counts, msk_uni_rev, vec_bin, vec_cnt_added);
  return Category::Random;
}

std::vector<std::uint64_t> hist_scalar(std::span<const std::uint32_t> values,
                                       std::uint32_t bin_width, std::uint32_t nbins) {
  if (bin_width == 0 || nbins == 0) throw Error(Errc::InvalidArgs, "bin_width and nbins must be > 0");
  std::vector<std::uint64_t> bins(nbins, 0);
  for (std::uint32_t x : values) {
    ++bins[std::min(x / bin_width, nbins - 1)];
  }
  return bins;
}

Histogram16 hist_scalar16(std::span<const std::uint32_t> values, std::uint32_t bin_width) {
  if (bin_width == 0) throw Error(Errc::InvalidArgs, "bin_width must be > 0");
  Histogram16 h;
  h.bin_width = bin_width;
  for (std::uint32_t x : values) {
    ++h.bins[std::min(x / bin_width, overflow_bin)];
  }
  return h;
}

Histogram16 hist_avc(std::span<const std::uint32_t> values, std::uint32_t bin_width,
                     Backend backend) {
  if (bin_width == 0) throw Error(Errc::InvalidArgs, "bin_width must be > 0");
  if (backend == Backend::Auto) {
    backend = (avx512_available() && is_pow2(bin_width)) ? Backend::Avx512 : Backend::Emulated;
  } else if (backend == Backend::Avx512 && (!avx512_available() || !is_pow2(bin_width))) {
    throw Error(Errc::InvalidArgs,
                "avx512 backend needs CPU support and a power-of-two bin width");
  }

  Histogram16 h;
  h.bin_width = bin_width;
  const std::size_t full = values.size() - values.size() % lane_count;
  for (std::size_t start = 0; start < full; start += chunk_values) {
    const std::size_t end = std::min(full, start + chunk_values);
    std::array<std::uint32_t, nbins16> counts{};
    if (backend == Backend::Avx512) {
      detail::avc_avx512(values.subspan(start, end - start),
                         static_cast<unsigned>(std::countr_zero(bin_width)), counts);
    } else {
      for (std::size_t i = start; i < end; i += lane_count) {
        avc_group(counts, LaneVector::load(values.subspan(i, lane_count)), bin_width);
      }
    }
    for (std::uint32_t b = 0; b < nbins16; ++b) h.bins[b] += counts[b];
  }
  for (std::size_t i = full; i < values.size(); ++i) {
    ++h.bins[std::min(values[i] / bin_width, overflow_bin)];
  }
  return h;
}

std::vector<std::uint32_t> category_workload(Category category, std::size_t groups,
                                             std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::uint32_t> out;
  out.reserve(groups * lane_count);
  auto length_in_bin = [&](std::uint32_t bin) -> std::uint32_t {
    if (bin >= overflow_bin) return 960 + static_cast<std::uint32_t>(rng() % 540);
    return bin * 64 + static_cast<std::uint32_t>(rng() % 64);
  };
  std::array<std::uint32_t, lane_count> bins{};
  for (std::size_t g = 0; g < groups; ++g) {
    switch (category) {
      case Category::AllDistinctBins:
        std::iota(bins.begin(), bins.end(), 0u);
        for (int i = lane_count - 1; i > 0; --i) {
          std::swap(bins[i], bins[rng() % static_cast<std::uint64_t>(i + 1)]);
        }
        break;
      case Category::Random: {
        LaneVector v;
        do {
          for (int i = 0; i < lane_count; ++i) v[i] = static_cast<std::uint32_t>(rng() % 16);
        } while (classify_category(v) != Category::Random);
        bins = v.lanes;
        break;
      }
      case Category::AllOneBin:
        bins.fill(static_cast<std::uint32_t>(rng() % overflow_bin));
        break;
      case Category::AllOverflow:
        bins.fill(overflow_bin);
        break;
    }
    for (auto b : bins) out.push_back(length_in_bin(b));
  }
  return out;
}

std::vector<BenchRow> bench_hist(Category category, std::uint32_t iters, std::uint32_t flows,
                                 std::uint64_t seed) {
  if (iters == 0) throw Error(Errc::InvalidArgs, "iters must be > 0");
  if (flows == 0) throw Error(Errc::InvalidArgs, "flows must be > 0");
  const auto values = category_workload(category, flows, seed);
  const double lanes_total = static_cast<double>(values.size());

  auto best_ns = [&](auto&& fn) {
    double best = 1e300;
    std::uint64_t sink = 0;
    for (std::uint32_t i = 0; i < iters; ++i) {
      const auto t0 = std::chrono::steady_clock::now();
      sink += fn();
      const auto t1 = std::chrono::steady_clock::now();
      best = std::min(best, std::chrono::duration<double, std::nano>(t1 - t0).count());
    }
    // Keeps the work observable.
    if (sink == 0xdeadbeefULL) std::fputs("", stderr);
    return best / lanes_total;
  };

  std::vector<BenchRow> rows;
  const double scalar_ns = best_ns([&] { return hist_scalar16(values).bins[overflow_bin]; });
  rows.push_back({category, Backend::Auto, true, scalar_ns, 1.0});

  std::vector<Backend> backends{Backend::Emulated};
  if (avx512_available()) backends.push_back(Backend::Avx512);
  for (Backend b : backends) {
    const double ns = best_ns([&] { return hist_avc(values, 64, b).bins[overflow_bin]; });
    rows.push_back({category, b, false, ns, ns > 0 ? scalar_ns / ns : 0.0});
  }
  return rows;
}

std::string format_bench_row(const BenchRow& row) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%s,%s,%.4f,%.3f",
                std::string(category_name(row.category)).c_str(),
                row.scalar ? "scalar" : std::string(backend_name(row.backend)).c_str(),
                row.ns_per_lane, row.speedup);
  return buf;
}

}  // namespace tadk::hist
