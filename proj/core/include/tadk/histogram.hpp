#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tadk/lanes.hpp"

namespace tadk::hist {

inline constexpr std::uint32_t nbins16 = 16;
inline constexpr std::uint32_t overflow_bin = nbins16 - 1;

/// bins[min(x / bin_width, 15)] counts.
struct Histogram16 {
  std::array<std::uint64_t, nbins16> bins{};
  std::uint32_t bin_width = 64;

  std::uint64_t total() const;
  bool operator==(const Histogram16&) const = default;
};

enum class Category : std::uint8_t {
  AllDistinctBins = 1,  // every lane in its own bin
  Random = 2,
  AllOneBin = 3,        // every lane in the same non-overflow bin
  AllOverflow = 4,      // every lane in the last bin
};

std::string_view category_name(Category c) noexcept;

/// Vector category classifier. `bins` holds unclamped bin indices
/// (len / bin_width); lanes >= 15 count as overflow and are clamped to 15
/// for the uniqueness test.
Category classify_category(const LaneVector& bins);

enum class Backend : std::uint8_t { Emulated, Avx512, Auto };

std::string_view backend_name(Backend b) noexcept;

/// True when this CPU supports the AVX-512 F/CD/BW kernel.
bool avx512_available() noexcept;

/// Loop-based reference: arbitrary nbins, one element at a time.
std::vector<std::uint64_t> hist_scalar(std::span<const std::uint32_t> values,
                                       std::uint32_t bin_width, std::uint32_t nbins);
Histogram16 hist_scalar16(std::span<const std::uint32_t> values, std::uint32_t bin_width = 64);

/// Lane-parallel histogram. Full groups of 16 are classified and take the
/// per-category fast path; the remaining tail goes through the scalar loop.
/// The result is always identical to hist_scalar16. Auto picks AVX-512 when
/// the CPU supports it and bin_width is a power of two; asking for Avx512
/// outside those conditions throws InvalidArgs.
Histogram16 hist_avc(std::span<const std::uint32_t> values, std::uint32_t bin_width = 64,
                     Backend backend = Backend::Auto);

/// Adds the histogram of one 16-value group to `counts` using the emulated
/// lane kernel. Exposed for tests.
Category avc_group(std::span<std::uint32_t, nbins16> counts, const LaneVector& values,
                   std::uint32_t bin_width);

struct BenchRow {
  Category category;
  Backend backend;  // Emulated/Avx512; scalar rows use Auto as "scalar"
  bool scalar = false;
  double ns_per_lane = 0;
  double speedup = 1.0;
};

/// Times the scalar loop against AVC on pure-category workloads of
/// `flows` 16-packet buffers, best of `iters` runs. Throws InvalidArgs when
/// iters == 0.
std::vector<BenchRow> bench_hist(Category category, std::uint32_t iters,
                                 std::uint32_t flows = 4096, std::uint64_t seed = 42);

/// "category,backend,ns_per_lane,speedup"
std::string format_bench_row(const BenchRow& row);

/// Generates `groups` lanes of 16 payload lengths that all fall in the
/// requested category (bin_width 64).
std::vector<std::uint32_t> category_workload(Category category, std::size_t groups,
                                             std::uint64_t seed);

namespace detail {
bool avx512_supported() noexcept;
void avc_avx512(std::span<const std::uint32_t> values, unsigned shift,
                std::span<std::uint32_t, nbins16> counts);
}  // namespace detail

}  // namespace tadk::hist
