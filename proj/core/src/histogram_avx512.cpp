// AVX-512 F/CD/BW kernel for the lane histogram. Compiled without global
// ISA flags; functions carry target attributes and are only called after a
// runtime CPU check.

#include "tadk/histogram.hpp"

#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
#define TADK_HAVE_AVX512_KERNEL 1
#include <immintrin.h>
#endif

namespace tadk::hist::detail {

#ifdef TADK_HAVE_AVX512_KERNEL

bool avx512_supported() noexcept {
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx512f") && __builtin_cpu_supports("avx512cd") &&
         __builtin_cpu_supports("avx512bw");
}

namespace {

// Per-lane popcount for values below 2^16 using the nibble lookup.
__attribute__((target("avx512f,avx512bw"))) inline __m512i popcnt16(__m512i v) {
  const __m512i lut = _mm512_set_epi8(
      4, 3, 3, 2, 3, 2, 2, 1, 3, 2, 2, 1, 2, 1, 1, 0, 4, 3, 3, 2, 3, 2, 2, 1, 3, 2, 2, 1, 2, 1, 1, 0,
      4, 3, 3, 2, 3, 2, 2, 1, 3, 2, 2, 1, 2, 1, 1, 0, 4, 3, 3, 2, 3, 2, 2, 1, 3, 2, 2, 1, 2, 1, 1, 0);
  const __m512i low = _mm512_set1_epi8(0x0f);
  const __m512i lo = _mm512_and_si512(v, low);
  const __m512i hi = _mm512_and_si512(_mm512_srli_epi32(v, 4), low);
  const __m512i bytes =
      _mm512_add_epi8(_mm512_shuffle_epi8(lut, lo), _mm512_shuffle_epi8(lut, hi));
  const __m512i byte_mask = _mm512_set1_epi32(0xff);
  return _mm512_add_epi32(_mm512_and_si512(bytes, byte_mask),
                          _mm512_and_si512(_mm512_srli_epi32(bytes, 8), byte_mask));
}

}  // namespace

// The 16 bins live in one zmm register for the whole span. Gathers from
// the histogram are permutes of that register; category 2 spills it to the
// stack for the masked scatter.
__attribute__((target("avx512f,avx512cd,avx512bw"))) void avc_avx512(
    std::span<const std::uint32_t> values, unsigned shift, std::span<std::uint32_t, nbins16> counts) {
  alignas(64) std::uint32_t spill[nbins16];
  __m512i vhist = _mm512_loadu_si512(counts.data());
  const __m512i v15 = _mm512_set1_epi32(static_cast<int>(overflow_bin));
  const __m512i one = _mm512_set1_epi32(1);
  const __m512i sixteen = _mm512_set1_epi32(lane_count);
  const __m128i count = _mm_cvtsi32_si128(static_cast<int>(shift));

  const std::size_t n = values.size() - values.size() % lane_count;
  for (std::size_t i = 0; i < n; i += lane_count) {
    const __m512i vec_len = _mm512_loadu_si512(values.data() + i);
    __m512i vec_bin = _mm512_srl_epi32(vec_len, count);
    const __mmask16 msk_overflow = _mm512_cmpge_epu32_mask(vec_bin, v15);
    if (msk_overflow == 0xffff) {
      vhist = _mm512_mask_add_epi32(vhist, 0x8000, vhist, sixteen);
      continue;
    }
    vec_bin = _mm512_min_epu32(vec_bin, v15);
    const __m512i vec_conflict = _mm512_conflict_epi32(vec_bin);
    const __mmask16 msk_uni = _mm512_testn_epi32_mask(vec_conflict, vec_conflict);
    if (msk_uni == 0xffff) {
      // Sixteen distinct bins out of sixteen: the gather/add/scatter touches
      // every bin exactly once.
      vhist = _mm512_add_epi32(vhist, one);
      continue;
    }
    if ((msk_uni & (msk_uni - 1)) == 0) {
      const int b = _mm_cvtsi128_si32(_mm512_castsi512_si128(vec_bin));
      vhist = _mm512_mask_add_epi32(vhist, static_cast<__mmask16>(1u << b), vhist, sixteen);
      continue;
    }
    const __mmask16 msk_uni_rev =
        static_cast<__mmask16>(~static_cast<unsigned>(_mm512_reduce_or_epi32(vec_conflict)));
    const __m512i vec_popcnt = popcnt16(vec_conflict);
    const __m512i vec_cnt = _mm512_permutexvar_epi32(vec_bin, vhist);
    const __m512i vec_cnt_tmp = _mm512_add_epi32(vec_cnt, one);
    const __m512i vec_cnt_added = _mm512_add_epi32(vec_cnt_tmp, vec_popcnt);
    _mm512_store_si512(spill, vhist);
    _mm512_mask_i32scatter_epi32(spill, msk_uni_rev, vec_bin, vec_cnt_added, 4);
    vhist = _mm512_load_si512(spill);
  }
  _mm512_storeu_si512(counts.data(), vhist);
}

#else

bool avx512_supported() noexcept { return false; }

void avc_avx512(std::span<const std::uint32_t>, unsigned, std::span<std::uint32_t, nbins16>) {}

#endif

}  // namespace tadk::hist::detail
