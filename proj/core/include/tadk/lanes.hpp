#pragma once

// Portable 16-lane integer vector with the semantics of the AVX-512
// intrinsics the histogram kernels are written against. Every operation is
// plain integer code so the emulated backend doubles as the reference for
// the hardware one.

#include <array>
#include <bit>
#include <cassert>
#include <cstdint>
#include <span>

namespace tadk::hist {

inline constexpr int lane_count = 16;

struct LaneMask {
  std::uint16_t bits = 0;

  constexpr bool test(int lane) const { return (bits >> lane) & 1u; }
  constexpr int count() const { return std::popcount(bits); }
  constexpr bool all() const { return bits == 0xffff; }
  constexpr bool none() const { return bits == 0; }

  friend constexpr bool operator==(LaneMask, LaneMask) = default;
};

struct LaneVector {
  std::array<std::uint32_t, lane_count> lanes{};

  static constexpr LaneVector splat(std::uint32_t v) {
    LaneVector r;
    r.lanes.fill(v);
    return r;
  }
  static LaneVector load(std::span<const std::uint32_t> src) {
    assert(src.size() >= lane_count);
    LaneVector r;
    for (int i = 0; i < lane_count; ++i) r.lanes[i] = src[i];
    return r;
  }

  constexpr std::uint32_t operator[](int lane) const { return lanes[lane]; }
  constexpr std::uint32_t& operator[](int lane) { return lanes[lane]; }

  friend constexpr bool operator==(const LaneVector&, const LaneVector&) = default;
};

namespace lanes {

constexpr LaneMask cmpge(const LaneVector& a, const LaneVector& b) {
  std::uint16_t m = 0;
  for (int i = 0; i < lane_count; ++i) m |= static_cast<std::uint16_t>((a[i] >= b[i]) << i);
  return {m};
}

constexpr LaneMask cmpgt(const LaneVector& a, const LaneVector& b) {
  std::uint16_t m = 0;
  for (int i = 0; i < lane_count; ++i) m |= static_cast<std::uint16_t>((a[i] > b[i]) << i);
  return {m};
}

constexpr LaneMask cmpeq(const LaneVector& a, const LaneVector& b) {
  std::uint16_t m = 0;
  for (int i = 0; i < lane_count; ++i) m |= static_cast<std::uint16_t>((a[i] == b[i]) << i);
  return {m};
}

/// Lane i receives a bitmask of the lower-indexed lanes j < i with
/// a[j] == a[i] (vpconflictd).
constexpr LaneVector conflict(const LaneVector& a) {
  LaneVector r;
  for (int i = 0; i < lane_count; ++i) {
    std::uint32_t m = 0;
    for (int j = 0; j < i; ++j) m |= static_cast<std::uint32_t>(a[j] == a[i]) << j;
    r[i] = m;
  }
  return r;
}

constexpr std::uint32_t reduce_or(const LaneVector& a) {
  std::uint32_t r = 0;
  for (auto v : a.lanes) r |= v;
  return r;
}

constexpr LaneVector popcnt(const LaneVector& a) {
  LaneVector r;
  for (int i = 0; i < lane_count; ++i) r[i] = static_cast<std::uint32_t>(std::popcount(a[i]));
  return r;
}

constexpr LaneVector add(const LaneVector& a, const LaneVector& b) {
  LaneVector r;
  for (int i = 0; i < lane_count; ++i) r[i] = a[i] + b[i];
  return r;
}

constexpr LaneVector min(const LaneVector& a, const LaneVector& b) {
  LaneVector r;
  for (int i = 0; i < lane_count; ++i) r[i] = a[i] < b[i] ? a[i] : b[i];
  return r;
}

constexpr LaneVector shift_right(const LaneVector& a, unsigned bits) {
  LaneVector r;
  for (int i = 0; i < lane_count; ++i) r[i] = a[i] >> bits;
  return r;
}

inline LaneVector gather(std::span<const std::uint32_t> base, const LaneVector& idx) {
  LaneVector r;
  for (int i = 0; i < lane_count; ++i) {
    assert(idx[i] < base.size());
    r[i] = base[idx[i]];
  }
  return r;
}

/// Lanes are written in ascending order, so when indices repeat the
/// highest lane wins.
inline void scatter(std::span<std::uint32_t> base, const LaneVector& idx, const LaneVector& vals) {
  for (int i = 0; i < lane_count; ++i) {
    assert(idx[i] < base.size());
    base[idx[i]] = vals[i];
  }
}

inline void scatter(std::span<std::uint32_t> base, LaneMask mask, const LaneVector& idx,
                    const LaneVector& vals) {
  for (int i = 0; i < lane_count; ++i) {
    if (!mask.test(i)) continue;
    assert(idx[i] < base.size());
    base[idx[i]] = vals[i];
  }
}

/// r[i] = a[idx[i] mod 16] (vpermd).
constexpr LaneVector permute(const LaneVector& a, const LaneVector& idx) {
  LaneVector r;
  for (int i = 0; i < lane_count; ++i) r[i] = a[idx[i] & (lane_count - 1)];
  return r;
}

}  // namespace lanes
}  // namespace tadk::hist
