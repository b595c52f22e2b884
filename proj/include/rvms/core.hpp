#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <utility>

#ifndef RVMS_LANE_WIDTH
#define RVMS_LANE_WIDTH 4
#endif

namespace rvms {

// Sort key. The whole pipeline moves 32-bit signed values; ordering is the
// natural integer order.
using Element = std::int32_t;

constexpr bool is_pow2(std::size_t v) { return v != 0 && (v & (v - 1)) == 0; }

// Lanes per virtual vector register. Configurable at build time
// (-DRVMS_LANE_WIDTH=8); every network is generated rather than unrolled by
// hand, so any power of two works.
inline constexpr std::size_t kLaneWidth = RVMS_LANE_WIDTH;
static_assert(kLaneWidth >= 2 && is_pow2(kLaneWidth));

// Rows in one register block. The column sorter is a 16-input network, so the
// default stays 16.
inline constexpr std::size_t kRegisterRows = 16;

// Elements handled by one block sort.
inline constexpr std::size_t kBlockElements = kRegisterRows * kLaneWidth;

// Default in-cache working set, in elements.
inline constexpr std::size_t kCacheBlockElements = std::size_t{1} << 15;

// One virtual vector register: W lanes of Element.
template <std::size_t W = kLaneWidth>
struct LaneVector {
  static_assert(W >= 2 && is_pow2(W));
  std::array<Element, W> lane{};

  constexpr Element& operator[](std::size_t i) { return lane[i]; }
  constexpr const Element& operator[](std::size_t i) const { return lane[i]; }

  friend constexpr bool operator==(const LaneVector&, const LaneVector&) = default;
};

// R consecutive registers; the unit loaded by a block sort.
template <std::size_t R = kRegisterRows, std::size_t W = kLaneWidth>
struct RegisterBlock {
  static_assert(R >= W && R % W == 0);
  std::array<LaneVector<W>, R> row{};

  friend constexpr bool operator==(const RegisterBlock&, const RegisterBlock&) = default;
};

// Compare-exchange: one comparison feeding two conditional selects, no
// data-dependent branch. Returns (lo, hi).
constexpr std::pair<Element, Element> cmpx_scalar(Element a, Element b) {
  const bool gt = a > b;
  const Element lo = gt ? b : a;
  const Element hi = gt ? a : b;
  return {lo, hi};
}

// In-place flavor used by the execution loops.
constexpr void cmpx_swap(Element& a, Element& b) {
  const auto [lo, hi] = cmpx_scalar(a, b);
  a = lo;
  b = hi;
}

// Lane-wise min/max of two registers. Lanes pair off independently; there is
// no cross-lane traffic here, which is exactly what makes aligned network
// rounds cheap.
template <std::size_t W>
constexpr std::pair<LaneVector<W>, LaneVector<W>> cmpx_vector(const LaneVector<W>& a,
                                                              const LaneVector<W>& b) {
  LaneVector<W> lo;
  LaneVector<W> hi;
  for (std::size_t k = 0; k < W; ++k) {
    const auto [l, h] = cmpx_scalar(a.lane[k], b.lane[k]);
    lo.lane[k] = l;
    hi.lane[k] = h;
  }
  return {lo, hi};
}

template <std::size_t W>
constexpr void cmpx_swap_vector(LaneVector<W>& a, LaneVector<W>& b) {
  auto [lo, hi] = cmpx_vector(a, b);
  a = lo;
  b = hi;
}

}  // namespace rvms
