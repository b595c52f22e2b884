#include "rvms/cachemerge.hpp"

#include <algorithm>
#include <array>
#include <cassert>
#include <cstddef>
#include <span>
#include <stdexcept>

#include "rvms/core.hpp"
#include "rvms/networks.hpp"
#include "rvms/regsort.hpp"

namespace rvms {

namespace {

void require(bool ok, const char* message) {
  if (!ok) throw std::invalid_argument(message);
}

// Mirror image of half_merge_serial for pairs whose second run is the
// shorter one: copies buf[mid..n) out and rebuilds the pair from the back,
// taking the larger head each step. Ties take the scratch side first, which
// keeps equal elements in the same order the forward routine produces.
MergeStats half_merge_serial_backward(std::span<Element> buf, std::size_t mid,
                                      HalfScratch& scratch) {
  const std::size_t n = buf.size();
  MergeStats stats;
  if (mid == 0 || mid == n) return stats;

  const std::size_t blen = n - mid;
  std::span<Element> b = scratch.acquire(blen);
  std::copy_n(buf.begin() + static_cast<std::ptrdiff_t>(mid), blen, b.begin());
  stats.scratch_assignments = blen;

  std::size_t i = mid;   // unplaced first-run elements, buf[0..i)
  std::size_t j = blen;  // unplaced second-run elements, b[0..j)
  std::size_t w = n;     // one past the next write position
  while (j > 0) {
    // Once the scratch empties, buf[0..i) is already in place.
    const bool take_b = i == 0 || b[j - 1] >= buf[i - 1];
    buf[--w] = take_b ? b[--j] : buf[--i];
    ++stats.buf_assignments;
    assert(w >= i);
  }
  return stats;
}

void binary_insertion_sort(std::span<Element> v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    const auto it = v.begin() + static_cast<std::ptrdiff_t>(i);
    std::rotate(std::upper_bound(v.begin(), it, *it), it, it + 1);
  }
}

}  // namespace

std::span<Element> HalfScratch::acquire(std::size_t count) {
  require(count <= buf_.size(), "merge needs more scratch than the block allows");
  high_water_ = std::max(high_water_, count);
  return std::span<Element>(buf_.data(), count);
}

std::span<Element> FullScratch::acquire(std::size_t count) {
  require(count <= buf_.size(), "merge needs more scratch than the block allows");
  high_water_ = std::max(high_water_, count);
  return std::span<Element>(buf_.data(), count);
}

MergeStats half_merge_serial(std::span<Element> buf, std::size_t mid, HalfScratch& scratch) {
  const std::size_t n = buf.size();
  require(mid <= n, "run boundary past the end of the buffer");
  MergeStats stats;
  if (mid == 0 || mid == n) return stats;

  std::span<Element> a = scratch.acquire(mid);
  std::copy_n(buf.begin(), mid, a.begin());
  stats.scratch_assignments = mid;

  std::size_t i = 0;    // next scratch element
  std::size_t j = mid;  // next second-run element, still in buf
  for (std::size_t w = 0; w < n; ++w) {
    // Taking from the scratch while i < mid implies w < j, so the write can
    // never clobber an unread element; once the scratch empties the loop
    // degenerates to self-assignments with w == j.
    const bool take_a = i < mid && (j == n || a[i] <= buf[j]);
    buf[w] = take_a ? a[i++] : buf[j++];
    assert(w < j);
  }
  stats.buf_assignments = n;
  return stats;
}

MergeStats half_merge_vectorized(std::span<Element> buf, std::size_t mid, HalfScratch& scratch) {
  constexpr std::size_t kW = kLaneWidth;
  const std::size_t n = buf.size();
  require(mid <= n, "run boundary past the end of the buffer");
  MergeStats stats;
  if (mid == 0 || mid == n) return stats;
  require(mid % kW == 0 && (n - mid) % kW == 0,
          "run lengths must be multiples of the lane width");

  std::span<Element> a = scratch.acquire(mid);
  std::copy_n(buf.begin(), mid, a.begin());
  stats.scratch_assignments = mid;

  static const FlatNetwork merge_net = flatten(gen_oddeven_merge(2 * static_cast<int>(kW)));
  std::array<Element, 2 * kW> work;

  // Prime with one block from each run, emit the smaller half, carry the
  // larger half in work[kW..2kW).
  std::copy_n(a.begin(), kW, work.begin());
  std::copy_n(buf.begin() + static_cast<std::ptrdiff_t>(mid), kW, work.begin() + kW);
  std::size_t ai = kW;       // consumed from the scratch copy of the first run
  std::size_t bi = mid + kW; // next unread second-run element, still in buf
  run_flat(merge_net, work.data());
  std::copy_n(work.begin(), kW, buf.begin());
  std::size_t out = kW;

  while (ai < mid || bi < n) {
    std::copy_n(work.begin() + kW, kW, work.begin());
    const bool from_a = ai < mid && (bi == n || a[ai] <= buf[bi]);
    if (from_a) {
      std::copy_n(a.begin() + static_cast<std::ptrdiff_t>(ai), kW, work.begin() + kW);
      ai += kW;
    } else {
      std::copy_n(buf.begin() + static_cast<std::ptrdiff_t>(bi), kW, work.begin() + kW);
      bi += kW;
    }
    run_flat(merge_net, work.data());
    std::copy_n(work.begin(), kW, buf.begin() + static_cast<std::ptrdiff_t>(out));
    out += kW;
    // out == ai + (bi - mid) - kW, and ai <= mid, so the emitted block ends
    // at least one full block before the unread part of the second run.
    assert(out <= bi);
  }
  std::copy_n(work.begin() + kW, kW, buf.begin() + static_cast<std::ptrdiff_t>(out));
  stats.buf_assignments = n;
  return stats;
}

MergeStats merge_adjacent(std::span<Element> buf, std::size_t mid, HalfScratch& scratch,
                          HalfMergeMode mode) {
  require(mid <= buf.size(), "run boundary past the end of the buffer");
  const std::size_t right = buf.size() - mid;
  if (mid > right) return half_merge_serial_backward(buf, mid, scratch);
  if (mode == HalfMergeMode::vectorized && mid % kLaneWidth == 0 && right % kLaneWidth == 0)
    return half_merge_vectorized(buf, mid, scratch);
  return half_merge_serial(buf, mid, scratch);
}

MergeStats sort_in_cache(std::span<Element> data, HalfScratch& scratch, HalfMergeMode mode,
                         const BlockSorter& blocks) {
  MergeStats stats;
  const std::size_t n = data.size();
  const std::size_t prefix = n - n % kBlockElements;
  for (std::size_t off = 0; off < prefix; off += kBlockElements)
    blocks.sort(data.subspan(off, kBlockElements));
  binary_insertion_sort(data.subspan(prefix));

  for (std::size_t run = kBlockElements; run < prefix; run *= 2) {
    for (std::size_t off = 0; off + run < prefix; off += 2 * run) {
      const std::size_t end = std::min(off + 2 * run, prefix);
      stats += merge_adjacent(data.subspan(off, end - off), run, scratch, mode);
    }
  }
  if (prefix != 0 && prefix != n) stats += merge_adjacent(data, prefix, scratch, mode);
  return stats;
}

MergeStats sort_in_cache_naive(std::span<Element> data, FullScratch& scratch,
                               const BlockSorter& blocks) {
  const auto merge_pair = [&scratch](std::span<Element> buf, std::size_t mid) {
    MergeStats stats;
    std::span<Element> tmp = scratch.acquire(buf.size());
    std::copy(buf.begin(), buf.end(), tmp.begin());
    stats.scratch_assignments = buf.size();
    std::merge(tmp.begin(), tmp.begin() + static_cast<std::ptrdiff_t>(mid),
               tmp.begin() + static_cast<std::ptrdiff_t>(mid), tmp.end(), buf.begin());
    stats.buf_assignments = buf.size();
    return stats;
  };

  MergeStats stats;
  const std::size_t n = data.size();
  const std::size_t prefix = n - n % kBlockElements;
  for (std::size_t off = 0; off < prefix; off += kBlockElements)
    blocks.sort(data.subspan(off, kBlockElements));
  binary_insertion_sort(data.subspan(prefix));

  for (std::size_t run = kBlockElements; run < prefix; run *= 2) {
    for (std::size_t off = 0; off + run < prefix; off += 2 * run) {
      const std::size_t end = std::min(off + 2 * run, prefix);
      stats += merge_pair(data.subspan(off, end - off), run);
    }
  }
  if (prefix != 0 && prefix != n) stats += merge_pair(data, prefix);
  return stats;
}

}  // namespace rvms
