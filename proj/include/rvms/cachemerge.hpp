#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rvms/core.hpp"
#include "rvms/regsort.hpp"

namespace rvms {

// A sorted run inside a larger buffer.
struct Run {
  std::size_t offset = 0;
  std::size_t length = 0;
};

// Assignment counters for one merge call or an accumulated sequence of them.
// The merge routines move elements with plain assignments, never swaps, so
// these counters capture the full data traffic.
struct MergeStats {
  std::size_t buf_assignments = 0;
  std::size_t scratch_assignments = 0;

  MergeStats& operator+=(const MergeStats& other) {
    buf_assignments += other.buf_assignments;
    scratch_assignments += other.scratch_assignments;
    return *this;
  }
};

// Reusable auxiliary store sized for half of a working buffer. Merges copy
// the shorter run here and rebuild the pair in place, so a buffer of
// block_len elements never needs more than ceil(block_len / 2) extra slots.
// The high-water mark records the largest borrow since the last reset.
class HalfScratch {
 public:
  explicit HalfScratch(std::size_t block_len) : buf_((block_len + 1) / 2) {}

  std::size_t capacity() const { return buf_.size(); }
  std::size_t high_water() const { return high_water_; }
  void reset_high_water() { high_water_ = 0; }

  // Borrows the first count slots; valid until the next acquire. Throws
  // std::invalid_argument when count exceeds the capacity.
  std::span<Element> acquire(std::size_t count);

 private:
  std::vector<Element> buf_;
  std::size_t high_water_ = 0;
};

// Full-size auxiliary store for the baseline that copies whole pairs out.
class FullScratch {
 public:
  explicit FullScratch(std::size_t block_len) : buf_(block_len) {}

  std::size_t capacity() const { return buf_.size(); }
  std::size_t high_water() const { return high_water_; }
  void reset_high_water() { high_water_ = 0; }

  std::span<Element> acquire(std::size_t count);

 private:
  std::vector<Element> buf_;
  std::size_t high_water_ = 0;
};

// Merges the sorted runs buf[0..mid) and buf[mid..n) in place. The first run
// is copied into the scratch, then the pair is rebuilt from the front with
// exactly n assignments into buf; ties take the scratch side first. The
// write cursor can never overtake the unread tail, so no element is lost.
// mid == 0 and mid == n return immediately without touching the scratch.
MergeStats half_merge_serial(std::span<Element> buf, std::size_t mid, HalfScratch& scratch);

// Same contract as half_merge_serial, but streams lane-width blocks of each
// run through a fixed two-block merging network: every round emits the
// smallest block to the output cursor and re-merges the carried block with
// the next block from whichever run has the smaller head. Requires mid and
// n - mid to be multiples of kLaneWidth.
MergeStats half_merge_vectorized(std::span<Element> buf, std::size_t mid, HalfScratch& scratch);

// Which merge routine sort_in_cache uses for balanced, lane-aligned pairs.
enum class HalfMergeMode { serial, vectorized };

// Merges buf[0..mid) with buf[mid..n) in place, copying out whichever run is
// shorter (the second run is handled by a mirrored backward pass), so the
// scratch never holds more than half the pair. The vectorized mode applies
// only when both run lengths are lane-aligned; other shapes fall back to the
// serial routine.
MergeStats merge_adjacent(std::span<Element> buf, std::size_t mid, HalfScratch& scratch,
                          HalfMergeMode mode = HalfMergeMode::serial);

// Sorts a buffer that fits in the fast part of the memory hierarchy: sorts
// each kBlockElements chunk with the block sorter, binary-insertion sorts
// the sub-block tail, then merges runs of doubling length in place through
// the scratch. Peak scratch usage stays at or below ceil(n / 2) because
// every merge copies out only the shorter run.
MergeStats sort_in_cache(std::span<Element> data, HalfScratch& scratch,
                         HalfMergeMode mode = HalfMergeMode::serial,
                         const BlockSorter& blocks = default_block_sorter());

// Baseline with the same pass structure whose merges copy the whole pair to
// the scratch and merge back, so peak scratch usage reaches the full buffer
// length. Exists to measure what the half-size scheme saves.
MergeStats sort_in_cache_naive(std::span<Element> data, FullScratch& scratch,
                               const BlockSorter& blocks = default_block_sorter());

}  // namespace rvms
