#pragma once

#include <cstddef>
#include <functional>
#include <span>

#include "rvms/cachemerge.hpp"
#include "rvms/core.hpp"
#include "rvms/multiway.hpp"
#include "rvms/regsort.hpp"

namespace rvms {

// Split of two sorted runs at one output rank: merging a[0, a_split) with
// b[0, b_split) yields exactly the first a_split + b_split elements of the
// combined merge. Ties resolve toward a, matching a left-to-right stable
// merge, so splits computed independently by different workers agree.
struct PartitionPoint {
  std::size_t a_split = 0;
  std::size_t b_split = 0;
};

// Finds the partition for output rank k by binary search over the shorter
// feasible range. Both runs must be sorted. k > |a| + |b| throws
// std::out_of_range.
PartitionPoint co_rank(std::span<const Element> a, std::span<const Element> b, std::size_t k);

// Boundary of share `part` when `total` units are spread over `parts`
// workers. Consecutive boundaries differ by floor(total / parts) or
// ceil(total / parts), so no worker carries more than one extra unit.
inline std::size_t split_index(std::size_t total, std::size_t parts, std::size_t part) {
  return total / parts * part + total % parts * part / parts;
}

// Wall-clock seconds spent in the two phases of parallel_sort: chunk-local
// sorting and the cooperative cross-chunk merge rounds.
struct PhaseTimes {
  double in_thread_seconds = 0.0;
  double out_thread_seconds = 0.0;
};

// Test hook reporting worker progress. phase is 1 (chunk sort) or 2 (merge
// rounds); round is the merge round index, always 0 in phase 1; enter tells
// whether the worker is starting (true) or finishing (false) its share of
// that round. Invoked concurrently from worker threads; the callee
// synchronizes its own state.
using PhaseProbe = std::function<void(int phase, int round, std::size_t worker, bool enter)>;

struct SortConfig {
  std::size_t threads = 1;
  std::size_t block_elements = kCacheBlockElements;  // in-cache run length
  HalfMergeMode in_cache_mode = HalfMergeMode::vectorized;
  bool naive_in_cache = false;  // whole-pair copy merges instead of half merges
  AsymVariant variant = AsymVariant::standard;
  BlockSorter::Config block{};
  PhaseProbe probe;  // optional
};

// Sorts data in place. Phase 1 cuts the input into `threads` equal chunks;
// each worker sorts its chunk one cache block at a time and joins the blocks
// with a four-way merge tree. Phase 2 folds the chunk runs pairwise over
// ceil(log2 threads) rounds; in every round all workers cooperate on each
// pair, merging equal output spans located through co_rank, with a join
// barrier between rounds. The result never depends on the thread count.
// threads == 0 or block_elements == 0 throw std::invalid_argument; inputs
// shorter than the thread count fall back to a single worker.
PhaseTimes parallel_sort(std::span<Element> data, const SortConfig& config);
PhaseTimes parallel_sort(std::span<Element> data, std::size_t threads = 1);

}  // namespace rvms
