#include "rvms/parallel.hpp"

#include <algorithm>
#include <cassert>
#include <chrono>
#include <cstddef>
#include <exception>
#include <optional>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

namespace rvms {
namespace {

void require(bool ok, const char* message) {
  if (!ok) throw std::invalid_argument(message);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Runs body(worker) on `workers` threads, worker 0 on the calling thread,
// and joins them all; joining is the barrier between rounds. The first
// exception raised by any worker is rethrown after the join.
template <typename Body>
void fork_join(std::size_t workers, const Body& body) {
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) {
      pool.emplace_back([&errors, &body, w] {
        try {
          body(w);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    try {
      body(0);
    } catch (...) {
      errors[0] = std::current_exception();
    }
  }
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

struct Chunk {
  std::size_t begin = 0;
  std::size_t end = 0;
};

// Phase-1 body for one worker: sort the chunk cache block by cache block,
// fold the blocks with a merge tree, and leave the result in data or aux as
// the round parity demands.
void sort_chunk(std::span<Element> data, std::span<Element> aux, Chunk c, bool want_aux,
                const SortConfig& cfg, const BlockSorter& sorter, HalfScratch& half,
                FullScratch* full) {
  const std::size_t len = c.end - c.begin;
  if (len == 0) return;
  const std::span<Element> chunk = data.subspan(c.begin, len);

  std::vector<Run> runs;
  runs.reserve(len / cfg.block_elements + 1);
  for (std::size_t off = 0; off < len; off += cfg.block_elements) {
    const std::size_t block_len = std::min(cfg.block_elements, len - off);
    if (full != nullptr) {
      sort_in_cache_naive(chunk.subspan(off, block_len), *full, sorter);
    } else {
      sort_in_cache(chunk.subspan(off, block_len), half, cfg.in_cache_mode, sorter);
    }
    runs.push_back({off, block_len});
  }

  if (runs.size() > 1) {
    merge_tree(chunk, runs, aux.subspan(c.begin, len), cfg.variant);
    if (!want_aux) std::copy_n(aux.begin() + static_cast<std::ptrdiff_t>(c.begin), len,
                               data.begin() + static_cast<std::ptrdiff_t>(c.begin));
  } else if (want_aux) {
    std::copy_n(chunk.begin(), len, aux.begin() + static_cast<std::ptrdiff_t>(c.begin));
  }
}

}  // namespace

PartitionPoint co_rank(std::span<const Element> a, std::span<const Element> b, std::size_t k) {
  if (k > a.size() + b.size()) throw std::out_of_range("co_rank: rank beyond both runs");
  assert(std::is_sorted(a.begin(), a.end()));
  assert(std::is_sorted(b.begin(), b.end()));

  // Search for the largest a_split whose prefix belongs to the k smallest.
  // Both probes below are in range: lo <= i < hi gives a[i] and, because
  // i < hi <= k and i >= lo >= k - |b|, also b[k - i - 1].
  std::size_t lo = k > b.size() ? k - b.size() : 0;
  std::size_t hi = std::min(k, a.size());
  while (lo < hi) {
    const std::size_t i = lo + (hi - lo) / 2;
    if (b[k - i - 1] >= a[i]) {
      lo = i + 1;  // a[i] precedes b[k-i-1], so the prefix of a grows
    } else {
      hi = i;
    }
  }
  return {lo, k - lo};
}

PhaseTimes parallel_sort(std::span<Element> data, const SortConfig& config) {
  require(config.threads >= 1, "parallel_sort: thread count must be at least one");
  require(config.block_elements >= 1, "parallel_sort: block size must be at least one");

  PhaseTimes times;
  const std::size_t n = data.size();
  if (n <= 1) return times;

  const std::size_t workers = n < config.threads ? 1 : config.threads;
  std::size_t rounds = 0;
  for (std::size_t reach = 1; reach < workers; reach *= 2) ++rounds;

  // Runs ping-pong between data and aux each round; the parity of the round
  // count decides where phase 1 must leave them so the result lands in data.
  const bool phase1_to_aux = rounds % 2 == 1;
  const bool need_aux = rounds > 0 || n > config.block_elements;
  std::vector<Element> aux_store(need_aux ? n : 0);
  const std::span<Element> aux(aux_store);

  // Stock register-stage configurations share the cached sorter; only custom
  // ones pay for network generation and planning.
  std::optional<BlockSorter> custom_sorter;
  if (!(config.block == BlockSorter::Config{})) custom_sorter.emplace(config.block);
  const BlockSorter& sorter = custom_sorter ? *custom_sorter : default_block_sorter();

  const std::size_t scratch_len = std::max(config.block_elements, n / workers + 2);
  std::vector<HalfScratch> half;
  half.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) half.emplace_back(scratch_len);
  std::vector<FullScratch> full;
  if (config.naive_in_cache) {
    full.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) full.emplace_back(config.block_elements);
  }

  std::vector<std::size_t> bounds(workers + 1);
  for (std::size_t w = 0; w <= workers; ++w) bounds[w] = split_index(n, workers, w);

  const auto phase1_start = std::chrono::steady_clock::now();
  fork_join(workers, [&](std::size_t w) {
    if (config.probe) config.probe(1, 0, w, true);
    sort_chunk(data, aux, {bounds[w], bounds[w + 1]}, phase1_to_aux, config, sorter, half[w],
               full.empty() ? nullptr : &full[w]);
    if (config.probe) config.probe(1, 0, w, false);
  });
  times.in_thread_seconds = seconds_since(phase1_start);

  const auto phase2_start = std::chrono::steady_clock::now();
  std::span<Element> cur = phase1_to_aux ? aux : data;
  std::span<Element> nxt = phase1_to_aux ? data : aux;
  for (std::size_t round = 0; round < rounds; ++round) {
    const std::size_t run_count = bounds.size() - 1;
    const std::size_t pairs = run_count / 2;

    // The partition table is computed up front and read-only afterwards: one
    // row per pair, one split per worker boundary.
    std::vector<std::vector<PartitionPoint>> cuts(pairs);
    for (std::size_t p = 0; p < pairs; ++p) {
      const std::span<const Element> a = cur.subspan(bounds[2 * p], bounds[2 * p + 1] - bounds[2 * p]);
      const std::span<const Element> b =
          cur.subspan(bounds[2 * p + 1], bounds[2 * p + 2] - bounds[2 * p + 1]);
      cuts[p].resize(workers + 1);
      for (std::size_t w = 0; w <= workers; ++w)
        cuts[p][w] = co_rank(a, b, split_index(a.size() + b.size(), workers, w));
    }

    fork_join(workers, [&](std::size_t w) {
      if (config.probe) config.probe(2, static_cast<int>(round), w, true);
      for (std::size_t p = 0; p < pairs; ++p) {
        const std::size_t a_off = bounds[2 * p];
        const std::size_t b_off = bounds[2 * p + 1];
        const PartitionPoint at = cuts[p][w];
        const PartitionPoint next = cuts[p][w + 1];
        const std::size_t a_len = next.a_split - at.a_split;
        const std::size_t b_len = next.b_split - at.b_split;
        const std::size_t out_off = a_off + at.a_split + at.b_split;

        // Lay the two sub-runs side by side in the destination, then merge
        // them in place; this is the only writer of that output span.
        const std::span<Element> seg = nxt.subspan(out_off, a_len + b_len);
        std::copy_n(cur.begin() + static_cast<std::ptrdiff_t>(a_off + at.a_split), a_len,
                    seg.begin());
        std::copy_n(cur.begin() + static_cast<std::ptrdiff_t>(b_off + at.b_split), b_len,
                    seg.begin() + static_cast<std::ptrdiff_t>(a_len));
        merge_adjacent(seg, a_len, half[w], HalfMergeMode::serial);
      }
      if (run_count % 2 == 1) {
        // Odd run out: carry it over to the destination buffer in equal
        // shares so the next round sees every run in one place.
        const std::size_t tail_begin = bounds[run_count - 1];
        const std::size_t tail_len = bounds[run_count] - tail_begin;
        const std::size_t from = split_index(tail_len, workers, w);
        const std::size_t to = split_index(tail_len, workers, w + 1);
        std::copy_n(cur.begin() + static_cast<std::ptrdiff_t>(tail_begin + from), to - from,
                    nxt.begin() + static_cast<std::ptrdiff_t>(tail_begin + from));
      }
      if (config.probe) config.probe(2, static_cast<int>(round), w, false);
    });

    std::vector<std::size_t> folded;
    folded.reserve(pairs + 2);
    for (std::size_t i = 0; i + 1 < bounds.size(); i += 2) folded.push_back(bounds[i]);
    folded.push_back(bounds.back());
    bounds = std::move(folded);
    std::swap(cur, nxt);
  }
  times.out_thread_seconds = seconds_since(phase2_start);

  assert(cur.data() == data.data());
  assert(std::is_sorted(data.begin(), data.end()));
  return times;
}

PhaseTimes parallel_sort(std::span<Element> data, std::size_t threads) {
  SortConfig config;
  config.threads = threads;
  return parallel_sort(data, config);
}

}  // namespace rvms
