#include "rvms/cachemerge.hpp"

#include <algorithm>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "rvms/core.hpp"
#include "rvms/regsort.hpp"

namespace rvms {
namespace {

std::vector<Element> random_values(std::size_t n, std::uint64_t seed, Element lo = -1000,
                                   Element hi = 1000) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Element> dist(lo, hi);
  std::vector<Element> v(n);
  for (Element& x : v) x = dist(rng);
  return v;
}

std::vector<Element> sorted_copy(std::vector<Element> v) {
  std::sort(v.begin(), v.end());
  return v;
}

// Two sorted runs laid back to back, plus the expected merged result.
struct RunPair {
  std::vector<Element> buf;
  std::size_t mid;
  std::vector<Element> expected;
};

RunPair random_pair(std::size_t a_len, std::size_t b_len, std::uint64_t seed) {
  RunPair p;
  p.buf = random_values(a_len + b_len, seed);
  p.mid = a_len;
  std::sort(p.buf.begin(), p.buf.begin() + static_cast<std::ptrdiff_t>(a_len));
  std::sort(p.buf.begin() + static_cast<std::ptrdiff_t>(a_len), p.buf.end());
  p.expected = sorted_copy(p.buf);
  return p;
}

}  // namespace

TEST_SUITE("cachemerge") {

TEST_CASE("serial half merge rebuilds a small pair in place") {
  std::vector<Element> buf = {1, 2, 5, 3, 4, 6};
  HalfScratch scratch(buf.size());
  REQUIRE(scratch.capacity() == 3);

  const MergeStats stats = half_merge_serial(buf, 3, scratch);

  CHECK(buf == std::vector<Element>({1, 2, 3, 4, 5, 6}));
  CHECK(scratch.high_water() == 3);
  CHECK(stats.buf_assignments == 6);
  CHECK(stats.scratch_assignments == 3);
}

TEST_CASE("degenerate splits never touch the scratch") {
  const std::vector<Element> original = {4, 9, 23};
  HalfScratch scratch(original.size());

  for (const std::size_t mid : {std::size_t{0}, original.size()}) {
    std::vector<Element> buf = original;
    const MergeStats stats = half_merge_serial(buf, mid, scratch);
    CHECK(buf == original);
    CHECK(stats.buf_assignments == 0);
    CHECK(stats.scratch_assignments == 0);
  }
  CHECK(scratch.high_water() == 0);
}

TEST_CASE("serial half merge matches the library merge on random runs") {
  HalfScratch scratch(128);
  std::uint64_t seed = 1;
  for (std::size_t a_len = 0; a_len <= 20; ++a_len) {
    for (std::size_t b_len = 0; b_len <= 20; ++b_len) {
      for (int rep = 0; rep < 25; ++rep) {
        RunPair p = random_pair(a_len, b_len, seed++);
        const MergeStats stats = half_merge_serial(p.buf, p.mid, scratch);
        REQUIRE(p.buf == p.expected);
        if (p.mid != 0 && p.mid != p.buf.size()) {
          REQUIRE(stats.buf_assignments == p.buf.size());
          REQUIRE(stats.scratch_assignments == p.mid);
        }
      }
    }
  }
}

TEST_CASE("the first run may be longer than the second") {
  // The capacity is the only limit on the split position; a caller with a
  // large enough scratch can put the boundary anywhere.
  HalfScratch scratch(200);
  RunPair p = random_pair(90, 10, 77);
  half_merge_serial(p.buf, p.mid, scratch);
  CHECK(p.buf == p.expected);
  CHECK(scratch.high_water() == 90);
}

TEST_CASE("merges that outgrow the scratch are rejected") {
  HalfScratch scratch(4);
  REQUIRE(scratch.capacity() == 2);

  std::vector<Element> buf = {1, 2, 5, 3, 4, 6};
  CHECK_THROWS_AS(half_merge_serial(buf, 3, scratch), std::invalid_argument);
  CHECK_THROWS_AS(half_merge_serial(buf, 7, scratch), std::invalid_argument);

  std::vector<Element> aligned(2 * kLaneWidth);
  CHECK_THROWS_AS(half_merge_vectorized(aligned, kLaneWidth, scratch), std::invalid_argument);
}

TEST_CASE("vectorized half merge interleaves two arithmetic runs") {
  std::vector<Element> buf(64);
  for (int i = 0; i < 32; ++i) buf[static_cast<std::size_t>(i)] = 2 * i;
  for (int i = 0; i < 32; ++i) buf[static_cast<std::size_t>(32 + i)] = 2 * i + 1;
  HalfScratch scratch(buf.size());

  const MergeStats stats = half_merge_vectorized(buf, 32, scratch);

  for (int i = 0; i < 64; ++i) CHECK(buf[static_cast<std::size_t>(i)] == i);
  CHECK(scratch.high_water() == 32);
  CHECK(stats.buf_assignments == 64);
  CHECK(stats.scratch_assignments == 32);
}

TEST_CASE("vectorized half merge keeps an already ordered pair intact") {
  std::vector<Element> buf(64);
  for (int i = 0; i < 64; ++i) buf[static_cast<std::size_t>(i)] = i;
  HalfScratch scratch(buf.size());
  half_merge_vectorized(buf, 32, scratch);
  for (int i = 0; i < 64; ++i) CHECK(buf[static_cast<std::size_t>(i)] == i);
}

TEST_CASE("vectorized and serial half merges agree everywhere") {
  HalfScratch scratch_s(512);
  HalfScratch scratch_v(512);
  std::uint64_t seed = 1000;
  for (std::size_t a_blocks = 1; a_blocks <= 10; ++a_blocks) {
    for (std::size_t b_blocks = 1; b_blocks <= 10; ++b_blocks) {
      for (int rep = 0; rep < 20; ++rep) {
        RunPair p = random_pair(a_blocks * kLaneWidth, b_blocks * kLaneWidth, seed++);
        std::vector<Element> other = p.buf;

        const MergeStats ss = half_merge_serial(p.buf, p.mid, scratch_s);
        const MergeStats vs = half_merge_vectorized(other, p.mid, scratch_v);

        REQUIRE(p.buf == p.expected);
        REQUIRE(other == p.expected);
        REQUIRE(ss.buf_assignments == vs.buf_assignments);
        REQUIRE(ss.scratch_assignments == vs.scratch_assignments);
      }
    }
  }
  CHECK(scratch_s.high_water() == scratch_v.high_water());
}

TEST_CASE("vectorized half merge handles duplicate-heavy runs") {
  HalfScratch scratch(512);
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    RunPair p = random_pair(8 * kLaneWidth, 6 * kLaneWidth, seed);
    for (Element& x : p.buf) x &= 3;  // collapse to four distinct values
    std::sort(p.buf.begin(), p.buf.begin() + static_cast<std::ptrdiff_t>(p.mid));
    std::sort(p.buf.begin() + static_cast<std::ptrdiff_t>(p.mid), p.buf.end());
    p.expected = sorted_copy(p.buf);
    half_merge_vectorized(p.buf, p.mid, scratch);
    REQUIRE(p.buf == p.expected);
  }
}

TEST_CASE("vectorized half merge insists on lane-aligned runs") {
  HalfScratch scratch(128);
  std::vector<Element> buf(3 + kLaneWidth);
  CHECK_THROWS_AS(half_merge_vectorized(buf, 3, scratch), std::invalid_argument);

  std::vector<Element> tail(kLaneWidth + 2);
  CHECK_THROWS_AS(half_merge_vectorized(tail, kLaneWidth, scratch), std::invalid_argument);
}

TEST_CASE("sort_in_cache sorts every probed length") {
  const std::size_t lengths[] = {0,   1,   2,    3,    63,   64,   65,   100,  127,
                                 128, 129, 192,  320,  1000, 2048, 4095, 4096, 5000};
  for (const std::size_t n : lengths) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      std::vector<Element> data = random_values(n, 31 * n + seed);
      const std::vector<Element> expected = sorted_copy(data);
      HalfScratch scratch(n);
      sort_in_cache(data, scratch);
      REQUIRE(data == expected);
      REQUIRE(scratch.high_water() <= (n + 1) / 2);
    }
  }
}

TEST_CASE("sort_in_cache peak scratch usage on reference lengths") {
  // 4096 = 64 blocks: the last pass merges two 2048-element halves. 100 has
  // one full block and a 36-element tail, folded by copying out the tail.
  // 64 is a single block and needs no merge at all.
  struct Case {
    std::size_t length;
    std::size_t peak;
  };
  for (const Case c : {Case{4096, 2048}, Case{100, 36}, Case{64, 0}}) {
    std::vector<Element> data = random_values(c.length, c.length);
    const std::vector<Element> expected = sorted_copy(data);
    HalfScratch scratch(c.length);
    sort_in_cache(data, scratch);
    CHECK(data == expected);
    CHECK(scratch.high_water() == c.peak);
  }
}

TEST_CASE("adversarial shapes survive sort_in_cache") {
  const std::size_t n = 1000;
  std::vector<std::vector<Element>> shapes;
  std::vector<Element> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<Element>(i);
  shapes.push_back(v);
  std::reverse(v.begin(), v.end());
  shapes.push_back(v);
  shapes.push_back(std::vector<Element>(n, 7));
  for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<Element>(i % 16);
  shapes.push_back(v);

  for (std::vector<Element>& data : shapes) {
    const std::vector<Element> expected = sorted_copy(data);
    HalfScratch scratch(data.size());
    sort_in_cache(data, scratch);
    REQUIRE(data == expected);
  }
}

TEST_CASE("both merge modes produce identical buffers") {
  for (const std::size_t n : {std::size_t{192}, std::size_t{1000}, std::size_t{4096}}) {
    std::vector<Element> serial = random_values(n, n + 9);
    std::vector<Element> vectorized = serial;
    const std::vector<Element> expected = sorted_copy(serial);

    HalfScratch scratch_s(n);
    HalfScratch scratch_v(n);
    sort_in_cache(serial, scratch_s, HalfMergeMode::serial);
    sort_in_cache(vectorized, scratch_v, HalfMergeMode::vectorized);

    REQUIRE(serial == expected);
    REQUIRE(vectorized == expected);
    CHECK(scratch_v.high_water() <= (n + 1) / 2);
  }
}

TEST_CASE("the baseline needs the whole buffer where the half scheme needs half") {
  for (const std::size_t n : {std::size_t{192}, std::size_t{4096}}) {
    std::vector<Element> half = random_values(n, n);
    std::vector<Element> naive = half;
    const std::vector<Element> expected = sorted_copy(half);

    HalfScratch half_scratch(n);
    FullScratch full_scratch(n);
    sort_in_cache(half, half_scratch);
    sort_in_cache_naive(naive, full_scratch);

    REQUIRE(half == expected);
    REQUIRE(naive == expected);
    CHECK(half_scratch.high_water() <= (n + 1) / 2);
    CHECK(full_scratch.high_water() == n);
  }
}

TEST_CASE("sort_in_cache rejects a scratch sized for a smaller buffer") {
  std::vector<Element> data = random_values(200, 5);
  HalfScratch scratch(100);
  CHECK_THROWS_AS(sort_in_cache(data, scratch), std::invalid_argument);
}

TEST_CASE("sub-block inputs go through insertion sort alone") {
  std::vector<Element> data = random_values(63, 8);
  const std::vector<Element> expected = sorted_copy(data);
  HalfScratch scratch(data.size());
  const MergeStats stats = sort_in_cache(data, scratch);
  CHECK(data == expected);
  CHECK(scratch.high_water() == 0);
  CHECK(stats.buf_assignments == 0);
  CHECK(stats.scratch_assignments == 0);
}

TEST_CASE("sort_in_cache accepts a custom block sorter") {
  BlockSorter::Config cfg;
  cfg.transpose = TransposeKernel::memory_strided;
  cfg.row_family = MergeFamily::bitonic;
  const BlockSorter sorter(cfg);

  std::vector<Element> data = random_values(4096, 99);
  const std::vector<Element> expected = sorted_copy(data);
  HalfScratch scratch(data.size());
  sort_in_cache(data, scratch, HalfMergeMode::serial, sorter);
  CHECK(data == expected);
}

}  // TEST_SUITE

}  // namespace rvms
