#include "rvms/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <mutex>
#include <random>
#include <stdexcept>
#include <thread>
#include <vector>

#include "doctest.h"
#include "rvms/core.hpp"

namespace rvms {
namespace {

std::vector<Element> random_values(std::size_t n, std::uint64_t seed, Element lo = -100000,
                                   Element hi = 100000) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Element> dist(lo, hi);
  std::vector<Element> v(n);
  for (Element& x : v) x = dist(rng);
  return v;
}

// Reference split: merge the runs with std::merge (which prefers the first
// range on ties, the same rule co_rank promises) while counting how many of
// the first k merged elements came from a.
PartitionPoint brute_split(std::span<const Element> a, std::span<const Element> b, std::size_t k) {
  std::size_t i = 0;
  std::size_t j = 0;
  while (i + j < k) {
    if (i < a.size() && (j == b.size() || a[i] <= b[j])) {
      ++i;
    } else {
      ++j;
    }
  }
  return {i, j};
}

struct ProbeEvent {
  int phase = 0;
  int round = 0;
  std::size_t worker = 0;
  bool enter = false;
};

// Thread-safe event recorder with optional injected delays, for exercising
// the round barrier under skewed worker timing.
struct ProbeLog {
  std::mutex mu;
  std::vector<ProbeEvent> events;

  PhaseProbe recorder(std::chrono::milliseconds delay_for_worker0 = {}) {
    return [this, delay_for_worker0](int phase, int round, std::size_t worker, bool enter) {
      if (enter && worker == 0 && delay_for_worker0.count() > 0)
        std::this_thread::sleep_for(delay_for_worker0);
      const std::lock_guard<std::mutex> lock(mu);
      events.push_back({phase, round, worker, enter});
    };
  }
};

}  // namespace

TEST_SUITE("parallel") {

TEST_CASE("co_rank splits the worked example") {
  const std::vector<Element> a = {1, 3, 5};
  const std::vector<Element> b = {2, 4, 6};

  const PartitionPoint mid = co_rank(a, b, 3);
  CHECK(mid.a_split == 2);
  CHECK(mid.b_split == 1);

  const PartitionPoint none = co_rank(a, b, 0);
  CHECK(none.a_split == 0);
  CHECK(none.b_split == 0);

  const PartitionPoint all = co_rank(a, b, 6);
  CHECK(all.a_split == 3);
  CHECK(all.b_split == 3);

  CHECK_THROWS_AS(co_rank(a, b, 7), std::out_of_range);
}

TEST_CASE("co_rank matches a counting merge at every rank") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const std::size_t la = seed % 7 * 13 % 29;
    const std::size_t lb = seed % 11 * 7 % 23;
    std::vector<Element> a = random_values(la, 2 * seed, -5, 5);
    std::vector<Element> b = random_values(lb, 2 * seed + 1, -5, 5);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());

    for (std::size_t k = 0; k <= la + lb; ++k) {
      const PartitionPoint got = co_rank(a, b, k);
      const PartitionPoint want = brute_split(a, b, k);
      REQUIRE(got.a_split == want.a_split);
      REQUIRE(got.b_split == want.b_split);
      REQUIRE(got.a_split + got.b_split == k);
    }
  }
}

TEST_CASE("co_rank handles empty and one-sided runs") {
  const std::vector<Element> empty;
  const std::vector<Element> a = {1, 2, 3};

  CHECK(co_rank(a, empty, 2).a_split == 2);
  CHECK(co_rank(empty, a, 2).b_split == 2);
  CHECK(co_rank(empty, empty, 0).a_split == 0);
  CHECK_THROWS_AS(co_rank(empty, empty, 1), std::out_of_range);

  // All-equal keys: ties drain a first.
  const std::vector<Element> ones_a(4, 1);
  const std::vector<Element> ones_b(4, 1);
  const PartitionPoint p = co_rank(ones_a, ones_b, 5);
  CHECK(p.a_split == 4);
  CHECK(p.b_split == 1);
}

TEST_CASE("split_index spreads work within one unit") {
  const std::size_t totals[] = {0, 1, 5, 64, 1000, 1 << 20, (1 << 20) + 3};
  const std::size_t parts[] = {1, 2, 3, 4, 7, 8, 64};
  for (const std::size_t n : totals) {
    for (const std::size_t t : parts) {
      CHECK(split_index(n, t, 0) == 0);
      CHECK(split_index(n, t, t) == n);
      for (std::size_t w = 0; w < t; ++w) {
        const std::size_t len = split_index(n, t, w + 1) - split_index(n, t, w);
        REQUIRE(len >= n / t);
        REQUIRE(len <= n / t + (n % t == 0 ? 0 : 1));
      }
    }
  }
}

TEST_CASE("every thread count produces the reference order") {
  const std::size_t n = 1 << 20;
  const std::vector<Element> input = random_values(n, 42);
  std::vector<Element> expected = input;
  std::sort(expected.begin(), expected.end());

  for (const std::size_t threads : {std::size_t{1}, std::size_t{2}, std::size_t{4}, std::size_t{8}}) {
    std::vector<Element> data = input;
    parallel_sort(data, threads);
    REQUIRE(data == expected);
  }
}

TEST_CASE("thread counts that do not divide the input still sort") {
  for (const std::size_t threads : {std::size_t{3}, std::size_t{5}, std::size_t{7}}) {
    for (const std::size_t n : {std::size_t{1000}, std::size_t{65536}, std::size_t{100001}}) {
      std::vector<Element> data = random_values(n, threads * 1000 + n);
      std::vector<Element> expected = data;
      std::sort(expected.begin(), expected.end());
      parallel_sort(data, threads);
      REQUIRE(data == expected);
    }
  }
}

TEST_CASE("tiny inputs fall back to a single worker") {
  std::vector<Element> data = {5, -3, 9, 0, 2};
  parallel_sort(data, 8);
  CHECK(data == std::vector<Element>{-3, 0, 2, 5, 9});

  std::vector<Element> empty;
  parallel_sort(empty, 4);
  CHECK(empty.empty());

  std::vector<Element> one = {7};
  parallel_sort(one, 4);
  CHECK(one == std::vector<Element>{7});
}

TEST_CASE("invalid configurations are rejected") {
  std::vector<Element> data = {3, 1, 2};
  CHECK_THROWS_AS(parallel_sort(data, 0), std::invalid_argument);

  SortConfig cfg;
  cfg.block_elements = 0;
  CHECK_THROWS_AS(parallel_sort(data, cfg), std::invalid_argument);
}

TEST_CASE("repeated runs are byte-identical across thread counts") {
  const std::vector<Element> input = random_values(200000, 7);
  std::vector<Element> first;
  for (const std::size_t threads : {std::size_t{1}, std::size_t{2}, std::size_t{4}, std::size_t{6}}) {
    for (int rep = 0; rep < 2; ++rep) {
      std::vector<Element> data = input;
      parallel_sort(data, threads);
      if (first.empty()) {
        first = data;
      } else {
        REQUIRE(data == first);
      }
    }
  }
}

TEST_CASE("configuration variants all reach the same order") {
  const std::vector<Element> input = random_values(150000, 99);
  std::vector<Element> expected = input;
  std::sort(expected.begin(), expected.end());

  std::vector<SortConfig> configs;
  {
    SortConfig c;
    c.threads = 3;
    c.block_elements = 4096;
    configs.push_back(c);
  }
  {
    SortConfig c;
    c.threads = 4;
    c.in_cache_mode = HalfMergeMode::serial;
    configs.push_back(c);
  }
  {
    SortConfig c;
    c.threads = 4;
    c.naive_in_cache = true;
    configs.push_back(c);
  }
  {
    SortConfig c;
    c.threads = 2;
    c.variant = AsymVariant::iterative;
    c.block_elements = 1 << 12;
    configs.push_back(c);
  }
  {
    SortConfig c;
    c.threads = 2;
    c.variant = AsymVariant::parallel;
    c.block.row_family = MergeFamily::bitonic;
    configs.push_back(c);
  }
  {
    SortConfig c;
    c.threads = 5;
    c.block.split.scalar_rounds = 0;
    c.block.transpose = TransposeKernel::memory_strided;
    c.block_elements = 777;  // forces ragged cache blocks
    configs.push_back(c);
  }

  for (const SortConfig& cfg : configs) {
    std::vector<Element> data = input;
    parallel_sort(data, cfg);
    REQUIRE(data == expected);
  }
}

TEST_CASE("adversarial patterns sort under several thread counts") {
  const std::size_t n = 100000;
  std::vector<std::vector<Element>> patterns;
  std::vector<Element> asc(n);
  for (std::size_t i = 0; i < n; ++i) asc[i] = static_cast<Element>(i);
  patterns.push_back(asc);
  std::vector<Element> desc(asc.rbegin(), asc.rend());
  patterns.push_back(desc);
  patterns.push_back(std::vector<Element>(n, 11));
  std::vector<Element> saw(n);
  for (std::size_t i = 0; i < n; ++i) saw[i] = static_cast<Element>(i % 64);
  patterns.push_back(saw);

  for (const std::vector<Element>& pattern : patterns) {
    std::vector<Element> expected = pattern;
    std::sort(expected.begin(), expected.end());
    for (const std::size_t threads : {std::size_t{1}, std::size_t{4}}) {
      std::vector<Element> data = pattern;
      parallel_sort(data, threads);
      REQUIRE(data == expected);
    }
  }
}

TEST_CASE("phase times cover both phases") {
  std::vector<Element> data = random_values(1 << 18, 3);
  SortConfig cfg;
  cfg.threads = 4;
  const PhaseTimes times = parallel_sort(data, cfg);
  CHECK(times.in_thread_seconds > 0.0);
  CHECK(times.out_thread_seconds > 0.0);
  CHECK(std::is_sorted(data.begin(), data.end()));
}

TEST_CASE("the probe sees every worker in every round") {
  std::vector<Element> data = random_values(1 << 16, 5);
  ProbeLog log;
  SortConfig cfg;
  cfg.threads = 4;
  cfg.probe = log.recorder();
  parallel_sort(data, cfg);

  // 4 workers, phase 1 plus ceil(log2 4) = 2 merge rounds, enter + exit each.
  CHECK(log.events.size() == 4 * (1 + 2) * 2);
  for (int round = 0; round < 2; ++round) {
    for (std::size_t w = 0; w < 4; ++w) {
      for (const bool enter : {true, false}) {
        const auto hit = std::count_if(log.events.begin(), log.events.end(),
                                       [&](const ProbeEvent& e) {
                                         return e.phase == 2 && e.round == round &&
                                                e.worker == w && e.enter == enter;
                                       });
        REQUIRE(hit == 1);
      }
    }
  }
}

TEST_CASE("no worker starts a round before the previous round completes") {
  std::vector<Element> data = random_values(1 << 17, 6);
  ProbeLog log;
  SortConfig cfg;
  cfg.threads = 4;
  // Slow down worker 0 in every round; the barrier must still hold the
  // other workers back until it finishes.
  cfg.probe = log.recorder(std::chrono::milliseconds(25));
  parallel_sort(data, cfg);
  REQUIRE(std::is_sorted(data.begin(), data.end()));

  // Order the rounds on one axis: phase 1 counts as round -1.
  const auto rank = [](const ProbeEvent& e) { return e.phase == 1 ? -1 : e.round; };
  int current = -1;
  std::size_t exits_seen = 0;  // exit events logged for `current`
  for (const ProbeEvent& e : log.events) {
    if (e.enter && rank(e) != current) {
      // A worker moved on: the previous round must be fully drained first.
      REQUIRE(rank(e) == current + 1);
      REQUIRE(exits_seen == 4);
      current = rank(e);
      exits_seen = 0;
    } else if (!e.enter) {
      REQUIRE(rank(e) == current);
      ++exits_seen;
    }
  }
  CHECK(current == 1);  // ceil(log2 4) = 2 rounds, zero-based
  CHECK(exits_seen == 4);
}

}  // TEST_SUITE

}  // namespace rvms
