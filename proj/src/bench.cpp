#include "rvms/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ostream>
#include <random>
#include <stdexcept>

namespace rvms {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

std::vector<Element> generate_dataset(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Element> v(n);
  for (Element& x : v) x = static_cast<Element>(static_cast<std::uint32_t>(rng()));
  return v;
}

bool is_sorted_permutation(std::span<const Element> result, std::span<const Element> original) {
  if (result.size() != original.size()) return false;
  if (!std::is_sorted(result.begin(), result.end())) return false;
  std::vector<Element> ref(original.begin(), original.end());
  std::sort(ref.begin(), ref.end());
  return std::equal(result.begin(), result.end(), ref.begin());
}

const std::vector<std::string>& kernel_names() {
  static const std::vector<std::string> names = {
      "rvms", "rvms-no-hybrid", "naive-merge", "bitonic-rowmerge", "reference",
  };
  return names;
}

bool is_known_kernel(std::string_view name) {
  const std::vector<std::string>& names = kernel_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

PhaseTimes run_kernel(std::string_view name, std::span<Element> data, const SortConfig& config) {
  if (name == "reference") {
    const auto start = Clock::now();
    std::sort(data.begin(), data.end());
    PhaseTimes times;
    times.in_thread_seconds = seconds_since(start);
    return times;
  }

  SortConfig cfg = config;
  if (name == "rvms") {
    // Stock configuration as passed in.
  } else if (name == "rvms-no-hybrid") {
    cfg.block.split.scalar_rounds = 0;
  } else if (name == "naive-merge") {
    cfg.naive_in_cache = true;
  } else if (name == "bitonic-rowmerge") {
    cfg.block.row_family = MergeFamily::bitonic;
  } else {
    throw std::invalid_argument("unknown kernel: " + std::string(name));
  }
  return parallel_sort(data, cfg);
}

BenchRecord run_benchmark(std::string_view name, std::size_t size, std::uint64_t seed,
                          const SortConfig& config) {
  const std::vector<Element> input = generate_dataset(size, seed);
  std::vector<Element> data = input;

  const auto start = Clock::now();
  const PhaseTimes phases = run_kernel(name, data, config);
  const auto elapsed = Clock::now() - start;

  if (!is_sorted_permutation(data, input))
    throw std::runtime_error("kernel " + std::string(name) +
                             " produced an incorrect order; timing withheld");

  BenchRecord record;
  record.kernel = name;
  record.size = size;
  record.threads = config.threads;
  record.seed = seed;
  record.time_ns =
      static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::nanoseconds>(elapsed).count());
  record.elems_per_us =
      record.time_ns == 0 ? 0.0 : static_cast<double>(size) * 1000.0 / static_cast<double>(record.time_ns);
  const double phase_total = phases.in_thread_seconds + phases.out_thread_seconds;
  record.in_thread_pct =
      phase_total > 0.0 ? 100.0 * phases.in_thread_seconds / phase_total : 100.0;
  record.out_thread_pct = 100.0 - record.in_thread_pct;
  return record;
}

void write_csv_header(std::ostream& out) {
  out << "kernel,size,threads,seed,time_ns,elems_per_us,in_thread_pct,out_thread_pct\n";
}

void write_csv_row(std::ostream& out, const BenchRecord& r) {
  char tail[96];
  std::snprintf(tail, sizeof tail, "%.3f,%.1f,%.1f", r.elems_per_us, r.in_thread_pct,
                r.out_thread_pct);
  out << r.kernel << ',' << r.size << ',' << r.threads << ',' << r.seed << ',' << r.time_ns << ','
      << tail << '\n';
}

}  // namespace rvms
