#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rvms/core.hpp"
#include "rvms/parallel.hpp"

namespace rvms {

// One benchmark measurement. Throughput is size over wall time; the two
// percentages split the wall time between the chunk-sort phase and the
// cross-chunk merge phase and sum to 100 up to rounding.
struct BenchRecord {
  std::string kernel;
  std::size_t size = 0;
  std::size_t threads = 1;
  std::uint64_t seed = 0;
  std::uint64_t time_ns = 0;
  double elems_per_us = 0.0;
  double in_thread_pct = 0.0;
  double out_thread_pct = 0.0;
};

// Reproducible dataset: one element per draw of a std::mt19937_64 seeded
// with `seed`, keeping the low 32 bits of each draw.
std::vector<Element> generate_dataset(std::size_t n, std::uint64_t seed);

// True when result is sorted and holds the same multiset as original.
bool is_sorted_permutation(std::span<const Element> result, std::span<const Element> original);

// Registered kernels, in stable listing order:
//   rvms              the full pipeline with stock configuration
//   rvms-no-hybrid    row-merge stages never hand their tails to scalar code
//   naive-merge       cache-stage merges copy out whole pairs, not halves
//   bitonic-rowmerge  bitonic row-merge networks instead of odd-even
//   reference         std::sort
const std::vector<std::string>& kernel_names();
bool is_known_kernel(std::string_view name);

// Sorts data in place with the named kernel. config supplies thread count,
// block size, and merge variant; each kernel overrides exactly the fields
// that define it. Unknown names throw std::invalid_argument.
PhaseTimes run_kernel(std::string_view name, std::span<Element> data, const SortConfig& config);

// Generates the dataset, sorts it with the named kernel, and verifies the
// result against the input multiset. Timing for an incorrect result is never
// reported: corruption throws std::runtime_error instead.
BenchRecord run_benchmark(std::string_view name, std::size_t size, std::uint64_t seed,
                          const SortConfig& config);

// CSV serialization with a fixed column order:
// kernel,size,threads,seed,time_ns,elems_per_us,in_thread_pct,out_thread_pct
void write_csv_header(std::ostream& out);
void write_csv_row(std::ostream& out, const BenchRecord& record);

}  // namespace rvms
