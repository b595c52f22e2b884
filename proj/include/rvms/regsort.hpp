#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "rvms/core.hpp"
#include "rvms/networks.hpp"

namespace rvms {

// How a square tile transpose moves its elements. All three produce the same
// matrix; they differ in the data path they model.
enum class TransposeKernel {
  shuffle_emulated,   // v0: log2(W) rounds of paired lane selects
  memory_strided,     // v1: store row-major, reload with stride W
  register_strided,   // v2: one strided gather straight from the source rows
};

// Merging-network family used for the row merge.
enum class MergeFamily { odd_even, bitonic };

// How many trailing stages of a merge network run with scalar
// compare-exchanges instead of vector passes. kAuto selects every trailing
// stage whose shortest exchange distance is below the lane width -- exactly
// the stages that would otherwise pay for in-register lane traffic.
struct HybridSplit {
  static constexpr int kAuto = -1;
  int scalar_rounds = kAuto;

  friend bool operator==(const HybridSplit&, const HybridSplit&) = default;
};

// Execution strategy chosen for one network stage.
enum class StageMode {
  whole_register,  // aligned full register pairs, lane-wise min/max
  shuffle_model,   // gather every wire's partner, then blend min/max
  scalar,          // cmpx_swap per comparator
};

struct PlannedStage {
  StageMode mode = StageMode::scalar;
  std::vector<Comparator> comparators;              // scalar
  std::vector<std::pair<int, int>> register_pairs;  // whole_register
  std::vector<int> partner;                         // shuffle_model
  std::vector<std::uint8_t> keep_min;               // shuffle_model
};

// A comparator network bound to a lane width and split, each stage resolved
// to the cheapest strategy its wiring admits.
struct MergePlan {
  int width = 0;
  int lane_width = static_cast<int>(kLaneWidth);
  int scalar_rounds = 0;  // resolved count, never kAuto
  std::vector<PlannedStage> stages;

  int rounds() const { return static_cast<int>(stages.size()); }
};

// Bind net to a lane width. split.scalar_rounds must be kAuto or lie in
// [0, stage count]. Stages before the split run whole_register when their
// comparators pair complete registers at one aligned distance, and
// shuffle_model otherwise; stages past the split run scalar.
MergePlan make_merge_plan(const ComparatorNetwork& net, int lane_width, HybridSplit split = {});

// Apply the plan in place. data.size() must equal the plan width. The result
// is identical to run_network on the source network for every split.
void run_merge_plan(const MergePlan& plan, std::span<Element> data);

// Sort every column of a rows x lanes block in place (row r, lane c lives at
// flat index r*lanes + c). rows == 16 uses the 60-comparator sorter; other
// power-of-two row counts use an odd-even sorter. Convenience form that
// regenerates its network per call; BlockSorter caches instead.
void column_sort(std::span<Element> block, int rows, int lanes);

// Transpose a square tile: out[i*cols + j] = tile[j*cols + i]. rows must
// equal cols; shuffle_emulated additionally needs a power-of-two side. The
// output must not overlap the input.
void transpose_tile(std::span<const Element> tile, std::span<Element> out, int rows, int cols,
                    TransposeKernel kernel);

// Transpose a rows x lanes block into a lanes x rows matrix via rows/lanes
// square tile transposes plus row repositioning. Applied after column_sort
// this turns the sorted columns into `lanes` sorted rows of length `rows`.
// The output must not overlap the input.
void transpose_block(std::span<const Element> block, std::span<Element> out, int rows, int lanes,
                     TransposeKernel kernel = TransposeKernel::register_strided);

// Merge equal-length sorted runs pairwise and in place, doubling the run
// length each level. Levels whose pair width fits a generated network (64
// wires) execute under `split`; wider levels fall back to a scalar merge.
// Both the run length and the run count must be powers of two.
void row_merge_hybrid(std::span<Element> data, int run_length, HybridSplit split = {},
                      MergeFamily family = MergeFamily::odd_even);

// The register-level block sort: column sort, tile transpose, hybrid row
// merge. Construction generates and plans every network once, so one
// instance should serve many blocks; sort() itself is stateless and may be
// called from several threads on disjoint blocks.
class BlockSorter {
 public:
  struct Config {
    TransposeKernel transpose = TransposeKernel::register_strided;
    MergeFamily row_family = MergeFamily::odd_even;
    HybridSplit split{};

    friend bool operator==(const Config&, const Config&) = default;
  };

  BlockSorter() : BlockSorter(Config{}) {}
  explicit BlockSorter(const Config& config);

  // Sorts exactly kBlockElements elements in place.
  void sort(std::span<Element> block) const;

  // Stage count of the widest row-merge network; explicit splits must lie in
  // [0, row_merge_rounds()].
  int row_merge_rounds() const;

  const Config& config() const { return cfg_; }

 private:
  Config cfg_;
  FlatNetwork column_net_;
  std::vector<MergePlan> row_plans_;  // one per doubling level that fits a network
};

// Shared immutable instance with the default configuration.
const BlockSorter& default_block_sorter();

// One-off block sort with the default configuration.
void sort_block(std::span<Element> data);

// W x W tile held as register rows.
template <std::size_t W = kLaneWidth>
using Tile = std::array<LaneVector<W>, W>;

// Typed tile transpose. Mirrors the span form for callers that already hold
// register rows.
template <std::size_t W>
Tile<W> transpose_tile(const Tile<W>& tile, TransposeKernel kernel) {
  Tile<W> out;
  switch (kernel) {
    case TransposeKernel::register_strided:
      for (std::size_t r = 0; r < W; ++r)
        for (std::size_t k = 0; k < W; ++k) out[r][k] = tile[k][r];
      break;
    case TransposeKernel::memory_strided: {
      std::array<Element, W * W> flat;
      for (std::size_t r = 0; r < W; ++r)
        for (std::size_t k = 0; k < W; ++k) flat[r * W + k] = tile[r][k];
      for (std::size_t r = 0; r < W; ++r)
        for (std::size_t k = 0; k < W; ++k) out[r][k] = flat[k * W + r];
      break;
    }
    case TransposeKernel::shuffle_emulated:
      out = tile;
      for (std::size_t d = 1; d < W; d <<= 1) {
        for (std::size_t r = 0; r < W; ++r) {
          if (r & d) continue;
          const LaneVector<W> lo = out[r];
          const LaneVector<W> hi = out[r + d];
          for (std::size_t c = 0; c < W; ++c) {
            out[r][c] = (c & d) ? hi[c - d] : lo[c];
            out[r + d][c] = (c & d) ? hi[c] : lo[c + d];
          }
        }
      }
      break;
  }
  return out;
}

// Column sort on the typed block: rows are the network wires, lanes ride
// along untouched.
template <std::size_t R, std::size_t W>
void column_sort(RegisterBlock<R, W>& block) {
  const ComparatorNetwork net = (R == kRegisterRows)
                                    ? gen_column_sorter()
                                    : gen_oddeven_sorter(static_cast<int>(R));
  for (const Stage& s : net.stages)
    for (const Comparator& c : s.comparators)
      cmpx_swap_vector(block.row[static_cast<std::size_t>(c.i)],
                       block.row[static_cast<std::size_t>(c.j)]);
}

}  // namespace rvms
