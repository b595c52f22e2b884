#include "rvms/regsort.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace rvms {
namespace {

void require(bool cond, const char* what) {
  if (!cond) throw std::invalid_argument(what);
}

int min_distance(const Stage& s) {
  int d = kMaxNetworkWidth;
  for (const Comparator& c : s.comparators) d = std::min(d, c.j - c.i);
  return d;
}

// Stages whose comparators all sit at one lane-aligned distance and pair
// complete registers can run as whole-register min/max. Partial coverage or
// a same-register endpoint disqualifies the stage.
bool whole_register_stage(const Stage& s, int w, std::vector<std::pair<int, int>>& pairs) {
  pairs.clear();
  if (s.comparators.empty()) return false;
  const int d = s.comparators.front().j - s.comparators.front().i;
  if (d % w != 0) return false;
  std::map<int, unsigned> lanes_seen;  // low register -> lane mask
  for (const Comparator& c : s.comparators) {
    if (c.j - c.i != d) return false;
    if (c.i / w == c.j / w) return false;
    lanes_seen[c.i / w] |= 1u << (c.i % w);
  }
  const unsigned full = (w == 32) ? ~0u : (1u << w) - 1u;
  for (const auto& [reg, mask] : lanes_seen) {
    if (mask != full) return false;
    pairs.emplace_back(reg, reg + d / w);
  }
  return true;
}

void fill_shuffle_tables(const Stage& s, int width, PlannedStage& ps) {
  ps.partner.assign(static_cast<std::size_t>(width), 0);
  ps.keep_min.assign(static_cast<std::size_t>(width), 1);
  for (int x = 0; x < width; ++x) ps.partner[static_cast<std::size_t>(x)] = x;
  for (const Comparator& c : s.comparators) {
    ps.partner[static_cast<std::size_t>(c.i)] = c.j;
    ps.partner[static_cast<std::size_t>(c.j)] = c.i;
    ps.keep_min[static_cast<std::size_t>(c.j)] = 0;
  }
}

}  // namespace

MergePlan make_merge_plan(const ComparatorNetwork& net, int lane_width, HybridSplit split) {
  require(lane_width >= 2 && is_pow2(static_cast<std::size_t>(lane_width)),
          "lane width must be a power of two >= 2");
  require(net.width > 0 && net.width <= kMaxNetworkWidth,
          "plan width must be in [1, 64]");
  require(net.width % lane_width == 0, "network width must be a multiple of the lane width");

  const int total = static_cast<int>(net.stages.size());
  int scalar_rounds = split.scalar_rounds;
  if (scalar_rounds == HybridSplit::kAuto) {
    scalar_rounds = 0;
    for (int k = total; k-- > 0;) {
      if (min_distance(net.stages[static_cast<std::size_t>(k)]) >= lane_width) break;
      ++scalar_rounds;
    }
  } else {
    require(scalar_rounds >= 0 && scalar_rounds <= total,
            "scalar_rounds must be kAuto or within [0, stage count]");
  }

  MergePlan plan;
  plan.width = net.width;
  plan.lane_width = lane_width;
  plan.scalar_rounds = scalar_rounds;
  plan.stages.reserve(net.stages.size());

  std::vector<std::pair<int, int>> pairs;
  for (int k = 0; k < total; ++k) {
    const Stage& s = net.stages[static_cast<std::size_t>(k)];
    PlannedStage ps;
    if (k >= total - scalar_rounds) {
      ps.mode = StageMode::scalar;
      ps.comparators = s.comparators;
    } else if (whole_register_stage(s, lane_width, pairs)) {
      ps.mode = StageMode::whole_register;
      ps.register_pairs = pairs;
    } else {
      ps.mode = StageMode::shuffle_model;
      fill_shuffle_tables(s, net.width, ps);
    }
    plan.stages.push_back(std::move(ps));
  }
  return plan;
}

void run_merge_plan(const MergePlan& plan, std::span<Element> data) {
  require(data.size() == static_cast<std::size_t>(plan.width),
          "data length must equal the plan width");
  const std::size_t w = static_cast<std::size_t>(plan.lane_width);
  std::array<Element, kMaxNetworkWidth> gathered;
  for (const PlannedStage& ps : plan.stages) {
    switch (ps.mode) {
      case StageMode::whole_register:
        for (const auto& [ra, rb] : ps.register_pairs) {
          Element* a = data.data() + static_cast<std::size_t>(ra) * w;
          Element* b = data.data() + static_cast<std::size_t>(rb) * w;
          for (std::size_t k = 0; k < w; ++k) cmpx_swap(a[k], b[k]);
        }
        break;
      case StageMode::shuffle_model:
        // Pass 1 permutes every wire's partner into place; pass 2 blends
        // min or max per wire. Unpaired wires are their own partner.
        for (std::size_t x = 0; x < data.size(); ++x)
          gathered[x] = data[static_cast<std::size_t>(ps.partner[x])];
        for (std::size_t x = 0; x < data.size(); ++x)
          data[x] = ps.keep_min[x] ? std::min(data[x], gathered[x])
                                   : std::max(data[x], gathered[x]);
        break;
      case StageMode::scalar:
        for (const Comparator& c : ps.comparators)
          cmpx_swap(data[static_cast<std::size_t>(c.i)], data[static_cast<std::size_t>(c.j)]);
        break;
    }
  }
}

void column_sort(std::span<Element> block, int rows, int lanes) {
  require(rows >= 2 && lanes >= 1, "block shape must be at least 2 x 1");
  require(block.size() == static_cast<std::size_t>(rows) * static_cast<std::size_t>(lanes),
          "block length must equal rows * lanes");
  const ComparatorNetwork net =
      (rows == static_cast<int>(kRegisterRows)) ? gen_column_sorter() : gen_oddeven_sorter(rows);
  const std::size_t stride = static_cast<std::size_t>(lanes);
  for (const Stage& s : net.stages) {
    for (const Comparator& c : s.comparators) {
      Element* a = block.data() + static_cast<std::size_t>(c.i) * stride;
      Element* b = block.data() + static_cast<std::size_t>(c.j) * stride;
      for (std::size_t k = 0; k < stride; ++k) cmpx_swap(a[k], b[k]);
    }
  }
}

void transpose_tile(std::span<const Element> tile, std::span<Element> out, int rows, int cols,
                    TransposeKernel kernel) {
  require(rows == cols, "tile must be square");
  require(rows >= 1 && rows <= kMaxNetworkWidth, "tile side must be in [1, 64]");
  const std::size_t side = static_cast<std::size_t>(rows);
  require(tile.size() == side * side, "tile length must equal rows * cols");
  require(out.size() == tile.size(), "output length must equal the tile length");

  switch (kernel) {
    case TransposeKernel::register_strided:
      // Lane k of output row r reads flat input index r + k*side.
      for (std::size_t r = 0; r < side; ++r)
        for (std::size_t k = 0; k < side; ++k) out[r * side + k] = tile[r + k * side];
      break;
    case TransposeKernel::memory_strided: {
      std::array<Element, static_cast<std::size_t>(kMaxNetworkWidth) * kMaxNetworkWidth> flat;
      std::copy(tile.begin(), tile.end(), flat.begin());
      for (std::size_t r = 0; r < side; ++r)
        for (std::size_t k = 0; k < side; ++k) out[r * side + k] = flat[r + k * side];
      break;
    }
    case TransposeKernel::shuffle_emulated: {
      require(is_pow2(side), "shuffle_emulated needs a power-of-two tile side");
      std::copy(tile.begin(), tile.end(), out.begin());
      // One round per bit of the lane index: rows r and r+d trade the lanes
      // whose index has bit d set, shifted by d, realized as paired selects.
      for (std::size_t d = 1; d < side; d <<= 1) {
        for (std::size_t r = 0; r < side; ++r) {
          if (r & d) continue;
          Element* lo_row = out.data() + r * side;
          Element* hi_row = out.data() + (r + d) * side;
          for (std::size_t c = 0; c < side; ++c) {
            if ((c & d) == 0) continue;
            std::swap(lo_row[c], hi_row[c - d]);
          }
        }
      }
      break;
    }
  }
}

void transpose_block(std::span<const Element> block, std::span<Element> out, int rows, int lanes,
                     TransposeKernel kernel) {
  require(rows >= 1 && lanes >= 1 && rows % lanes == 0,
          "row count must be a positive multiple of the lane count");
  const std::size_t r = static_cast<std::size_t>(rows);
  const std::size_t w = static_cast<std::size_t>(lanes);
  require(block.size() == r * w, "block length must equal rows * lanes");
  require(out.size() == block.size(), "output length must equal the block length");

  std::array<Element, static_cast<std::size_t>(kMaxNetworkWidth) * kMaxNetworkWidth> tmp;
  for (std::size_t t = 0; t < r / w; ++t) {
    // Tile t covers rows [t*w, (t+1)*w), which are contiguous in the block.
    transpose_tile(block.subspan(t * w * w, w * w), std::span<Element>(tmp.data(), w * w),
                   lanes, lanes, kernel);
    // Reposition: transposed tile row i becomes columns [t*w, (t+1)*w) of
    // output row i.
    for (std::size_t i = 0; i < w; ++i)
      std::copy_n(tmp.data() + i * w, w, out.data() + i * r + t * w);
  }
}

void row_merge_hybrid(std::span<Element> data, int run_length, HybridSplit split,
                      MergeFamily family) {
  if (data.empty()) return;
  require(run_length >= 1 && is_pow2(static_cast<std::size_t>(run_length)),
          "run length must be a power of two");
  const std::size_t len = static_cast<std::size_t>(run_length);
  require(data.size() % len == 0, "data length must be a multiple of the run length");
  const std::size_t count = data.size() / len;
  require(is_pow2(count), "run count must be a power of two");

  const int lane = static_cast<int>(kLaneWidth);
  // Validate an explicit split against the widest network of the tree; the
  // narrower levels clamp it to their own stage count.
  int max_rounds = 0;
  for (std::size_t width = 2 * len; width <= data.size(); width *= 2) {
    if (width > static_cast<std::size_t>(kMaxNetworkWidth)) break;
    const int n = static_cast<int>(width);
    max_rounds = static_cast<int>((family == MergeFamily::odd_even
                                       ? gen_oddeven_merge(n, lane)
                                       : gen_bitonic_merge(n, lane))
                                      .stages.size());
  }
  if (split.scalar_rounds != HybridSplit::kAuto) {
    require(split.scalar_rounds >= 0 && split.scalar_rounds <= max_rounds,
            "scalar_rounds must be kAuto or within [0, stage count]");
  }

  for (std::size_t width = 2 * len; width <= data.size(); width *= 2) {
    if (width <= static_cast<std::size_t>(kMaxNetworkWidth)) {
      const int n = static_cast<int>(width);
      const ComparatorNetwork net = (family == MergeFamily::odd_even)
                                        ? gen_oddeven_merge(n, lane)
                                        : gen_bitonic_merge(n, lane);
      HybridSplit level = split;
      if (level.scalar_rounds != HybridSplit::kAuto)
        level.scalar_rounds = std::min(level.scalar_rounds, static_cast<int>(net.stages.size()));
      const MergePlan plan = make_merge_plan(net, lane, level);
      for (std::size_t off = 0; off + width <= data.size(); off += width)
        run_merge_plan(plan, data.subspan(off, width));
    } else {
      // Past the 64-wire generator cap; only reachable for lane widths
      // above 4 with 16 rows.
      for (std::size_t off = 0; off + width <= data.size(); off += width)
        std::inplace_merge(data.begin() + static_cast<std::ptrdiff_t>(off),
                           data.begin() + static_cast<std::ptrdiff_t>(off + width / 2),
                           data.begin() + static_cast<std::ptrdiff_t>(off + width));
    }
  }
}

BlockSorter::BlockSorter(const Config& config) : cfg_(config) {
  column_net_ = flatten(gen_column_sorter());
  const int lane = static_cast<int>(kLaneWidth);
  std::vector<ComparatorNetwork> nets;
  for (std::size_t width = 2 * kRegisterRows;
       width <= kBlockElements && width <= static_cast<std::size_t>(kMaxNetworkWidth);
       width *= 2) {
    const int n = static_cast<int>(width);
    nets.push_back(cfg_.row_family == MergeFamily::odd_even ? gen_oddeven_merge(n, lane)
                                                            : gen_bitonic_merge(n, lane));
  }
  const int max_rounds = static_cast<int>(nets.back().stages.size());
  if (cfg_.split.scalar_rounds != HybridSplit::kAuto) {
    require(cfg_.split.scalar_rounds >= 0 && cfg_.split.scalar_rounds <= max_rounds,
            "scalar_rounds must be kAuto or within [0, row_merge_rounds()]");
  }
  for (const ComparatorNetwork& net : nets) {
    HybridSplit level = cfg_.split;
    if (level.scalar_rounds != HybridSplit::kAuto)
      level.scalar_rounds = std::min(level.scalar_rounds, static_cast<int>(net.stages.size()));
    row_plans_.push_back(make_merge_plan(net, lane, level));
  }
}

void BlockSorter::sort(std::span<Element> block) const {
  require(block.size() == kBlockElements, "block length must equal kBlockElements");

  for (const Comparator& c : column_net_.comparators) {
    Element* a = block.data() + static_cast<std::size_t>(c.i) * kLaneWidth;
    Element* b = block.data() + static_cast<std::size_t>(c.j) * kLaneWidth;
    for (std::size_t k = 0; k < kLaneWidth; ++k) cmpx_swap(a[k], b[k]);
  }

  std::array<Element, kBlockElements> tmp;
  transpose_block(block, tmp, static_cast<int>(kRegisterRows), static_cast<int>(kLaneWidth),
                  cfg_.transpose);

  std::size_t level = 0;
  for (std::size_t width = 2 * kRegisterRows; width <= kBlockElements; width *= 2, ++level) {
    for (std::size_t off = 0; off + width <= kBlockElements; off += width) {
      const std::span<Element> pair(tmp.data() + off, width);
      if (level < row_plans_.size()) {
        run_merge_plan(row_plans_[level], pair);
      } else {
        std::inplace_merge(pair.begin(), pair.begin() + static_cast<std::ptrdiff_t>(width / 2),
                           pair.end());
      }
    }
  }
  std::copy(tmp.begin(), tmp.end(), block.begin());
}

int BlockSorter::row_merge_rounds() const { return row_plans_.back().rounds(); }

const BlockSorter& default_block_sorter() {
  static const BlockSorter sorter;
  return sorter;
}

void sort_block(std::span<Element> data) { default_block_sorter().sort(data); }

}  // namespace rvms
