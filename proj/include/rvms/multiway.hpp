#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "rvms/cachemerge.hpp"
#include "rvms/core.hpp"
#include "rvms/networks.hpp"

namespace rvms {

// Three comparator schedules that all merge a sorted 8-run with a sorted
// 24-run: standard chains a 16-wide merge into a full 32-wide merge,
// iterative cascades three 16-wide merges, parallel starts two independent
// 16-wide merges and finishes with two more. Extensionally equal; they
// differ in comparator count and stage depth.
enum class AsymVariant { standard, iterative, parallel };

// Network that sorts [a0..a7 | b0..b23] given both parts sorted.
ComparatorNetwork gen_asym_merge_8_24(AsymVariant variant,
                                      int lane_width = static_cast<int>(kLaneWidth));

// Same for a sorted 8-run against a sorted 16-run (width 24).
ComparatorNetwork gen_asym_merge_8_16(int lane_width = static_cast<int>(kLaneWidth));

// Fully sorts `runs` sorted 8-element runs laid back to back, runs in [2, 4].
// The four-run form is a pair of 16-wide merges feeding a 32-wide merge.
ComparatorNetwork gen_init_merge(int runs, int lane_width = static_cast<int>(kLaneWidth));

// Merges a sorted 8-run with a sorted 24-run through the chosen schedule.
std::array<Element, 32> asym_merge_8_24(std::span<const Element> a, std::span<const Element> b,
                                        AsymVariant variant = AsymVariant::standard);

// Merges up to four sorted runs, eight elements per step. The first step
// merges eight elements from every non-empty run; afterwards each step pulls
// the next eight from the run with the smallest head, merges them with the
// carried residue, emits the smallest eight, and keeps the rest as the new
// carry. Runs whose remainder falls below eight are finished by a scalar
// element-at-a-time drain. Emitted blocks accumulate in a bounded out buffer
// the consumer drains through pending()/consume().
class FourWayNode {
 public:
  static constexpr std::size_t kEmitWidth = 8;
  static constexpr std::size_t kOutCapacity = 2048;

  explicit FourWayNode(const std::array<std::span<const Element>, 4>& runs,
                       AsymVariant variant = AsymVariant::standard);

  // Runs one merge round; the emitted block is returned and also appended to
  // the out buffer. An empty result means the node is fully drained. Throws
  // std::logic_error when the out buffer lacks room for another block.
  std::span<const Element> step();

  // Emitted elements not yet consumed, oldest first.
  std::span<const Element> pending() const;
  void consume(std::size_t count);

  // True once every input and the carry have been emitted.
  bool drained() const;

  std::size_t out_occupancy() const { return out_.size() - out_read_; }
  std::span<const Element> carry() const;
  bool scalar_mode() const { return scalar_; }

 private:
  struct Input {
    std::span<const Element> data;
    std::size_t pos = 0;
  };

  std::size_t remaining(std::size_t port) const { return in_[port].data.size() - in_[port].pos; }
  int min_head_port() const;
  std::span<const Element> emit_network(std::size_t port);
  std::span<const Element> emit_scalar();
  std::span<Element> reserve_out(std::size_t count);

  std::array<Input, 4> in_;
  AsymVariant variant_;
  std::vector<Element> carry_;
  std::size_t carry_read_ = 0;
  std::vector<Element> out_;
  std::size_t out_read_ = 0;
  bool scalar_ = false;
  Element last_emitted_ = 0;
  bool any_emitted_ = false;
};

// The first merge round runs inside the constructor, so a fresh node already
// has its first block pending.
FourWayNode node_init(const std::array<std::span<const Element>, 4>& runs,
                      AsymVariant variant = AsymVariant::standard);

// One merge round; empty span = end of stream.
std::span<const Element> node_step(FourWayNode& node);

// Merges the given sorted runs of src into out and returns the element
// count. Runs are grouped four per node; levels of nodes repeat until one
// run remains, with shortfall groups padded by empty runs. Throws
// std::invalid_argument when out is smaller than the runs' total or a run
// lies outside src.
std::size_t merge_tree(std::span<const Element> src, std::span<const Run> runs,
                       std::span<Element> out, AsymVariant variant = AsymVariant::standard);

}  // namespace rvms
