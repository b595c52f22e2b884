#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "rvms/core.hpp"

namespace rvms {

// One compare-exchange between wires i and j, 0 <= i < j < width. After it
// runs, wire i holds the min and wire j the max.
struct Comparator {
  int i = 0;
  int j = 0;

  friend constexpr bool operator==(const Comparator&, const Comparator&) = default;
};

// With wires laid out W per register (wire k sits in register k/W, lane k%W),
// a comparator whose endpoints share a register needs lane traffic inside
// that register; one whose endpoints sit in different registers can be fed by
// whole-register operands.
enum class StageKind { inter_register, intra_register };

// A dependency level: no wire appears twice, so the comparators of one stage
// can run in any order (or all at once).
struct Stage {
  std::vector<Comparator> comparators;
  StageKind kind = StageKind::inter_register;

  friend bool operator==(const Stage&, const Stage&) = default;
};

// A data-independent compare-exchange schedule.
struct ComparatorNetwork {
  int width = 0;
  std::vector<Stage> stages;

  std::size_t comparator_count() const;

  friend bool operator==(const ComparatorNetwork&, const ComparatorNetwork&) = default;
};

struct CostReport {
  std::size_t comparators = 0;
  std::size_t stages = 0;
  // Paired-select passes needed at lane width w; see cost_report() for the
  // counting rule.
  std::size_t intra_exchanges = 0;
};

enum class NetworkRole { sorter, merger };

// Largest width the generators accept. Wider schedules are outside what the
// pipeline needs and would blow the verification budget.
inline constexpr int kMaxNetworkWidth = 64;

// Batcher odd-even merge of two sorted n/2-sequences (wires [0,n/2) and
// [n/2,n)). n must be a power of two in [2, 64]. Stage tags follow lane_width.
ComparatorNetwork gen_oddeven_merge(int n, int lane_width = static_cast<int>(kLaneWidth));

// The same schedule as dependency rounds grouped by exchange distance,
// largest first. Building block for composed multi-run networks.
std::vector<std::vector<Comparator>> oddeven_merge_rounds(int n);

// Assembles a network from dependency rounds, splitting each round into
// tagged inter-/intra-register stages for the given lane width.
ComparatorNetwork network_from_rounds(int width, const std::vector<std::vector<Comparator>>& rounds,
                                      int lane_width = static_cast<int>(kLaneWidth));

// Bitonic merge of two sorted n/2-sequences; the second half is reversed by
// the wiring of the first stage, so callers hand over plain ascending runs.
ComparatorNetwork gen_bitonic_merge(int n, int lane_width = static_cast<int>(kLaneWidth));

// Batcher odd-even merge sort network for n inputs (sorts anything). Used
// where a sorter of width other than 16 is needed.
ComparatorNetwork gen_oddeven_sorter(int n, int lane_width = static_cast<int>(kLaneWidth));

// The 60-comparator 16-input sorting network (best known size for 16). Only
// rows == 16 is supported; the validity gate is verify_network, not trust in
// the transcription.
ComparatorNetwork gen_column_sorter(int rows = static_cast<int>(kRegisterRows),
                                    int lane_width = static_cast<int>(kLaneWidth));

// Zero-one check. sorter: all 2^width binary inputs (width <= 24, else
// std::length_error). merger: all (n/2+1)^2 pairs of sorted binary halves.
bool verify_network(const ComparatorNetwork& net, NetworkRole role);

// Merger check with an asymmetric split: first run occupies wires
// [0, first_run), second run the rest.
bool verify_merger(const ComparatorNetwork& net, int first_run);

// Merger check for several sorted input runs laid out back to back.
bool verify_multiway_merger(const ComparatorNetwork& net, std::span<const int> run_lengths);

// Comparator/stage totals plus the exchange count at lane width w.
//
// Counting rule for intra_exchanges: a stage is exchange-free when its
// comparators all share one exchange distance and none has both endpoints in
// the same register -- such a stage is a whole-register permutation plus a
// single uniform shift. Every other stage (same-register comparators, or
// mixed distances like a fold) needs one paired-select pass over the operand,
// i.e. width/w register-sized selects. intra_exchanges sums those passes.
CostReport cost_report(const ComparatorNetwork& net, int lane_width);

// One stage per line: "[inter] 0:4 1:5" / "[intra] 1:2 5:6".
std::string dump_network(const ComparatorNetwork& net);

// Reference execution: stages in order, cmpx_scalar per comparator.
void run_network(const ComparatorNetwork& net, std::span<Element> data);

// Stage structure collapsed to a plain comparator list for hot loops.
struct FlatNetwork {
  int width = 0;
  std::vector<Comparator> comparators;
};

FlatNetwork flatten(const ComparatorNetwork& net);

inline void run_flat(const FlatNetwork& net, Element* v) {
  for (const Comparator& c : net.comparators) cmpx_swap(v[c.i], v[c.j]);
}

}  // namespace rvms
