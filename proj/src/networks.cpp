#include "rvms/networks.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>

namespace rvms {
namespace {

void require(bool cond, const char* what) {
  if (!cond) throw std::invalid_argument(what);
}

void check_merge_width(int n) {
  require(n >= 2 && n <= kMaxNetworkWidth, "network width must be in [2, 64]");
  require(is_pow2(static_cast<std::size_t>(n)), "network width must be a power of two");
}

void check_lane_width(int w) {
  require(w >= 2 && is_pow2(static_cast<std::size_t>(w)), "lane width must be a power of two >= 2");
}

// Batcher's odd-even merge over wires [lo, hi), comparing at stride r.
void oddeven_merge_rec(int lo, int hi, int r, std::vector<Comparator>& out) {
  const int step = r * 2;
  if (step < hi - lo) {
    oddeven_merge_rec(lo, hi, step, out);
    oddeven_merge_rec(lo + r, hi, step, out);
    for (int i = lo + r; i + r < hi; i += step) out.push_back({i, i + r});
  } else {
    out.push_back({lo, lo + r});
  }
}

// Group comparators into rounds by exchange distance, largest first. For the
// constructions in this file, all comparators at one distance are
// independent, and distances only shrink along any wire's dependency chain.
std::vector<std::vector<Comparator>> rounds_by_distance(std::vector<Comparator> comps) {
  std::map<int, std::vector<Comparator>, std::greater<>> buckets;
  for (const Comparator& c : comps) buckets[c.j - c.i].push_back(c);
  std::vector<std::vector<Comparator>> rounds;
  rounds.reserve(buckets.size());
  for (auto& [d, list] : buckets) {
    std::sort(list.begin(), list.end(),
              [](const Comparator& a, const Comparator& b) { return a.i < b.i; });
    rounds.push_back(std::move(list));
  }
  return rounds;
}

bool same_register(const Comparator& c, int w) { return c.i / w == c.j / w; }

// Turn dependency rounds into tagged stages. A round mixing same-register and
// cross-register comparators is split in two so each stage carries one tag;
// the halves touch disjoint wires, so their relative order is free.
ComparatorNetwork tag_rounds(int width, const std::vector<std::vector<Comparator>>& rounds,
                             int lane_width) {
  ComparatorNetwork net;
  net.width = width;
  for (const auto& round : rounds) {
    Stage inter, intra;
    inter.kind = StageKind::inter_register;
    intra.kind = StageKind::intra_register;
    for (const Comparator& c : round) {
      (same_register(c, lane_width) ? intra : inter).comparators.push_back(c);
    }
    if (!inter.comparators.empty()) net.stages.push_back(std::move(inter));
    if (!intra.comparators.empty()) net.stages.push_back(std::move(intra));
  }
  return net;
}

// Enumerate every way of filling the given runs with sorted 0/1 contents and
// call check on each input vector. Returns false on the first counterexample.
bool for_each_zero_one(const std::vector<int>& runs, int width,
                       const ComparatorNetwork& net) {
  std::vector<int> ones(runs.size(), 0);
  std::vector<Element> data(static_cast<std::size_t>(width));
  std::vector<Element> scratch(data.size());
  for (;;) {
    std::size_t at = 0;
    for (std::size_t r = 0; r < runs.size(); ++r) {
      for (int k = 0; k < runs[r]; ++k, ++at) {
        data[at] = (k >= runs[r] - ones[r]) ? 1 : 0;
      }
    }
    scratch = data;
    run_network(net, scratch);
    if (!std::is_sorted(scratch.begin(), scratch.end())) return false;
    // Mixed-radix increment over ones-counts, digit r in [0, runs[r]].
    std::size_t r = 0;
    while (r < runs.size() && ones[r] == runs[r]) ones[r++] = 0;
    if (r == runs.size()) return true;
    ++ones[r];
  }
}

void check_network_wires(const ComparatorNetwork& net) {
  for (const Stage& s : net.stages) {
    for (const Comparator& c : s.comparators) {
      require(c.i >= 0 && c.i < c.j && c.j < net.width, "comparator endpoints out of range");
    }
  }
}

}  // namespace

std::size_t ComparatorNetwork::comparator_count() const {
  std::size_t n = 0;
  for (const Stage& s : stages) n += s.comparators.size();
  return n;
}

ComparatorNetwork gen_oddeven_merge(int n, int lane_width) {
  check_lane_width(lane_width);
  return tag_rounds(n, oddeven_merge_rounds(n), lane_width);
}

std::vector<std::vector<Comparator>> oddeven_merge_rounds(int n) {
  check_merge_width(n);
  std::vector<Comparator> comps;
  oddeven_merge_rec(0, n, 1, comps);
  return rounds_by_distance(std::move(comps));
}

ComparatorNetwork network_from_rounds(int width,
                                      const std::vector<std::vector<Comparator>>& rounds,
                                      int lane_width) {
  require(width >= 1 && width <= kMaxNetworkWidth, "network width must be in [1, 64]");
  check_lane_width(lane_width);
  ComparatorNetwork net = tag_rounds(width, rounds, lane_width);
  check_network_wires(net);
  return net;
}

ComparatorNetwork gen_bitonic_merge(int n, int lane_width) {
  check_merge_width(n);
  check_lane_width(lane_width);
  std::vector<std::vector<Comparator>> rounds;
  // First stage folds the second half back onto the first, which is where the
  // logical reversal of the second input run lives.
  std::vector<Comparator> fold;
  for (int i = 0; i < n / 2; ++i) fold.push_back({i, n - 1 - i});
  rounds.push_back(std::move(fold));
  for (int d = n / 4; d >= 1; d /= 2) {
    std::vector<Comparator> round;
    for (int i = 0; i < n; ++i) {
      if ((i & d) == 0 && i + d < n) round.push_back({i, i + d});
    }
    rounds.push_back(std::move(round));
  }
  return tag_rounds(n, rounds, lane_width);
}

ComparatorNetwork gen_oddeven_sorter(int n, int lane_width) {
  check_merge_width(n);
  check_lane_width(lane_width);
  // Sort both halves in parallel (their stage lists zip together), then merge.
  if (n == 2) return gen_oddeven_merge(2, lane_width);
  const ComparatorNetwork half = gen_oddeven_sorter(n / 2, lane_width);
  std::vector<std::vector<Comparator>> rounds(half.stages.size());
  for (std::size_t s = 0; s < half.stages.size(); ++s) {
    for (const Comparator& c : half.stages[s].comparators) {
      rounds[s].push_back(c);
      rounds[s].push_back({c.i + n / 2, c.j + n / 2});
    }
  }
  const ComparatorNetwork merge = gen_oddeven_merge(n, lane_width);
  for (const Stage& s : merge.stages) rounds.push_back(s.comparators);
  // Re-derive tags; zipping may have mixed register relationships.
  for (auto& r : rounds) {
    std::sort(r.begin(), r.end(),
              [](const Comparator& a, const Comparator& b) { return a.i < b.i; });
  }
  return tag_rounds(n, rounds, lane_width);
}

ComparatorNetwork gen_column_sorter(int rows, int lane_width) {
  require(rows == 16, "column sorter is only defined for 16 rows");
  check_lane_width(lane_width);
  // Published 60-comparator sorting network for 16 inputs, depth 10.
  static const std::vector<std::vector<Comparator>> kStages = {
      {{0, 13}, {1, 12}, {2, 15}, {3, 14}, {4, 8}, {5, 6}, {7, 11}, {9, 10}},
      {{0, 5}, {1, 7}, {2, 9}, {3, 4}, {6, 13}, {8, 14}, {10, 15}, {11, 12}},
      {{0, 1}, {2, 3}, {4, 5}, {6, 8}, {7, 9}, {10, 11}, {12, 13}, {14, 15}},
      {{0, 2}, {1, 3}, {4, 10}, {5, 11}, {6, 7}, {8, 9}, {12, 14}, {13, 15}},
      {{1, 2}, {3, 12}, {4, 6}, {5, 7}, {8, 10}, {9, 11}, {13, 14}},
      {{1, 4}, {2, 6}, {5, 8}, {7, 10}, {9, 13}, {11, 14}},
      {{2, 4}, {3, 6}, {9, 12}, {11, 13}},
      {{3, 5}, {6, 8}, {7, 9}, {10, 12}},
      {{3, 4}, {5, 6}, {7, 8}, {9, 10}, {11, 12}},
      {{6, 7}, {8, 9}},
  };
  return tag_rounds(16, kStages, lane_width);
}

bool verify_network(const ComparatorNetwork& net, NetworkRole role) {
  check_network_wires(net);
  if (role == NetworkRole::sorter) {
    if (net.width > 24) throw std::length_error("sorter enumeration capped at width 24");
    require(net.width >= 1, "empty network");
    std::vector<Element> data(static_cast<std::size_t>(net.width));
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << net.width); ++mask) {
      for (int k = 0; k < net.width; ++k) data[static_cast<std::size_t>(k)] = (mask >> k) & 1;
      run_network(net, data);
      if (!std::is_sorted(data.begin(), data.end())) return false;
    }
    return true;
  }
  require(net.width % 2 == 0, "merger verification needs an even width");
  return verify_merger(net, net.width / 2);
}

bool verify_merger(const ComparatorNetwork& net, int first_run) {
  check_network_wires(net);
  require(first_run > 0 && first_run < net.width, "first run must split the width");
  const int runs[] = {first_run, net.width - first_run};
  return verify_multiway_merger(net, runs);
}

bool verify_multiway_merger(const ComparatorNetwork& net, std::span<const int> run_lengths) {
  check_network_wires(net);
  int total = 0;
  std::vector<int> runs;
  for (int len : run_lengths) {
    require(len > 0, "run lengths must be positive");
    total += len;
    runs.push_back(len);
  }
  require(total == net.width, "run lengths must cover the width");
  return for_each_zero_one(runs, net.width, net);
}

CostReport cost_report(const ComparatorNetwork& net, int lane_width) {
  check_lane_width(lane_width);
  require(net.width > 0 && net.width % lane_width == 0,
          "network width must be a positive multiple of the lane width");
  CostReport rep;
  rep.stages = net.stages.size();
  for (const Stage& s : net.stages) {
    rep.comparators += s.comparators.size();
    if (s.comparators.empty()) continue;
    const int d0 = s.comparators.front().j - s.comparators.front().i;
    bool uniform = true;
    bool same_reg = false;
    for (const Comparator& c : s.comparators) {
      uniform = uniform && (c.j - c.i == d0);
      same_reg = same_reg || same_register(c, lane_width);
    }
    // Uniform-distance stages without same-register pairs move whole
    // registers (plus one shift); anything else pays a select pass per
    // register of operand.
    if (same_reg || !uniform) {
      rep.intra_exchanges += static_cast<std::size_t>(net.width / lane_width);
    }
  }
  return rep;
}

std::string dump_network(const ComparatorNetwork& net) {
  std::string out;
  for (const Stage& s : net.stages) {
    out += (s.kind == StageKind::intra_register) ? "[intra]" : "[inter]";
    for (const Comparator& c : s.comparators) {
      out += ' ';
      out += std::to_string(c.i);
      out += ':';
      out += std::to_string(c.j);
    }
    out += '\n';
  }
  return out;
}

void run_network(const ComparatorNetwork& net, std::span<Element> data) {
  require(data.size() == static_cast<std::size_t>(net.width),
          "input length must equal the network width");
  for (const Stage& s : net.stages) {
    for (const Comparator& c : s.comparators) {
      cmpx_swap(data[static_cast<std::size_t>(c.i)], data[static_cast<std::size_t>(c.j)]);
    }
  }
}

FlatNetwork flatten(const ComparatorNetwork& net) {
  FlatNetwork flat;
  flat.width = net.width;
  for (const Stage& s : net.stages) {
    flat.comparators.insert(flat.comparators.end(), s.comparators.begin(), s.comparators.end());
  }
  return flat;
}

}  // namespace rvms
