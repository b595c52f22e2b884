#include "rvms/multiway.hpp"

#include <algorithm>
#include <array>
#include <cassert>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "rvms/cachemerge.hpp"
#include "rvms/core.hpp"
#include "rvms/networks.hpp"

namespace rvms {

namespace {

void require(bool ok, const char* message) {
  if (!ok) throw std::invalid_argument(message);
}

using Rounds = std::vector<std::vector<Comparator>>;

Rounds shifted(Rounds rounds, int offset) {
  for (std::vector<Comparator>& round : rounds) {
    for (Comparator& c : round) {
      c.i += offset;
      c.j += offset;
    }
  }
  return rounds;
}

void append(Rounds& dst, Rounds src) {
  for (std::vector<Comparator>& round : src) dst.push_back(std::move(round));
}

// Runs two schedules over disjoint wires side by side, round by round.
Rounds zipped(const Rounds& a, const Rounds& b) {
  Rounds out(std::max(a.size(), b.size()));
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (k < a.size()) out[k].insert(out[k].end(), a[k].begin(), a[k].end());
    if (k < b.size()) out[k].insert(out[k].end(), b[k].begin(), b[k].end());
  }
  return out;
}

const FlatNetwork& step_net(std::size_t carry_size, AsymVariant variant) {
  static const FlatNetwork merge16 = flatten(gen_oddeven_merge(16));
  static const FlatNetwork merge_8_16 = flatten(gen_asym_merge_8_16());
  static const std::array<FlatNetwork, 3> merge_8_24 = {
      flatten(gen_asym_merge_8_24(AsymVariant::standard)),
      flatten(gen_asym_merge_8_24(AsymVariant::iterative)),
      flatten(gen_asym_merge_8_24(AsymVariant::parallel)),
  };
  switch (carry_size) {
    case 8:
      return merge16;
    case 16:
      return merge_8_16;
    default:
      assert(carry_size == 24);
      return merge_8_24[static_cast<std::size_t>(variant)];
  }
}

const FlatNetwork& init_net(std::size_t live_runs) {
  static const std::array<FlatNetwork, 3> nets = {
      flatten(gen_init_merge(2)),
      flatten(gen_init_merge(3)),
      flatten(gen_init_merge(4)),
  };
  return nets[live_runs - 2];
}

}  // namespace

ComparatorNetwork gen_asym_merge_8_24(AsymVariant variant, int lane_width) {
  const Rounds m16 = oddeven_merge_rounds(16);
  Rounds rounds;
  switch (variant) {
    case AsymVariant::standard:
      rounds = m16;
      append(rounds, oddeven_merge_rounds(32));
      break;
    case AsymVariant::iterative:
      rounds = m16;
      append(rounds, shifted(m16, 8));
      append(rounds, shifted(m16, 16));
      break;
    case AsymVariant::parallel:
      rounds = zipped(m16, shifted(m16, 16));
      append(rounds, shifted(m16, 8));
      append(rounds, shifted(m16, 16));
      break;
  }
  return network_from_rounds(32, rounds, lane_width);
}

ComparatorNetwork gen_asym_merge_8_16(int lane_width) {
  const Rounds m16 = oddeven_merge_rounds(16);
  Rounds rounds = m16;
  append(rounds, shifted(m16, 8));
  return network_from_rounds(24, rounds, lane_width);
}

ComparatorNetwork gen_init_merge(int runs, int lane_width) {
  require(runs >= 2 && runs <= 4, "init merge takes two to four runs");
  const Rounds m16 = oddeven_merge_rounds(16);
  Rounds rounds;
  switch (runs) {
    case 2:
      rounds = m16;
      break;
    case 3:
      // Merge the first two runs, then fold the third in from the middle; the
      // final pass restores order across the seam.
      rounds = m16;
      append(rounds, shifted(m16, 8));
      append(rounds, m16);
      break;
    default:
      rounds = zipped(m16, shifted(m16, 16));
      append(rounds, oddeven_merge_rounds(32));
      break;
  }
  return network_from_rounds(8 * runs, rounds, lane_width);
}

std::array<Element, 32> asym_merge_8_24(std::span<const Element> a, std::span<const Element> b,
                                        AsymVariant variant) {
  require(a.size() == 8 && b.size() == 24, "asymmetric merge takes runs of 8 and 24");
  std::array<Element, 32> out;
  std::copy(a.begin(), a.end(), out.begin());
  std::copy(b.begin(), b.end(), out.begin() + 8);
  run_flat(step_net(24, variant), out.data());
  return out;
}

FourWayNode::FourWayNode(const std::array<std::span<const Element>, 4>& runs, AsymVariant variant)
    : variant_(variant) {
  for (std::size_t p = 0; p < 4; ++p) in_[p].data = runs[p];
  out_.reserve(kOutCapacity);

  bool ragged = false;
  std::array<std::size_t, 4> live{};
  std::size_t live_count = 0;
  for (std::size_t p = 0; p < 4; ++p) {
    const std::size_t len = in_[p].data.size();
    if (len == 0) continue;
    if (len < kEmitWidth) {
      ragged = true;
    } else {
      live[live_count++] = p;
    }
  }

  // A run too short to fill the network, or fewer than two usable runs,
  // makes the whole node a scalar merge. The common path is four long runs.
  if (ragged || live_count < 2) {
    scalar_ = true;
    emit_scalar();
    return;
  }

  std::array<Element, 32> work;
  for (std::size_t k = 0; k < live_count; ++k) {
    Input& in = in_[live[k]];
    std::copy_n(in.data.begin(), kEmitWidth,
                work.begin() + static_cast<std::ptrdiff_t>(k * kEmitWidth));
    in.pos = kEmitWidth;
  }
  run_flat(init_net(live_count), work.data());

  std::span<Element> dst = reserve_out(kEmitWidth);
  std::copy_n(work.begin(), kEmitWidth, dst.begin());
  carry_.assign(work.begin() + kEmitWidth,
                work.begin() + static_cast<std::ptrdiff_t>(live_count * kEmitWidth));
  last_emitted_ = dst.back();
  any_emitted_ = true;
}

std::span<const Element> FourWayNode::step() {
  if (scalar_) return emit_scalar();
  const int port = min_head_port();
  if (port < 0 || remaining(static_cast<std::size_t>(port)) < kEmitWidth) {
    scalar_ = true;  // nothing left but the carry, or a sub-block tail
    return emit_scalar();
  }
  return emit_network(static_cast<std::size_t>(port));
}

std::span<const Element> FourWayNode::pending() const {
  return std::span<const Element>(out_.data() + out_read_, out_.size() - out_read_);
}

void FourWayNode::consume(std::size_t count) {
  require(count <= out_.size() - out_read_, "consumed more than the pending output");
  out_read_ += count;
  if (out_read_ == out_.size()) {
    out_.clear();
    out_read_ = 0;
  }
}

bool FourWayNode::drained() const {
  if (carry_read_ < carry_.size()) return false;
  for (std::size_t p = 0; p < 4; ++p) {
    if (remaining(p) != 0) return false;
  }
  return true;
}

std::span<const Element> FourWayNode::carry() const {
  return std::span<const Element>(carry_.data() + carry_read_, carry_.size() - carry_read_);
}

int FourWayNode::min_head_port() const {
  int best = -1;
  Element best_head = 0;
  for (std::size_t p = 0; p < 4; ++p) {
    if (remaining(p) == 0) continue;
    const Element head = in_[p].data[in_[p].pos];
    if (best < 0 || head < best_head) {
      best = static_cast<int>(p);
      best_head = head;
    }
  }
  return best;
}

std::span<const Element> FourWayNode::emit_network(std::size_t port) {
  std::span<Element> dst = reserve_out(kEmitWidth);

  std::array<Element, 32> work;
  const std::size_t carry_size = carry_.size();
  Input& in = in_[port];
  std::copy_n(in.data.begin() + static_cast<std::ptrdiff_t>(in.pos), kEmitWidth, work.begin());
  in.pos += kEmitWidth;
  std::copy(carry_.begin(), carry_.end(), work.begin() + kEmitWidth);
  run_flat(step_net(carry_size, variant_), work.data());
  std::copy(work.begin() + kEmitWidth,
            work.begin() + static_cast<std::ptrdiff_t>(kEmitWidth + carry_size), carry_.begin());
  std::copy_n(work.begin(), kEmitWidth, dst.begin());

#ifndef NDEBUG
  assert(std::is_sorted(dst.begin(), dst.end()));
  assert(!any_emitted_ || dst.front() >= last_emitted_);
  assert(dst.back() <= carry_.front());
  for (std::size_t p = 0; p < 4; ++p)
    assert(remaining(p) == 0 || dst.back() <= in_[p].data[in_[p].pos]);
#endif
  last_emitted_ = dst.back();
  any_emitted_ = true;
  return dst;
}

std::span<const Element> FourWayNode::emit_scalar() {
  std::size_t left = carry_.size() - carry_read_;
  for (std::size_t p = 0; p < 4; ++p) left += remaining(p);
  const std::size_t count = std::min(left, kEmitWidth);
  if (count == 0) return {};

  std::span<Element> dst = reserve_out(count);
  for (std::size_t k = 0; k < count; ++k) {
    int best = -1;  // ports 0..3; 4 = carry, preferred on ties
    Element best_v = 0;
    if (carry_read_ < carry_.size()) {
      best = 4;
      best_v = carry_[carry_read_];
    }
    for (std::size_t p = 0; p < 4; ++p) {
      if (remaining(p) == 0) continue;
      const Element head = in_[p].data[in_[p].pos];
      if (best < 0 || head < best_v) {
        best = static_cast<int>(p);
        best_v = head;
      }
    }
    if (best == 4) {
      ++carry_read_;
    } else {
      ++in_[static_cast<std::size_t>(best)].pos;
    }
    dst[k] = best_v;
  }

  assert(std::is_sorted(dst.begin(), dst.end()));
  assert(!any_emitted_ || dst.front() >= last_emitted_);
  last_emitted_ = dst.back();
  any_emitted_ = true;
  return dst;
}

std::span<Element> FourWayNode::reserve_out(std::size_t count) {
  if (out_read_ != 0 && out_read_ == out_.size()) {
    out_.clear();
    out_read_ = 0;
  }
  if (out_.size() - out_read_ + count > kOutCapacity)
    throw std::logic_error("out buffer full; consume pending output before stepping");
  if (out_.size() + count > 2 * kOutCapacity) {
    out_.erase(out_.begin(), out_.begin() + static_cast<std::ptrdiff_t>(out_read_));
    out_read_ = 0;
  }
  const std::size_t at = out_.size();
  out_.resize(at + count);
  return std::span<Element>(out_.data() + at, count);
}

FourWayNode node_init(const std::array<std::span<const Element>, 4>& runs, AsymVariant variant) {
  return FourWayNode(runs, variant);
}

std::span<const Element> node_step(FourWayNode& node) { return node.step(); }

std::size_t merge_tree(std::span<const Element> src, std::span<const Run> runs,
                       std::span<Element> out, AsymVariant variant) {
  std::size_t total = 0;
  for (const Run& r : runs) {
    require(r.offset <= src.size() && r.length <= src.size() - r.offset,
            "run lies outside the source buffer");
    total += r.length;
  }
  require(out.size() >= total, "output buffer smaller than the runs it must hold");
  if (runs.empty()) return 0;
  if (runs.size() == 1) {
    std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(runs.front().offset), total,
                out.begin());
    return total;
  }

  int levels = 0;
  for (std::size_t width = 1; width < runs.size(); width *= 4) ++levels;

  // Levels alternate between out and an internal buffer so the last one
  // lands in out.
  std::vector<Element> tmp(levels >= 2 ? total : 0);
  std::vector<Run> cur(runs.begin(), runs.end());
  std::span<const Element> cur_src = src;

  for (int level = 0; level < levels; ++level) {
    std::span<Element> dst = (levels - 1 - level) % 2 == 0 ? out : std::span<Element>(tmp);
    std::vector<Run> next;
    next.reserve((cur.size() + 3) / 4);
    std::size_t cursor = 0;
    for (std::size_t g = 0; g < cur.size(); g += 4) {
      std::array<std::span<const Element>, 4> group{};  // short groups pad with empty runs
      std::size_t group_len = 0;
      for (std::size_t k = 0; k < 4 && g + k < cur.size(); ++k) {
        group[k] = cur_src.subspan(cur[g + k].offset, cur[g + k].length);
        group_len += cur[g + k].length;
      }

      FourWayNode node(group, variant);
      std::size_t written = 0;
      for (;;) {
        const std::span<const Element> block = node.pending();
        if (!block.empty()) {
          std::copy(block.begin(), block.end(),
                    dst.begin() + static_cast<std::ptrdiff_t>(cursor + written));
          written += block.size();
          node.consume(block.size());
          continue;
        }
        if (node.step().empty()) break;
      }
      if (written != group_len) throw std::logic_error("node lost or duplicated elements");

      next.push_back({cursor, group_len});
      cursor += group_len;
    }
    cur = std::move(next);
    cur_src = dst;
  }
  return total;
}

}  // namespace rvms
