#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "metasim/clients/graph_prefetch.hpp"
#include "metasim/workloads/trace.hpp"

namespace metasim {

/// Lowest virtual address any generator places data at.
inline constexpr Addr kDataBase = 0x100000;

namespace detail {

constexpr std::uint64_t kAlign = 4096;

inline Addr align_up(Addr a, std::uint64_t to = kAlign) { return (a + to - 1) / to * to; }

/// Portable deterministic randomness: only raw mt19937_64 output is used,
/// because the standard distributions differ between library vendors.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : gen_() % n; }
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

 private:
  std::mt19937_64 gen_;
};

inline Trace start(std::string generator, std::uint64_t seed, std::map<std::string, std::string> params) {
  Trace t;
  t.header.generator = std::move(generator);
  t.header.seed = seed;
  t.header.params = std::move(params);
  return t;
}

inline void load(Trace& t, Addr a, std::uint32_t size = 4) { t.events.push_back(MemAccess{AccessKind::Load, a, size}); }
inline void store(Trace& t, Addr a, std::uint32_t size = 4) { t.events.push_back(MemAccess{AccessKind::Store, a, size}); }
inline void op(Trace& t, MetaOp o) { t.events.push_back(MetaEvent{std::move(o)}); }

inline std::string str(std::uint64_t v) { return std::to_string(v); }

}  // namespace detail

/// Sequential loads over a fresh array, each element touched once.
inline Trace gen_stream(std::uint64_t bytes, std::uint32_t elem = 4) {
  if (elem == 0 || bytes < elem) throw ConfigError("stream: bytes must be >= elem > 0");
  auto t = detail::start("stream", 0, {{"bytes", detail::str(bytes)}, {"elem", detail::str(elem)}});
  const std::uint64_t n = bytes / elem;
  t.events.reserve(n + 1);
  detail::op(t, MapOp{TagId{1}, kDataBase, n * elem});
  for (std::uint64_t i = 0; i < n; ++i) detail::load(t, kDataBase + i * elem, elem);
  t.header.address_space_bytes = detail::align_up(kDataBase + n * elem);
  return t;
}

/// Uniform random 4-byte loads over `region_bytes`.
inline Trace gen_random(std::uint64_t region_bytes, std::uint64_t accesses, std::uint64_t seed) {
  if (region_bytes < 64) throw ConfigError("random: region_bytes must be >= 64");
  auto t = detail::start("random", seed,
                         {{"region_bytes", detail::str(region_bytes)}, {"accesses", detail::str(accesses)}});
  detail::Rng rng(seed);
  const std::uint64_t slots = region_bytes / 4;
  t.events.reserve(accesses + 1);
  detail::op(t, MapOp{TagId{1}, kDataBase, slots * 4});
  for (std::uint64_t i = 0; i < accesses; ++i) detail::load(t, kDataBase + rng.below(slots) * 4);
  t.header.address_space_bytes = detail::align_up(kDataBase + slots * 4);
  return t;
}

/// Linked list with nodes scattered over a pool: creation, insertion, then
/// `traversals` walks following the next references. Each node occupies
/// `slot_bytes` of the pool (next pointer at offset 0, payload at 8).
inline Trace gen_linked_list(std::uint64_t nodes, std::uint64_t traversals, std::uint64_t seed,
                             std::uint64_t slot_bytes = 64) {
  if (nodes < 2) throw ConfigError("linked_list: nodes must be >= 2");
  if (slot_bytes < 16) throw ConfigError("linked_list: slot_bytes must be >= 16");
  auto t = detail::start("linked_list", seed,
                         {{"nodes", detail::str(nodes)},
                          {"traversals", detail::str(traversals)},
                          {"slot_bytes", detail::str(slot_bytes)}});
  detail::Rng rng(seed);
  std::vector<Addr> slot(nodes);
  for (std::uint64_t i = 0; i < nodes; ++i) slot[i] = kDataBase + i * slot_bytes;
  rng.shuffle(slot);

  // Build the first part in order, then splice the rest in at random points.
  const std::uint64_t initial = std::max<std::uint64_t>(2, nodes - nodes / 8);
  std::vector<Addr> list(slot.begin(), slot.begin() + initial);
  detail::op(t, MapOp{TagId{1}, kDataBase, nodes * slot_bytes});
  for (std::uint64_t i = 0; i < initial; ++i) {
    detail::store(t, list[i] + 8, 8);
    if (i > 0) detail::store(t, list[i - 1], 8);
  }
  for (std::uint64_t i = initial; i < nodes; ++i) {
    const auto at = rng.below(list.size());  // insert after list[at]
    const Addr fresh = slot[i];
    detail::store(t, fresh + 8, 8);
    detail::load(t, list[at], 8);
    detail::store(t, fresh, 8);
    detail::store(t, list[at], 8);
    list.insert(list.begin() + static_cast<std::ptrdiff_t>(at) + 1, fresh);
  }
  for (std::size_t i = 0; i < list.size(); ++i)
    t.image.store(list[i], 8, i + 1 < list.size() ? list[i + 1] : 0);

  for (std::uint64_t pass = 0; pass < traversals; ++pass) {
    for (const Addr node : list) {
      detail::load(t, node + 8, 8);
      detail::load(t, node, 8);
    }
  }
  t.header.address_space_bytes = detail::align_up(kDataBase + nodes * slot_bytes);
  return t;
}

/// 3D array laid out contiguously along x, traversed z fastest, then y, then x.
/// `x_steps` limits the walk to the first x indices (0 = all of them).
inline Trace gen_3d_array(std::uint64_t dx, std::uint64_t dy, std::uint64_t dz, std::uint32_t elem = 4,
                          std::uint64_t passes = 1, std::uint64_t x_steps = 0) {
  if (dx == 0 || dy == 0 || dz == 0 || elem == 0) throw ConfigError("3d_array: dims must be >= 1");
  auto t = detail::start("3d_array", 0,
                         {{"dx", detail::str(dx)},
                          {"dy", detail::str(dy)},
                          {"dz", detail::str(dz)},
                          {"elem", detail::str(elem)},
                          {"passes", detail::str(passes)},
                          {"x_steps", detail::str(x_steps)}});
  const std::uint64_t bytes = dx * dy * dz * elem;
  const std::uint64_t xs = x_steps == 0 ? dx : std::min(x_steps, dx);
  t.events.reserve(passes * xs * dy * dz + 1);
  detail::op(t, MapOp{TagId{1}, kDataBase, bytes});
  for (std::uint64_t p = 0; p < passes; ++p)
    for (std::uint64_t i = 0; i < xs; ++i)
      for (std::uint64_t j = 0; j < dy; ++j)
        for (std::uint64_t k = 0; k < dz; ++k) detail::load(t, kDataBase + ((k * dy + j) * dx + i) * elem, elem);
  t.header.address_space_bytes = detail::align_up(kDataBase + bytes);
  return t;
}

/// Layout of the four graph structures of a generated traversal.
struct GraphLayout {
  std::uint64_t vertices = 0;
  std::uint64_t edges = 0;
  Addr work_list = 0;
  Addr vertex_list = 0;
  Addr edge_list = 0;
  Addr property = 0;
  static constexpr std::uint32_t kIndexBytes = 4;
  static constexpr std::uint32_t kPropertyBytes = 8;

  std::uint64_t work_bytes() const { return vertices * kIndexBytes; }
  std::uint64_t vertex_bytes() const { return (vertices + 1) * kIndexBytes; }
  std::uint64_t edge_bytes() const { return std::max<std::uint64_t>(edges, 1) * kIndexBytes; }
  std::uint64_t property_bytes() const { return vertices * kPropertyBytes; }
};

inline GraphLayout graph_layout(std::uint64_t vertices, std::uint64_t edges) {
  GraphLayout g;
  g.vertices = vertices;
  g.edges = edges;
  g.work_list = kDataBase;
  g.vertex_list = detail::align_up(g.work_list + g.work_bytes());
  g.edge_list = detail::align_up(g.vertex_list + g.vertex_bytes());
  g.property = detail::align_up(g.edge_list + g.edge_bytes());
  return g;
}

/// The four prefetcher descriptors, in tag order 1..4 (work, vertex, edge, property).
inline std::vector<GraphPrefetchMeta> graph_prefetch_metas(const GraphLayout& g, std::uint8_t stride) {
  constexpr auto ib = GraphLayout::kIndexBytes;
  constexpr auto pb = GraphLayout::kPropertyBytes;
  return {
      {g.work_list, g.work_bytes(), g.vertex_list, ib, ib, stride},
      {g.vertex_list, g.vertex_bytes(), g.edge_list, ib, ib, stride},
      {g.edge_list, g.edge_bytes(), g.property, ib, pb, stride},
      {g.property, g.property_bytes(), std::nullopt, pb, pb, stride},
  };
}

/// BFS-like traversal over a random graph in CSR form. The work list holds
/// the visit order; each entry reads its vertex offsets, its edges, and the
/// neighbours' properties. The expected outcome carries the dependent
/// addresses a perfect structure-aware prefetcher would fetch.
inline Trace gen_graph_traversal(std::uint64_t vertices, std::uint64_t avg_degree, std::uint64_t seed,
                                 std::uint8_t stride = 1) {
  if (vertices == 0) throw ConfigError("graph: vertices must be >= 1");
  if (stride == 0) throw ConfigError("graph: stride must be >= 1");
  auto t = detail::start("graph", seed,
                         {{"vertices", detail::str(vertices)},
                          {"degree", detail::str(avg_degree)},
                          {"stride", detail::str(stride)}});
  detail::Rng rng(seed);

  std::vector<std::vector<std::uint64_t>> adj(vertices);
  for (std::uint64_t v = 0; v < vertices; ++v) {
    const auto deg = avg_degree == 0 ? 0 : rng.below(2 * avg_degree + 1);
    for (std::uint64_t d = 0; d < deg; ++d) adj[v].push_back(rng.below(vertices));
  }
  std::vector<std::uint64_t> offsets(vertices + 1, 0);
  for (std::uint64_t v = 0; v < vertices; ++v) offsets[v + 1] = offsets[v] + adj[v].size();

  // Visit order: BFS from vertex 0, then every vertex not yet reached.
  std::vector<std::uint64_t> order;
  std::vector<bool> seen(vertices, false);
  for (std::uint64_t root = 0; root < vertices; ++root) {
    if (seen[root]) continue;
    seen[root] = true;
    order.push_back(root);
    for (std::size_t head = order.size() - 1; head < order.size(); ++head)
      for (auto u : adj[order[head]])
        if (!seen[u]) {
          seen[u] = true;
          order.push_back(u);
        }
  }

  const auto g = graph_layout(vertices, offsets.back());
  constexpr auto ib = GraphLayout::kIndexBytes;
  constexpr auto pb = GraphLayout::kPropertyBytes;
  for (std::uint64_t i = 0; i < vertices; ++i) t.image.store(g.work_list + i * ib, ib, order[i]);
  for (std::uint64_t v = 0; v <= vertices; ++v) t.image.store(g.vertex_list + v * ib, ib, offsets[v]);
  for (std::uint64_t v = 0; v < vertices; ++v)
    for (std::size_t k = 0; k < adj[v].size(); ++k) t.image.store(g.edge_list + (offsets[v] + k) * ib, ib, adj[v][k]);
  for (std::uint64_t v = 0; v < vertices; ++v) t.image.store(g.property + v * pb, pb, v * 7 + 1);

  const auto metas = graph_prefetch_metas(g, stride);
  const ClientId prefetcher{0};
  for (std::uint8_t i = 0; i < 4; ++i) detail::op(t, CreateOp{prefetcher, TagId(i + 1), metas[i].encode()});
  for (std::uint8_t i = 0; i < 4; ++i) detail::op(t, MapOp{TagId(i + 1), metas[i].own_base, metas[i].own_size});

  for (std::uint64_t i = 0; i < vertices; ++i) {
    const auto v = order[i];
    detail::load(t, g.work_list + i * ib, ib);
    detail::load(t, g.vertex_list + v * ib, ib);
    detail::load(t, g.vertex_list + (v + 1) * ib, ib);
    for (auto e = offsets[v]; e < offsets[v + 1]; ++e) {
      detail::load(t, g.edge_list + e * ib, ib);
      detail::load(t, g.property + adj[v][e - offsets[v]] * pb, pb);
      t.events.push_back(ComputeEvent{1});
    }
  }

  // Oracle: for each demand access, step `stride` elements ahead inside the
  // structure, then follow the stored values from structure to structure.
  struct Span {
    Addr base;
    std::uint64_t bytes;
    std::uint32_t elem;
  };
  const Span spans[4] = {{g.work_list, g.work_bytes(), ib},
                         {g.vertex_list, g.vertex_bytes(), ib},
                         {g.edge_list, g.edge_bytes(), ib},
                         {g.property, g.property_bytes(), pb}};
  auto within = [&](int s, Addr a) { return a >= spans[s].base && a < spans[s].base + spans[s].bytes; };
  for (const auto& ev : t.events) {
    const auto* m = std::get_if<MemAccess>(&ev);
    if (!m) continue;
    int s = 0;
    while (s < 4 && !within(s, m->vaddr)) ++s;
    if (s == 4) continue;
    Addr a = m->vaddr + std::uint64_t{stride} * spans[s].elem;
    if (!within(s, a)) continue;
    t.expected.prefetch_oracle.push_back(a);
    while (s < 3) {
      const auto value = t.image.load(a, spans[s].elem);
      const Addr next = spans[s + 1].base + value * spans[s + 1].elem;
      if (!within(s + 1, next)) break;
      t.expected.prefetch_oracle.push_back(next);
      a = next;
      ++s;
    }
  }
  t.header.address_space_bytes = detail::align_up(g.property + g.property_bytes());
  return t;
}

enum class SafetyKind { Bounds, Rap };

/// Bounds corpus: three arrays of `array_elems` 4-byte elements tagged 1..3
/// and a loop of `scale` iterations that reads array1 and array2 and writes
/// array3, sweeping the arrays repeatedly. Each access is preceded by a
/// CREATE naming the array it intends to touch. Injected violations either
/// run past array1's end into untagged memory or read array3 under array2's tag.
inline Trace gen_bounds_corpus(std::uint64_t scale, std::uint64_t seed, std::uint64_t inject,
                               std::uint64_t array_elems = 512) {
  if (scale == 0 || array_elems == 0) throw ConfigError("bounds corpus: scale and array_elems must be >= 1");
  auto t = detail::start("safety_bounds", seed,
                         {{"scale", detail::str(scale)},
                          {"inject", detail::str(inject)},
                          {"array_elems", detail::str(array_elems)}});
  detail::Rng rng(seed);
  const std::uint64_t bytes = array_elems * 4;
  const Addr a1 = kDataBase;
  const Addr guard = detail::align_up(a1 + bytes);  // untagged page past array1
  const Addr a2 = guard + detail::kAlign;
  const Addr a3 = detail::align_up(a2 + bytes) + detail::kAlign;

  const auto k = std::min<std::uint64_t>(inject, scale);
  std::vector<std::uint64_t> picks(scale);
  for (std::uint64_t i = 0; i < scale; ++i) picks[i] = i;
  rng.shuffle(picks);
  std::set<std::uint64_t> bad(picks.begin(), picks.begin() + static_cast<std::ptrdiff_t>(k));

  const ClientId checker{0};
  auto create = [&](std::uint8_t tag) { detail::op(t, CreateOp{checker, TagId(tag), {tag}}); };
  auto violation = [&](Addr a) {
    t.events.push_back(LabelEvent{ViolationKind::BoundsViolation});
    t.expected.violation_positions.push_back(t.events.size());
    detail::load(t, a);
  };
  detail::op(t, MapOp{TagId{1}, a1, bytes});
  detail::op(t, MapOp{TagId{2}, a2, bytes});
  detail::op(t, MapOp{TagId{3}, a3, bytes});
  for (std::uint64_t i = 0; i < scale; ++i) {
    const auto idx = i % array_elems;
    const bool inj = bad.contains(i);
    const bool overflow = inj && rng.below(2) == 0;
    create(1);
    if (overflow) violation(guard + (idx * 4) % detail::kAlign);
    else detail::load(t, a1 + idx * 4);
    create(2);
    if (inj && !overflow) violation(a3 + idx * 4);
    else detail::load(t, a2 + idx * 4);
    t.events.push_back(ComputeEvent{1});
    create(3);
    detail::store(t, a3 + idx * 4);
  }
  if (k > 0) t.expected.violation_kind = ViolationKind::BoundsViolation;
  t.header.address_space_bytes = detail::align_up(a3 + bytes) + detail::kAlign;
  return t;
}

/// Return-address corpus: `scale` calls in a random nest (depth <= 8). Each
/// frame is 128 B: the return slot owns the first 64 B, locals the second.
/// Injected violations store into the live return slot of the current frame.
inline Trace gen_rap_corpus(std::uint64_t scale, std::uint64_t seed, std::uint64_t inject) {
  constexpr std::uint64_t kFrame = 128;
  constexpr std::uint64_t kMaxDepth = 8;
  auto t = detail::start("safety_rap", seed, {{"scale", detail::str(scale)}, {"inject", detail::str(inject)}});
  detail::Rng rng(seed);
  const Addr stack_top = kDataBase + detail::align_up(kFrame * (kMaxDepth + 1));
  auto slot_of = [&](std::uint64_t depth) { return stack_top - (depth + 1) * kFrame; };

  const auto k = std::min<std::uint64_t>(inject, scale);
  std::vector<std::uint64_t> picks(scale);
  for (std::uint64_t i = 0; i < scale; ++i) picks[i] = i;
  rng.shuffle(picks);
  std::set<std::uint64_t> bad(picks.begin(), picks.begin() + static_cast<std::ptrdiff_t>(k));

  auto body = [&](std::uint64_t depth, std::uint64_t call) {
    const Addr locals = slot_of(depth) + 64;
    const auto n = 2 + rng.below(4);
    for (std::uint64_t i = 0; i < n; ++i) {
      const Addr a = locals + 8 * rng.below(8);
      if (rng.below(2)) detail::store(t, a, 8);
      else detail::load(t, a, 8);
      t.events.push_back(ComputeEvent{1 + rng.below(3)});
    }
    if (bad.contains(call)) {
      t.events.push_back(LabelEvent{ViolationKind::ReturnAddressOverwrite});
      t.expected.violation_positions.push_back(t.events.size());
      detail::store(t, slot_of(depth), 8);
    }
  };

  std::uint64_t depth = 0;
  std::uint64_t calls = 0;
  std::vector<std::uint64_t> open;  // call index per live frame
  while (calls < scale || !open.empty()) {
    const bool can_call = calls < scale && depth < kMaxDepth;
    if (can_call && (open.empty() || rng.below(2) == 0)) {
      t.events.push_back(CallEvent{slot_of(depth)});
      open.push_back(calls++);
      ++depth;
      body(depth - 1, open.back());
    } else {
      --depth;
      detail::load(t, slot_of(depth) + 64, 8);
      t.events.push_back(ReturnEvent{slot_of(depth)});
      open.pop_back();
      if (depth > 0) detail::store(t, slot_of(depth - 1) + 64 + 8 * rng.below(8), 8);
    }
  }
  if (k > 0) t.expected.violation_kind = ViolationKind::ReturnAddressOverwrite;
  t.header.address_space_bytes = stack_top + detail::kAlign;
  return t;
}

inline Trace gen_safety_corpus(SafetyKind kind, std::uint64_t scale, std::uint64_t seed, std::uint64_t inject) {
  return kind == SafetyKind::Bounds ? gen_bounds_corpus(scale, seed, inject) : gen_rap_corpus(scale, seed, inject);
}

}  // namespace metasim
