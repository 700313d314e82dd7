#pragma once

#include <optional>
#include <span>
#include <vector>

#include "metasim/clients/client.hpp"

namespace metasim {

/// Per-structure description held in the prefetcher's PMT.
struct GraphPrefetchMeta {
  Addr own_base = 0;
  std::uint64_t own_size = 0;
  std::optional<Addr> next_base;
  std::uint8_t elem_size = 4;
  /// Element size of the structure `next_base` points into.
  std::uint8_t next_elem_size = 4;
  std::uint8_t stride = 1;

  static constexpr std::size_t kEncodedBytes = 28;

  bool contains(Addr a) const { return a >= own_base && a - own_base < own_size; }

  std::vector<std::uint8_t> encode() const {
    std::vector<std::uint8_t> out(kEncodedBytes, 0);
    put(out.data(), own_base);
    put(out.data() + 8, own_size);
    put(out.data() + 16, next_base.value_or(0));
    out[24] = next_base.has_value();
    out[25] = elem_size;
    out[26] = next_elem_size;
    out[27] = stride;
    return out;
  }

  static GraphPrefetchMeta decode(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kEncodedBytes) throw MetadataError("graph prefetch metadata truncated");
    GraphPrefetchMeta m;
    m.own_base = get(bytes.data());
    m.own_size = get(bytes.data() + 8);
    if (bytes[24]) m.next_base = get(bytes.data() + 16);
    m.elem_size = bytes[25];
    m.next_elem_size = bytes[26];
    m.stride = bytes[27];
    return m;
  }

  friend bool operator==(const GraphPrefetchMeta&, const GraphPrefetchMeta&) = default;

 private:
  static void put(std::uint8_t* p, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) p[i] = static_cast<std::uint8_t>(v >> (8 * i));
  }
  static std::uint64_t get(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{p[i]} << (8 * i);
    return v;
  }
};

/// Semantic prefetcher for dependent structure chains (work list, vertex
/// list, edge list, property list). Snoops every demand access.
///
/// In ideal mode the tag is read straight from the MMT at no cost, which
/// models a prefetcher that knows the structures without any lookup.
class GraphPrefetcher final : public Client {
 public:
  GraphPrefetcher(ClientId id, LookupMode mode, bool ideal = false) : Client(id, mode), ideal_(ideal) {}

  std::string_view kind() const override { return ideal_ ? "graph_prefetch_ideal" : "graph_prefetch"; }

  Cycle on_access(ClientEnv& env, const AccessInfo& a) override {
    const auto first = probe_physical(env, a.paddr, a.translated_at);
    if (!first.meta) return first.commit_bound;
    const auto& m = *first.meta;
    if (!m.contains(a.vaddr)) return first.commit_bound;

    Addr target = a.vaddr + std::uint64_t{m.stride} * m.elem_size;
    if (!m.contains(target)) return first.commit_bound;
    Cycle t = issue(env, target, first.ready);
    auto cur = m;
    while (cur.next_base) {
      const auto value = env.image.load(target, cur.elem_size);
      const Addr next = *cur.next_base + value * cur.next_elem_size;
      const auto hop = probe_virtual(env, next, t);
      if (!hop.meta || !hop.meta->contains(next)) break;
      target = next;
      cur = *hop.meta;
      t = issue(env, target, hop.ready);
    }
    return first.commit_bound;
  }

 private:
  struct Probe {
    std::optional<GraphPrefetchMeta> meta;
    Cycle ready = 0;
    Cycle commit_bound = 0;
  };

  Probe probe_physical(ClientEnv& env, Addr paddr, Cycle at) {
    if (ideal_) return from_tag(env, env.plane.mmt().tag_at(paddr), at, 0);
    const auto r = lookup(env, paddr, at);
    if (r.dropped) return {};
    return from_tag(env, r.tag, r.ready, commit_bound(r));
  }

  Probe probe_virtual(ClientEnv& env, Addr vaddr, Cycle at) {
    const auto& pages = env.process.page_map;
    if (!pages.lookup(vaddr / pages.page_bytes())) return {};
    if (ideal_) return from_tag(env, env.plane.mmt().tag_at(pages.to_physical(vaddr)), at, 0);
    const auto r = env.plane.lookup(id(), vaddr, at, mode(), env.machine);
    if (r.dropped) return {};
    return from_tag(env, r.tag, r.ready, 0);
  }

  Probe from_tag(ClientEnv& env, TagId tag, Cycle ready, Cycle bound) {
    Probe p;
    p.ready = ready;
    p.commit_bound = bound;
    if (tag.untagged()) return p;
    const auto slot = env.plane.pmt(id()).read(tag);
    auto m = GraphPrefetchMeta::decode(slot);
    if (m.own_size == 0 || m.elem_size == 0) return p;
    p.meta = m;
    return p;
  }

  /// Prefetches `vaddr` and returns when its value is known.
  Cycle issue(ClientEnv& env, Addr vaddr, Cycle at) {
    if (env.prefetch_log) env.prefetch_log->push_back(vaddr);
    const auto t = env.machine.translate(vaddr, at);
    return env.machine.prefetch(t.paddr, t.ready);
  }

  bool ideal_;
};

}  // namespace metasim
