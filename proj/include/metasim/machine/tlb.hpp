#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "metasim/common.hpp"

namespace metasim {

/// Raised when a virtual page has no physical frame.
class PageFault : public std::runtime_error {
 public:
  explicit PageFault(Addr vaddr)
      : std::runtime_error("unmapped virtual address " + std::to_string(vaddr)), vaddr_(vaddr) {}
  Addr vaddr() const { return vaddr_; }

 private:
  Addr vaddr_;
};

/// Virtual page number -> physical page number.
class PageMap {
 public:
  explicit PageMap(std::uint64_t page_bytes = 4096) : page_bytes_(page_bytes) {}

  void map(std::uint64_t vpn, std::uint64_t ppn) { table_[vpn] = ppn; }
  void unmap(std::uint64_t vpn) { table_.erase(vpn); }

  std::optional<std::uint64_t> lookup(std::uint64_t vpn) const {
    if (auto it = table_.find(vpn); it != table_.end()) return it->second;
    return std::nullopt;
  }

  bool mapped(std::uint64_t vpn) const { return table_.contains(vpn); }

  Addr to_physical(Addr vaddr) const {
    auto ppn = lookup(vaddr / page_bytes_);
    if (!ppn) throw PageFault(vaddr);
    return *ppn * page_bytes_ + vaddr % page_bytes_;
  }

  std::uint64_t page_bytes() const { return page_bytes_; }
  std::size_t size() const { return table_.size(); }
  const std::unordered_map<std::uint64_t, std::uint64_t>& entries() const { return table_; }

 private:
  std::uint64_t page_bytes_;
  std::unordered_map<std::uint64_t, std::uint64_t> table_;
};

/// Fully associative LRU data TLB.
class Tlb {
 public:
  explicit Tlb(std::uint32_t entries) : slots_(entries) {
    if (entries == 0) throw ConfigError("tlb_entries must be >= 1");
  }

  std::optional<std::uint64_t> probe(std::uint64_t vpn) {
    for (auto& s : slots_) {
      if (s.valid && s.vpn == vpn) {
        s.last_use = ++clock_;
        return s.ppn;
      }
    }
    return std::nullopt;
  }

  void insert(std::uint64_t vpn, std::uint64_t ppn) {
    Slot* victim = nullptr;
    for (auto& s : slots_)
      if (s.valid && s.vpn == vpn) victim = &s;
    for (auto& s : slots_)
      if (!victim && !s.valid) victim = &s;
    if (!victim) {
      victim = &slots_.front();
      for (auto& s : slots_)
        if (s.last_use < victim->last_use) victim = &s;
    }
    *victim = Slot{true, vpn, ppn, ++clock_};
  }

  /// Rewrites an existing entry in place (page remap); absent entries are left absent.
  void update(std::uint64_t vpn, std::uint64_t ppn) {
    for (auto& s : slots_)
      if (s.valid && s.vpn == vpn) s.ppn = ppn;
  }

  void invalidate(std::uint64_t vpn) {
    for (auto& s : slots_)
      if (s.valid && s.vpn == vpn) s.valid = false;
  }

  void flush() {
    for (auto& s : slots_) s.valid = false;
  }

  std::vector<std::uint64_t> resident_vpns() const {
    std::vector<std::uint64_t> out;
    for (const auto& s : slots_)
      if (s.valid) out.push_back(s.vpn);
    return out;
  }

 private:
  struct Slot {
    bool valid = false;
    std::uint64_t vpn = 0;
    std::uint64_t ppn = 0;
    std::uint64_t last_use = 0;
  };
  std::vector<Slot> slots_;
  std::uint64_t clock_ = 0;
};

struct Translation {
  Addr paddr = 0;
  bool tlb_hit = false;
  std::uint32_t extra_mem_accesses = 0;
};

/// Functional translation through the TLB; a miss costs `walk_accesses`
/// page-table reads and installs the entry.
inline Translation translate(Tlb& tlb, const PageMap& pages, Addr vaddr,
                             std::uint32_t walk_accesses) {
  const auto pb = pages.page_bytes();
  const auto vpn = vaddr / pb;
  if (auto ppn = tlb.probe(vpn)) return {*ppn * pb + vaddr % pb, true, 0};
  auto ppn = pages.lookup(vpn);
  if (!ppn) throw PageFault(vaddr);
  tlb.insert(vpn, *ppn);
  return {*ppn * pb + vaddr % pb, false, walk_accesses};
}

}  // namespace metasim
