#pragma once

#include <algorithm>
#include <deque>
#include <optional>
#include <utility>
#include <vector>

#include "metasim/machine/cache.hpp"
#include "metasim/machine/config.hpp"
#include "metasim/machine/mem_controller.hpp"
#include "metasim/machine/stats.hpp"
#include "metasim/machine/tlb.hpp"

namespace metasim {

/// Timing plumbing shared by the core and the metadata plane: the TLB with
/// its page walker, the L1D with MSHRs and a prefetch buffer, and the memory
/// controller. Every method takes the cycle at which the operation starts and
/// returns when its result is available; the caller owns the core clock.
class Machine {
 public:
  struct TimedTranslation {
    Addr paddr = 0;
    bool tlb_hit = false;
    Cycle ready = 0;
  };

  struct DataAccess {
    bool l1_hit = false;
    bool prefetch_hit = false;
    Cycle ready = 0;
  };

  Machine(const MachineConfig& cfg, const PageMap& pages, Stats& stats)
      : cfg_(cfg),
        pages_(&pages),
        stats_(&stats),
        l1_(cfg.l1_sets(), cfg.l1_ways, cfg.l1_line_bytes, Replacement::Lru),
        tlb_(cfg.tlb_entries),
        mem_(cfg.mem_latency_cycles, cfg.mem_issue_interval_cycles) {
    cfg.validate();
  }

  /// Address translation through the DTLB. A miss walks the page table with
  /// `tlb_walk_mem_accesses` dependent memory reads.
  TimedTranslation translate(Addr vaddr, Cycle at) {
    const auto t = metasim::translate(tlb_, *pages_, vaddr, cfg_.tlb_walk_mem_accesses);
    Cycle ready = at;
    if (t.tlb_hit) {
      ++stats_->tlb_hits;
    } else {
      ++stats_->tlb_misses;
      for (std::uint32_t i = 0; i < t.extra_mem_accesses; ++i) ready = memory_request(ready);
    }
    return {t.paddr, t.tlb_hit, ready};
  }

  /// Demand access to the L1D. Loads block until data returns; store misses
  /// only stall while every MSHR is busy.
  DataAccess access_data(Addr paddr, bool is_write, Cycle at) {
    const auto line = l1_.line_number(paddr);
    if (l1_.access(paddr, is_write).hit) {
      ++stats_->l1_hits;
      return {true, false, at + cfg_.l1_hit_cycles};
    }
    ++stats_->l1_misses;
    if (auto pf = take_prefetched(line)) {
      ++stats_->prefetches_useful;
      return {false, true, std::max(at + cfg_.l1_hit_cycles, *pf)};
    }
    const Cycle issue = acquire_mshr(at);
    const Cycle done = memory_request(issue);
    mshrs_.emplace_back(issue, done);
    for (std::uint32_t d = 1; d <= cfg_.stride_prefetch_degree; ++d) {
      const Addr next = (line + d) * cfg_.l1_line_bytes;
      if (next / cfg_.page_bytes != paddr / cfg_.page_bytes) break;
      prefetch(next, issue);
    }
    return {false, false, is_write ? issue + cfg_.l1_hit_cycles : done};
  }

  /// Brings a line toward the core into the prefetch buffer. Returns the
  /// cycle at which its data (and value) is available.
  Cycle prefetch(Addr paddr, Cycle at) {
    ++stats_->prefetches_issued;
    const auto line = l1_.line_number(paddr);
    if (l1_.contains(paddr)) return at + cfg_.l1_hit_cycles;
    for (const auto& [l, ready] : pf_buffer_)
      if (l == line) return std::max(at, ready);
    const Cycle issue = acquire_mshr(at);
    const Cycle done = memory_request(issue);
    mshrs_.emplace_back(issue, done);
    if (pf_buffer_.size() >= cfg_.prefetch_buffer_lines) pf_buffer_.pop_front();
    pf_buffer_.emplace_back(line, done);
    return done;
  }

  /// One request through the memory controller.
  Cycle memory_request(Cycle at) {
    ++stats_->mem_accesses;
    return mem_.request(at);
  }

  /// Garbage-collects bookkeeping older than `now`; keeps runs O(events).
  void retire(Cycle now) {
    const Cycle horizon = now > kRetireSlack ? now - kRetireSlack : 0;
    mem_.retire_before(horizon);
    std::erase_if(mshrs_, [horizon](const auto& m) { return m.second <= horizon; });
  }

  void flush_tlb() { tlb_.flush(); }

  Tlb& tlb() { return tlb_; }
  SetAssocCache& l1() { return l1_; }
  const PageMap& pages() const { return *pages_; }
  const MachineConfig& config() const { return cfg_; }

 private:
  static constexpr Cycle kRetireSlack = 1'000'000;

  Cycle acquire_mshr(Cycle at) {
    Cycle t = at;
    for (;;) {
      std::uint32_t busy = 0;
      Cycle earliest_free = ~Cycle{0};
      for (const auto& [start, end] : mshrs_) {
        if (start <= t && t < end) {
          ++busy;
          earliest_free = std::min(earliest_free, end);
        }
      }
      if (busy < cfg_.mshr_entries) return t;
      t = earliest_free;
    }
  }

  std::optional<Cycle> take_prefetched(std::uint64_t line) {
    for (auto it = pf_buffer_.begin(); it != pf_buffer_.end(); ++it) {
      if (it->first == line) {
        const auto ready = it->second;
        pf_buffer_.erase(it);
        return ready;
      }
    }
    return std::nullopt;
  }

  MachineConfig cfg_;
  const PageMap* pages_;
  Stats* stats_;
  SetAssocCache l1_;
  Tlb tlb_;
  MemController mem_;
  std::vector<std::pair<Cycle, Cycle>> mshrs_;
  std::deque<std::pair<std::uint64_t, Cycle>> pf_buffer_;
};

}  // namespace metasim
