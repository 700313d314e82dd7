#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "metasim/machine/machine.hpp"
#include "metasim/metadata/plane.hpp"

namespace metasim {

enum class ViolationKind { BoundsViolation, ReturnAddressOverwrite };

inline std::string_view to_string(ViolationKind k) {
  return k == ViolationKind::BoundsViolation ? "bounds_violation" : "return_address_overwrite";
}

enum class PageMapPolicy { Identity, Scattered };

struct OsConfig {
  Cycle context_switch_cycles = 1000;
  bool flush_mmc_on_switch = true;
  /// When false, traps are logged and simulation continues (record-only mode).
  bool terminate_on_trap = true;
  PageMapPolicy page_map = PageMapPolicy::Identity;
};

/// Virtual window where the kernel exposes the MMT to the metadata hardware.
inline constexpr Addr kMmtVirtualBase = Addr{1} << 40;

/// Reserves the MMT at the top of physical memory (page aligned).
inline Mmt allocate_mmt(std::uint64_t physical_memory_bytes, std::uint64_t granularity,
                        std::uint64_t page_bytes = 4096) {
  if (!is_power_of_two(granularity)) throw ConfigError("granularity must be a power of two");
  if (granularity > physical_memory_bytes) throw ConfigError("granularity larger than physical memory");
  const auto footprint = physical_memory_bytes / granularity * Mmt::kEntryBytes;
  const auto base = (physical_memory_bytes - footprint) / page_bytes * page_bytes;
  return Mmt(physical_memory_bytes, granularity, base);
}

/// Address-space bookkeeping of the simulated process.
///
/// Physical layout, low to high: data frames | page table | MMT.
struct ProcessContext {
  PageMap page_map;
  Addr mmt_base = 0;
  Addr mmt_vbase = kMmtVirtualBase;
  Addr page_table_base = 0;
  std::uint64_t data_frames = 0;
  bool live = true;

  /// Physical address of the leaf PTE for a virtual page.
  Addr pte_paddr(std::uint64_t vpn) const { return page_table_base + vpn * 8; }
};

/// Builds the page table for a process whose data lives in [0, address_space_bytes)
/// and maps the MMT into its kernel window.
inline ProcessContext build_process(std::uint64_t address_space_bytes, const Mmt& mmt, std::uint64_t page_bytes,
                                    PageMapPolicy policy, std::uint64_t seed) {
  ProcessContext ctx{PageMap(page_bytes)};
  ctx.mmt_base = mmt.base_paddr();
  const auto pages = ceil_div(std::max<std::uint64_t>(address_space_bytes, 1), page_bytes);
  const auto pt_bytes = ceil_div(pages * 8, page_bytes) * page_bytes;
  if (pt_bytes > ctx.mmt_base) throw ConfigError("physical memory too small for the page table");
  ctx.page_table_base = ctx.mmt_base - pt_bytes;
  ctx.data_frames = ctx.page_table_base / page_bytes;
  if (pages > ctx.data_frames)
    throw ConfigError("address space of " + std::to_string(address_space_bytes) +
                      " bytes does not fit in physical memory below the MMT");

  std::vector<std::uint64_t> frames(pages);
  if (policy == PageMapPolicy::Identity) {
    std::iota(frames.begin(), frames.end(), 0);
  } else {
    std::vector<std::uint64_t> pool(ctx.data_frames);
    std::iota(pool.begin(), pool.end(), 0);
    std::mt19937_64 rng(seed ^ 0x5ca77e12ULL);
    std::shuffle(pool.begin(), pool.end(), rng);
    std::copy_n(pool.begin(), pages, frames.begin());
  }
  for (std::uint64_t vpn = 0; vpn < pages; ++vpn) ctx.page_map.map(vpn, frames[vpn]);

  const auto mmt_pages = ceil_div(mmt.footprint_bytes(), page_bytes);
  for (std::uint64_t i = 0; i < mmt_pages; ++i)
    ctx.page_map.map(ctx.mmt_vbase / page_bytes + i, ctx.mmt_base / page_bytes + i);
  return ctx;
}

/// Flushes per-process metadata state. Returns the cycles charged.
inline Cycle context_switch(MetadataPlane& plane, Machine& machine, const OsConfig& os) {
  plane.flush_pmts();
  machine.flush_tlb();
  if (os.flush_mmc_on_switch) plane.flush_mmc();
  return os.context_switch_cycles;
}

/// Moves virtual page `vpn` to frame `new_ppn`, migrating its MMT entries and
/// invalidating stale MMC/TLB state. Returns the number of tagged regions moved.
inline std::uint64_t remap_page(ProcessContext& ctx, std::uint64_t vpn, std::uint64_t new_ppn,
                                MetadataPlane& plane, Machine& machine) {
  const auto old_ppn = ctx.page_map.lookup(vpn);
  if (!old_ppn) throw PageFault(vpn * ctx.page_map.page_bytes());
  if (new_ppn >= ctx.data_frames) throw ConfigError("remap target outside data frames");
  const auto pb = ctx.page_map.page_bytes();
  auto& mmt = plane.mmt();
  const auto g = mmt.granularity();
  std::uint64_t moved = 0;
  if (*old_ppn != new_ppn) {
    // With granularity above the page size the old region is shared with
    // neighbouring pages, so it is copied but not cleared.
    const auto per_page = std::max<std::uint64_t>(1, pb / g);
    const auto old_first = mmt.region_of(*old_ppn * pb);
    const auto new_first = mmt.region_of(new_ppn * pb);
    for (std::uint64_t i = 0; i < per_page; ++i) {
      const auto t = mmt.tag(old_first + i);
      if (!t.untagged()) ++moved;
      mmt.set(new_first + i, t);
      if (g <= pb) mmt.set(old_first + i, kUntagged);
      plane.invalidate(old_first + i);
      plane.invalidate(new_first + i);
    }
  }
  ctx.page_map.map(vpn, new_ppn);
  machine.tlb().update(vpn, new_ppn);
  return moved;
}

struct TrapRecord {
  ViolationKind kind;
  Addr vaddr = 0;
  std::size_t position = 0;
  bool expected = false;
  friend bool operator==(const TrapRecord&, const TrapRecord&) = default;
};

/// Trap delivery: counts, logs, and latches program termination.
class TrapLog {
 public:
  const TrapRecord& raise(ViolationKind kind, Addr vaddr, std::size_t position, bool expected,
                          Stats& stats, bool terminate) {
    ++stats.traps;
    if (terminate) terminated_ = true;
    records_.push_back({kind, vaddr, position, expected});
    return records_.back();
  }

  const std::vector<TrapRecord>& records() const { return records_; }
  bool terminated() const { return terminated_; }

 private:
  std::vector<TrapRecord> records_;
  bool terminated_ = false;
};

}  // namespace metasim
